#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "corrlda/corpus.hpp"
#include "corrlda/inference.hpp"
#include "corrlda/model.hpp"

namespace corrlda {

struct ScoredWord {
    std::size_t word = 0;
    double score = 0.0;
};

struct Annotation {
    std::string doc_id;
    std::vector<ScoredWord> words; // scores non-increasing, ties by ascending word id
    std::size_t length_requested = 0;
};

// Posterior word distribution theta . beta: one probability per text word,
// summing to 1. Shares its accumulation order with query_word_probability,
// so retrieval factors and annotation scores agree bitwise.
std::vector<double> annotation_scores(std::span<const double> theta, const ModelParams& params);

// Infers theta for the sensory vector, ranks all text words by
// annotation_scores descending (ties by ascending word id), keeps the
// top_k best and drops scores below the threshold when one is given.
Annotation annotate(const BowVector& sensory, const ModelParams& params, const TrainConfig& cfg,
                    std::size_t top_k, std::optional<double> threshold = std::nullopt,
                    const std::string& doc_id = "video");

} // namespace corrlda
