#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "corrlda/corpus.hpp"
#include "corrlda/inference.hpp"
#include "corrlda/model.hpp"
#include "corrlda/stopwords.hpp"
#include "corrlda/tokenize.hpp"
#include "corrlda/vocabulary.hpp"

namespace corrlda {

struct ScoredId {
    std::string id;
    double score = 0.0;
};

// Scores strictly non-increasing; ties broken by ascending id.
struct RankedList {
    std::vector<ScoredId> items;
};

struct IndexEntry {
    std::string id;
    std::vector<double> theta;
    std::optional<std::string> category;
};

// Cached per-video topic mixtures plus a digest pinning the model they
// were inferred under.
struct RetrievalIndex {
    std::vector<IndexEntry> entries;
    std::size_t k = 0;
    std::uint32_t model_digest = 0;
};

// One entry per document, theta from infer_theta. When train_states is
// given (one per document, from training on this corpus), their gamma is
// normalized instead of re-running inference.
RetrievalIndex build_index(const Corpus& corpus, const ModelParams& params,
                           const TrainConfig& cfg,
                           const std::vector<VariationalState>* train_states = nullptr);

void save_index(const RetrievalIndex& index, const std::filesystem::path& path);
RetrievalIndex load_index(const std::filesystem::path& path);

// Sum over topics of theta_k * beta_{k, word} with a fixed accumulation
// order. Retrieval factors and annotation scores both route through this,
// so the two agree bitwise on shared inputs.
double query_word_probability(std::span<const double> theta, const ModelParams& params,
                              std::size_t word);

// Product over query words of query_word_probability, computed as a sum of
// logs. Word order never affects the result: indices are sorted internally.
double score_video(std::span<const std::size_t> query_indices, std::span<const double> theta,
                   const ModelParams& params);

struct RetrievalResult {
    RankedList ranked;
    std::vector<std::string> oov_tokens; // query tokens missing from the vocabulary
    std::size_t stopword_count = 0;
};

// Tokenizes and filters the query, scores every index entry, sorts
// descending (ties by ascending id), truncates to top_n and drops scores
// below the threshold when one is given.
RetrievalResult retrieve(const std::string& query, const RetrievalIndex& index,
                         const ModelParams& params, const Vocabulary& text_vocab,
                         const StopwordSet& stopwords, std::size_t top_n,
                         std::optional<double> threshold = std::nullopt);

} // namespace corrlda
