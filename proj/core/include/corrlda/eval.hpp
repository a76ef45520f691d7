#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "corrlda/corpus.hpp"
#include "corrlda/inference.hpp"
#include "corrlda/model.hpp"
#include "corrlda/retrieval.hpp"

namespace corrlda {

// query string -> relevant document ids
using RelevanceJudgments = std::map<std::string, std::set<std::string>>;

// JSON object mapping query -> array of doc ids; sets must be nonempty.
RelevanceJudgments load_judgments(const std::filesystem::path& path);

// Held-out caption perplexity: exp of the negative mean log probability of
// caption words under each document's inferred annotation distribution.
double perplexity(const std::vector<Document>& docs, const ModelParams& params,
                  const TrainConfig& cfg);

// For each length L: annotate every document with its top-L words, then
// evaluate perplexity over those generated captions. Per-document scores
// are computed once and shared across lengths.
std::map<std::size_t, double> perplexity_sweep(const Corpus& test, const ModelParams& params,
                                               const TrainConfig& cfg,
                                               const std::vector<std::size_t>& lengths);

// precision = hits/k, recall = hits/|relevant| over the top-k of results.
std::pair<double, double> precision_recall_at_k(const RankedList& results,
                                                const std::set<std::string>& relevant,
                                                std::size_t k);

// Truncated average precision: mean of precision@r over relevant hits at
// ranks r <= k, divided by min(|relevant|, k).
double average_precision_at_k(const RankedList& results, const std::set<std::string>& relevant,
                              std::size_t k);

// Mean average_precision_at_k over the queries in per_query_results; every
// query must appear in the judgments.
double map_at_k(const std::map<std::string, RankedList>& per_query_results,
                const RelevanceJudgments& judgments, std::size_t k);

struct PerWordMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f_score = 0.0;
    std::size_t words_evaluated = 0;
    std::size_t monte_carlo_words = 0; // words whose precision used the random fallback
};

// Per-word precision/recall averaged over every word appearing in some
// truth set. Words never produced by the annotator get a Monte-Carlo
// precision estimate from mc_samples random annotation assignments.
PerWordMetrics per_word_metrics(const std::map<std::string, std::set<std::size_t>>& annotations,
                                const std::map<std::string, std::set<std::size_t>>& truth,
                                std::size_t d_size, std::size_t mc_samples, std::uint64_t seed);

struct PrPoint {
    std::size_t rank = 0;
    double recall = 0.0;
    double precision = 0.0;
};

// One point per rank r = 1..|results|: (recall@r, precision@r).
std::vector<PrPoint> pr_curve(const RankedList& results, const std::set<std::string>& relevant);

} // namespace corrlda
