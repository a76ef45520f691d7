#include "corrlda/annotation.hpp"

#include <algorithm>
#include <cmath>

#include "corrlda/errors.hpp"

namespace corrlda {

std::vector<double> annotation_scores(std::span<const double> theta, const ModelParams& params) {
    if (theta.size() != params.k()) {
        throw ValidationError("theta has length " + std::to_string(theta.size()) +
                              ", expected " + std::to_string(params.k()));
    }
    double sum = 0.0;
    for (double t : theta) {
        if (!(t >= 0.0) || !std::isfinite(t)) {
            throw ValidationError("theta entries must be finite and non-negative");
        }
        sum += t;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw ValidationError("theta sums to " + std::to_string(sum) + ", expected 1");
    }
    // Row-wise accumulation visits topics in the same order as the per-word
    // sum in query_word_probability, keeping the two bitwise identical.
    std::vector<double> scores(params.text_size(), 0.0);
    for (std::size_t j = 0; j < params.k(); ++j) {
        const double t = theta[j];
        const auto row = params.beta_row(j);
        for (std::size_t w = 0; w < scores.size(); ++w) {
            scores[w] += t * row[w];
        }
    }
    return scores;
}

Annotation annotate(const BowVector& sensory, const ModelParams& params, const TrainConfig& cfg,
                    std::size_t top_k, std::optional<double> threshold,
                    const std::string& doc_id) {
    if (top_k == 0) {
        throw ValidationError("top_k must be at least 1");
    }
    const std::vector<double> theta = infer_theta(sensory, params, cfg);
    const std::vector<double> scores = annotation_scores(theta, params);

    Annotation annotation;
    annotation.doc_id = doc_id;
    annotation.length_requested = top_k;
    annotation.words.reserve(scores.size());
    for (std::size_t w = 0; w < scores.size(); ++w) {
        annotation.words.push_back({w, scores[w]});
    }
    std::sort(annotation.words.begin(), annotation.words.end(),
              [](const ScoredWord& a, const ScoredWord& b) {
                  if (a.score != b.score) return a.score > b.score;
                  return a.word < b.word;
              });
    if (annotation.words.size() > top_k) {
        annotation.words.resize(top_k);
    }
    if (threshold) {
        std::erase_if(annotation.words,
                      [&](const ScoredWord& s) { return s.score < *threshold; });
    }
    return annotation;
}

} // namespace corrlda
