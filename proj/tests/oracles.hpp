#pragma once

// Independent reference implementations used to validate the library. They
// deliberately avoid the library's code paths: linear-space probabilities,
// tgamma instead of lgamma, per-position states instead of count-collapsed
// ones, and long-double accumulation.

#include <span>
#include <vector>

#include "corrlda/corpus.hpp"
#include "corrlda/inference.hpp"
#include "corrlda/model.hpp"

namespace oracles {

// log p(sensory, caption) by enumerating every topic assignment z in K^M
// and every caption source assignment y in M^N in linear space.
double direct_log_likelihood(const corrlda::ModelParams& params, const corrlda::Document& doc);

// Exact posterior mean of theta for a caption-less document, by enumerating
// topic assignments.
std::vector<double> exact_posterior_theta(const corrlda::ModelParams& params,
                                          const corrlda::Document& doc);

// Mean-field E-step over per-position (uncollapsed) variables: phi has one
// row per sensory slot, lam one column per slot.
struct PerPositionState {
    std::vector<double> gamma; // K
    std::vector<double> phi; // M x K
    std::vector<double> lam; // N x M
    std::vector<std::size_t> slots; // sensory word of each position
};

PerPositionState per_position_e_step(const corrlda::Document& doc,
                                     const corrlda::ModelParams& params,
                                     const corrlda::TrainConfig& cfg);

double per_position_elbo(const corrlda::Document& doc, const corrlda::ModelParams& params,
                         const PerPositionState& state);

// Literal product-of-sums evaluation of the query score in long double.
double direct_query_score(std::span<const std::size_t> query, std::span<const double> theta,
                          const corrlda::ModelParams& params);

// Per-word sum over topics in long double.
std::vector<double> direct_annotation_scores(std::span<const double> theta,
                                             const corrlda::ModelParams& params);

// Caption perplexity recomputed from first principles (own log accumulation
// over direct_annotation_scores).
double direct_perplexity(const std::vector<corrlda::Document>& docs,
                         const corrlda::ModelParams& params, const corrlda::TrainConfig& cfg);

} // namespace oracles
