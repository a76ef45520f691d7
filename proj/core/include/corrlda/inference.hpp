#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "corrlda/corpus.hpp"
#include "corrlda/model.hpp"

namespace corrlda {

// Per-document variational posterior. phi has one row per distinct sensory
// word (count-weighted); lam row n holds caption word n's responsibility
// over distinct sensory words, already aggregated over repeated positions,
// so each row sums to 1.
struct VariationalState {
    std::vector<double> gamma; // length K
    std::vector<double> phi; // m_distinct x K, row-major
    std::vector<double> lam; // n x m_distinct, row-major
    std::size_t k = 0;
    std::size_t m_distinct = 0;
    std::size_t n = 0;

    std::span<double> phi_row(std::size_t m) {
        return std::span<double>(phi).subspan(m * k, k);
    }
    std::span<const double> phi_row(std::size_t m) const {
        return std::span<const double>(phi).subspan(m * k, k);
    }
    std::span<double> lam_row(std::size_t i) {
        return std::span<double>(lam).subspan(i * m_distinct, m_distinct);
    }
    std::span<const double> lam_row(std::size_t i) const {
        return std::span<const double>(lam).subspan(i * m_distinct, m_distinct);
    }
};

struct TrainConfig {
    std::size_t k = 100;
    double alpha = 0.2;
    std::size_t max_em_iters = 1000;
    double em_threshold = 1e-7; // relative ELBO change unless absolute_em_threshold
    std::size_t e_step_max_iters = 100;
    double e_step_threshold = 1e-6; // max absolute gamma change
    double smoothing_eta = 1e-3;
    std::uint64_t seed = 42;
    bool absolute_em_threshold = false;

    void validate() const;
};

struct TrainReport {
    std::vector<double> elbo_per_iter; // training objective after each E-step
    std::size_t iters_run = 0;
    bool converged = false;
    double wall_time_s = 0.0;
};

struct TrainResult {
    ModelParams params;
    TrainReport report;
    std::vector<VariationalState> states; // consistent with params, one per document
};

// Coordinate ascent (phi, lam, gamma in that order) from a fresh symmetric
// start, until the gamma vector moves less than cfg.e_step_threshold.
VariationalState e_step(const Document& doc, const ModelParams& params, const TrainConfig& cfg);

// Same loop resumed from an existing state (warm start across EM iterations).
void e_step_inplace(const Document& doc, const ModelParams& params, const TrainConfig& cfg,
                    VariationalState& state);

// Evidence lower bound for the document under the given state; pure, no
// smoothing terms.
double compute_elbo(const Document& doc, const ModelParams& params, const VariationalState& state);

// Re-estimates pi and beta from count-weighted responsibilities with
// additive smoothing cfg.smoothing_eta per cell; alpha is carried over.
ModelParams m_step(const Corpus& corpus, const std::vector<VariationalState>& states,
                   const TrainConfig& cfg);

// Full EM loop. elbo_per_iter records the smoothed training objective
// (sum of document ELBOs plus the eta log-prior on pi and beta), which is
// non-decreasing by construction since E-steps warm-start from the previous
// states and the smoothed M-step maximizes exactly that objective.
TrainResult train(const Corpus& corpus, const TrainConfig& cfg);

// Posterior topic mixture gamma / sum(gamma) for a caption-less document
// with frozen params.
std::vector<double> infer_theta(const BowVector& sensory, const ModelParams& params,
                                const TrainConfig& cfg);

} // namespace corrlda
