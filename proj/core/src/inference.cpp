#include "corrlda/inference.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "corrlda/errors.hpp"
#include "corrlda/numerics.hpp"
#include "corrlda/parallel.hpp"

namespace corrlda {

namespace {

// Log emission probabilities restricted to one document's words, so the
// inner loops touch K-length slices instead of full vocabulary rows.
struct DocEmissionLogs {
    std::vector<double> log_pi; // m_distinct x K: log pi[k][v_m]
    std::vector<double> log_beta; // n x K: log beta[k][w_n]

    DocEmissionLogs(const Document& doc, const ModelParams& params) {
        const std::size_t k = params.k();
        const std::size_t md = doc.sensory.entries.size();
        const std::size_t n = doc.caption.size();
        log_pi.resize(md * k);
        for (std::size_t m = 0; m < md; ++m) {
            const std::size_t word = doc.sensory.entries[m].word;
            for (std::size_t j = 0; j < k; ++j) {
                log_pi[m * k + j] = std::log(params.pi_row(j)[word]);
            }
        }
        log_beta.resize(n * k);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t word = doc.caption[i];
            for (std::size_t j = 0; j < k; ++j) {
                log_beta[i * k + j] = std::log(params.beta_row(j)[word]);
            }
        }
    }
};

VariationalState make_initial_state(const Document& doc, const ModelParams& params) {
    VariationalState state;
    state.k = params.k();
    state.m_distinct = doc.sensory.entries.size();
    state.n = doc.caption.size();
    const auto total = static_cast<double>(doc.sensory.total);

    state.phi.assign(state.m_distinct * state.k, 1.0 / static_cast<double>(state.k));
    state.lam.resize(state.n * state.m_distinct);
    for (std::size_t i = 0; i < state.n; ++i) {
        auto row = state.lam_row(i);
        for (std::size_t m = 0; m < state.m_distinct; ++m) {
            row[m] = static_cast<double>(doc.sensory.entries[m].count) / total;
        }
    }
    state.gamma.assign(state.k, params.alpha() + total / static_cast<double>(state.k));
    return state;
}

void check_dimensions(const Document& doc, const ModelParams& params) {
    doc.validate(params.sensory_size(), params.text_size());
}

void run_coordinate_ascent(const Document& doc, const ModelParams& params, const TrainConfig& cfg,
                           VariationalState& state) {
    const std::size_t k = state.k;
    const std::size_t md = state.m_distinct;
    const std::size_t n = state.n;
    const DocEmissionLogs logs(doc, params);

    std::vector<double> prev_gamma(k);
    std::vector<double> dig(k);
    for (std::size_t iter = 0; iter < cfg.e_step_max_iters; ++iter) {
        std::copy(state.gamma.begin(), state.gamma.end(), prev_gamma.begin());

        double gamma_sum = 0.0;
        for (double g : state.gamma) gamma_sum += g;
        const double dig_sum = digamma(gamma_sum);
        for (std::size_t j = 0; j < k; ++j) dig[j] = digamma(state.gamma[j]) - dig_sum;

        // phi: repeated positions of the same word share one row, so the
        // caption responsibility enters divided by the word count.
        for (std::size_t m = 0; m < md; ++m) {
            const double inv_count = 1.0 / static_cast<double>(doc.sensory.entries[m].count);
            auto row = state.phi_row(m);
            for (std::size_t j = 0; j < k; ++j) {
                double caption_term = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    caption_term += state.lam[i * md + m] * logs.log_beta[i * k + j];
                }
                row[j] = logs.log_pi[m * k + j] + dig[j] + inv_count * caption_term;
            }
            softmax_inplace(row);
        }

        // lam: per-position responsibility times the word count, normalized.
        for (std::size_t i = 0; i < n; ++i) {
            auto row = state.lam_row(i);
            for (std::size_t m = 0; m < md; ++m) {
                double s = 0.0;
                for (std::size_t j = 0; j < k; ++j) {
                    s += state.phi[m * k + j] * logs.log_beta[i * k + j];
                }
                row[m] = std::log(static_cast<double>(doc.sensory.entries[m].count)) + s;
            }
            softmax_inplace(row);
        }

        for (std::size_t j = 0; j < k; ++j) {
            double g = params.alpha();
            for (std::size_t m = 0; m < md; ++m) {
                g += static_cast<double>(doc.sensory.entries[m].count) * state.phi[m * k + j];
            }
            state.gamma[j] = g;
        }

        double delta = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            delta = std::max(delta, std::abs(state.gamma[j] - prev_gamma[j]));
        }
        if (delta < cfg.e_step_threshold) break;
    }
}

// eta times the log of every emission entry: the part of the Dirichlet(1+eta)
// log-prior on pi/beta rows that varies with the parameters. The smoothed
// M-step maximizes document ELBOs plus exactly this term.
double smoothing_log_prior(const ModelParams& params, double eta) {
    double s = 0.0;
    for (double v : params.pi()) s += std::log(v);
    for (double v : params.beta()) s += std::log(v);
    return eta * s;
}

} // namespace

void TrainConfig::validate() const {
    if (k == 0) throw ValidationError("number of topics must be at least 1");
    if (!(alpha > 0.0)) throw ValidationError("alpha must be positive");
    if (max_em_iters == 0) throw ValidationError("max_em_iters must be at least 1");
    if (!(em_threshold > 0.0)) throw ValidationError("em_threshold must be positive");
    if (e_step_max_iters == 0) throw ValidationError("e_step_max_iters must be at least 1");
    if (!(e_step_threshold > 0.0)) throw ValidationError("e_step_threshold must be positive");
    if (!(smoothing_eta > 0.0)) throw ValidationError("smoothing_eta must be positive");
}

VariationalState e_step(const Document& doc, const ModelParams& params, const TrainConfig& cfg) {
    check_dimensions(doc, params);
    VariationalState state = make_initial_state(doc, params);
    run_coordinate_ascent(doc, params, cfg, state);
    return state;
}

void e_step_inplace(const Document& doc, const ModelParams& params, const TrainConfig& cfg,
                    VariationalState& state) {
    check_dimensions(doc, params);
    if (state.k != params.k() || state.m_distinct != doc.sensory.entries.size() ||
        state.n != doc.caption.size()) {
        throw ValidationError("variational state dimensions do not match document and model");
    }
    run_coordinate_ascent(doc, params, cfg, state);
}

double compute_elbo(const Document& doc, const ModelParams& params,
                    const VariationalState& state) {
    check_dimensions(doc, params);
    if (state.k != params.k() || state.m_distinct != doc.sensory.entries.size() ||
        state.n != doc.caption.size()) {
        throw ValidationError("variational state dimensions do not match document and model");
    }
    const std::size_t k = state.k;
    const std::size_t md = state.m_distinct;
    const std::size_t n = state.n;
    const double alpha = params.alpha();
    const DocEmissionLogs logs(doc, params);

    double gamma_sum = 0.0;
    for (double g : state.gamma) gamma_sum += g;
    const double dig_sum = digamma(gamma_sum);
    std::vector<double> dig(k);
    for (std::size_t j = 0; j < k; ++j) dig[j] = digamma(state.gamma[j]) - dig_sum;

    // Underflowed responsibilities contribute nothing: 0 log 0 := 0.
    auto xlogx = [](double x) { return x > 0.0 ? x * std::log(x) : 0.0; };

    double elbo = std::lgamma(static_cast<double>(k) * alpha) -
                  static_cast<double>(k) * std::lgamma(alpha);
    for (std::size_t j = 0; j < k; ++j) elbo += (alpha - 1.0) * dig[j];

    for (std::size_t m = 0; m < md; ++m) {
        const auto count = static_cast<double>(doc.sensory.entries[m].count);
        for (std::size_t j = 0; j < k; ++j) {
            const double p = state.phi[m * k + j];
            elbo += count * p * (dig[j] + logs.log_pi[m * k + j]);
            elbo -= count * xlogx(p);
        }
    }

    if (n > 0) {
        elbo -= static_cast<double>(n) * std::log(static_cast<double>(doc.sensory.total));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t m = 0; m < md; ++m) {
                const double l = state.lam[i * md + m];
                if (l > 0.0) {
                    double s = 0.0;
                    for (std::size_t j = 0; j < k; ++j) {
                        s += state.phi[m * k + j] * logs.log_beta[i * k + j];
                    }
                    // q(y) entropy over positions: lam aggregates count
                    // identical positions, each holding lam/count.
                    elbo += l * s;
                    elbo -= l * (std::log(l) -
                                 std::log(static_cast<double>(doc.sensory.entries[m].count)));
                }
            }
        }
    }

    elbo -= std::lgamma(gamma_sum);
    for (std::size_t j = 0; j < k; ++j) {
        elbo += std::lgamma(state.gamma[j]) - (state.gamma[j] - 1.0) * dig[j];
    }
    return elbo;
}

ModelParams m_step(const Corpus& corpus, const std::vector<VariationalState>& states,
                   const TrainConfig& cfg) {
    if (corpus.size() == 0) throw ValidationError("cannot run an M-step on an empty corpus");
    if (states.size() != corpus.size()) {
        throw ValidationError("expected one variational state per document");
    }
    const std::size_t k = states.front().k;
    const std::size_t s_size = corpus.sensory_vocab().size();
    const std::size_t t_size = corpus.text_vocab().size();

    std::vector<double> pi(k * s_size, cfg.smoothing_eta);
    std::vector<double> beta(k * t_size, cfg.smoothing_eta);
    std::vector<double> resp(k);

    // Fixed accumulation order (documents, then words) keeps results
    // bit-identical no matter how the E-step was scheduled.
    for (std::size_t d = 0; d < corpus.size(); ++d) {
        const Document& doc = corpus.doc(d);
        const VariationalState& state = states[d];
        if (state.k != k || state.m_distinct != doc.sensory.entries.size() ||
            state.n != doc.caption.size()) {
            throw ValidationError("variational state for document '" + doc.id +
                                  "' does not match its dimensions");
        }
        const std::size_t md = state.m_distinct;
        for (std::size_t m = 0; m < md; ++m) {
            const BowEntry& e = doc.sensory.entries[m];
            const auto count = static_cast<double>(e.count);
            for (std::size_t j = 0; j < k; ++j) {
                pi[j * s_size + e.word] += count * state.phi[m * k + j];
            }
        }
        for (std::size_t i = 0; i < state.n; ++i) {
            const std::size_t word = doc.caption[i];
            std::fill(resp.begin(), resp.end(), 0.0);
            for (std::size_t m = 0; m < md; ++m) {
                const double l = state.lam[i * md + m];
                for (std::size_t j = 0; j < k; ++j) {
                    resp[j] += l * state.phi[m * k + j];
                }
            }
            for (std::size_t j = 0; j < k; ++j) {
                beta[j * t_size + word] += resp[j];
            }
        }
    }

    for (std::size_t j = 0; j < k; ++j) {
        normalize(std::span<double>(pi).subspan(j * s_size, s_size));
        normalize(std::span<double>(beta).subspan(j * t_size, t_size));
    }
    return ModelParams(k, s_size, t_size, cfg.alpha, std::move(pi), std::move(beta));
}

TrainResult train(const Corpus& corpus, const TrainConfig& cfg) {
    cfg.validate();
    if (corpus.size() == 0) throw ValidationError("cannot train on an empty corpus");
    const auto start = std::chrono::steady_clock::now();

    ModelParams params = init_params(cfg.k, corpus.sensory_vocab().size(),
                                     corpus.text_vocab().size(), cfg.alpha, cfg.seed);
    std::vector<VariationalState> states(corpus.size());
    std::vector<double> doc_elbos(corpus.size());
    TrainReport report;
    double prev_objective = 0.0;

    for (std::size_t iter = 1; iter <= cfg.max_em_iters; ++iter) {
        const bool first = (iter == 1);
        parallel_for(corpus.size(), [&](std::size_t lo, std::size_t hi) {
            for (std::size_t d = lo; d < hi; ++d) {
                if (first) {
                    states[d] = e_step(corpus.doc(d), params, cfg);
                } else {
                    e_step_inplace(corpus.doc(d), params, cfg, states[d]);
                }
                doc_elbos[d] = compute_elbo(corpus.doc(d), params, states[d]);
            }
        });

        double objective = smoothing_log_prior(params, cfg.smoothing_eta);
        for (std::size_t d = 0; d < corpus.size(); ++d) {
            if (!std::isfinite(doc_elbos[d])) {
                throw NumericalError("non-finite ELBO for document '" + corpus.doc(d).id +
                                     "' at EM iteration " + std::to_string(iter));
            }
            objective += doc_elbos[d];
        }
        if (!std::isfinite(objective)) {
            throw NumericalError("non-finite training objective at EM iteration " +
                                 std::to_string(iter));
        }
        report.elbo_per_iter.push_back(objective);
        report.iters_run = iter;

        if (iter >= 2) {
            const double change = cfg.absolute_em_threshold
                                      ? std::abs(objective - prev_objective)
                                      : std::abs(objective - prev_objective) /
                                            std::abs(prev_objective);
            if (change < cfg.em_threshold) {
                report.converged = true;
                break;
            }
        }
        prev_objective = objective;
        // No trailing M-step: the returned states stay consistent with the
        // returned params.
        if (iter < cfg.max_em_iters) {
            params = m_step(corpus, states, cfg);
        }
    }

    report.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {std::move(params), std::move(report), std::move(states)};
}

std::vector<double> infer_theta(const BowVector& sensory, const ModelParams& params,
                                const TrainConfig& cfg) {
    if (sensory.entries.empty() || sensory.total == 0) {
        throw ValidationError("cannot infer a topic mixture for an empty sensory vector");
    }
    Document doc;
    doc.id = "infer";
    doc.sensory = sensory;
    VariationalState state = e_step(doc, params, cfg);
    double sum = 0.0;
    for (double g : state.gamma) sum += g;
    std::vector<double> theta(state.gamma);
    for (double& t : theta) t /= sum;
    return theta;
}

} // namespace corrlda
