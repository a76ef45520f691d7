// Microbenchmarks for the hot paths: per-document inference, the M-step,
// scoring, and the numeric kernels they lean on.

#include <cstddef>
#include <cstdint>
#include <vector>

#include <benchmark/benchmark.h>

#include "corrlda/annotation.hpp"
#include "corrlda/corpus.hpp"
#include "corrlda/inference.hpp"
#include "corrlda/model.hpp"
#include "corrlda/numerics.hpp"
#include "corrlda/retrieval.hpp"
#include "corrlda/rng.hpp"
#include "corrlda/vocabulary.hpp"

namespace {

constexpr std::size_t kSensorySize = 50;
constexpr std::size_t kTextSize = 40;

corrlda::Vocabulary numbered_vocab(std::size_t n, const char* prefix) {
    std::vector<std::string> tokens;
    tokens.reserve(n);
    for (std::size_t i = 0; i < n; ++i) tokens.push_back(prefix + std::to_string(i));
    return corrlda::Vocabulary::from_tokens(std::move(tokens));
}

corrlda::TrainConfig config_for(std::size_t k) {
    corrlda::TrainConfig cfg;
    cfg.k = k;
    cfg.alpha = 0.2;
    return cfg;
}

corrlda::ModelParams params_for(std::size_t k) {
    return corrlda::init_params(k, kSensorySize, kTextSize, 0.2, 12345);
}

// One 80-word document with a 6-word caption, sampled from the model so the
// E-step sees realistic count structure.
corrlda::Document sample_doc(const corrlda::ModelParams& params) {
    return corrlda::sample_document(params, 80, 6, 42, "bench").first;
}

corrlda::Corpus sample_corpus(const corrlda::ModelParams& params, std::size_t docs) {
    corrlda::Rng rng(99);
    std::vector<corrlda::Document> out;
    out.reserve(docs);
    for (std::size_t d = 0; d < docs; ++d) {
        out.push_back(corrlda::sample_document(params, 80, 6, rng.next_raw(),
                                               "doc" + std::to_string(d))
                          .first);
    }
    return corrlda::Corpus(std::move(out), numbered_vocab(kSensorySize, "s"),
                           numbered_vocab(kTextSize, "t"));
}

std::vector<double> theta_for(const corrlda::ModelParams& params,
                              const corrlda::Document& doc, const corrlda::TrainConfig& cfg) {
    return corrlda::infer_theta(doc.sensory, params, cfg);
}

void BM_Digamma(benchmark::State& state) {
    double x = 0.1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(corrlda::digamma(x));
        x += 0.37;
        if (x > 200.0) x = 0.1;
    }
}
BENCHMARK(BM_Digamma);

void BM_LogSumExp(benchmark::State& state) {
    corrlda::Rng rng(7);
    std::vector<double> values(static_cast<std::size_t>(state.range(0)));
    for (double& v : values) v = rng.next_uniform(-50.0, 0.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(corrlda::log_sum_exp(values));
    }
}
BENCHMARK(BM_LogSumExp)->Arg(16)->Arg(128);

void BM_EStep(benchmark::State& state) {
    const std::size_t k = static_cast<std::size_t>(state.range(0));
    const corrlda::ModelParams params = params_for(k);
    const corrlda::TrainConfig cfg = config_for(k);
    const corrlda::Document doc = sample_doc(params);
    for (auto _ : state) {
        benchmark::DoNotOptimize(corrlda::e_step(doc, params, cfg));
    }
}
BENCHMARK(BM_EStep)->Arg(5)->Arg(50);

void BM_ComputeElbo(benchmark::State& state) {
    const std::size_t k = static_cast<std::size_t>(state.range(0));
    const corrlda::ModelParams params = params_for(k);
    const corrlda::TrainConfig cfg = config_for(k);
    const corrlda::Document doc = sample_doc(params);
    const corrlda::VariationalState st = corrlda::e_step(doc, params, cfg);
    for (auto _ : state) {
        benchmark::DoNotOptimize(corrlda::compute_elbo(doc, params, st));
    }
}
BENCHMARK(BM_ComputeElbo)->Arg(5)->Arg(50);

void BM_MStep(benchmark::State& state) {
    const std::size_t k = static_cast<std::size_t>(state.range(0));
    const corrlda::ModelParams params = params_for(k);
    const corrlda::TrainConfig cfg = config_for(k);
    const corrlda::Corpus corpus = sample_corpus(params, 100);
    std::vector<corrlda::VariationalState> states;
    states.reserve(corpus.size());
    for (const corrlda::Document& doc : corpus.documents()) {
        states.push_back(corrlda::e_step(doc, params, cfg));
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(corrlda::m_step(corpus, states, cfg));
    }
}
BENCHMARK(BM_MStep)->Arg(5)->Arg(50);

void BM_InferTheta(benchmark::State& state) {
    const std::size_t k = static_cast<std::size_t>(state.range(0));
    const corrlda::ModelParams params = params_for(k);
    const corrlda::TrainConfig cfg = config_for(k);
    const corrlda::Document doc = sample_doc(params);
    for (auto _ : state) {
        benchmark::DoNotOptimize(corrlda::infer_theta(doc.sensory, params, cfg));
    }
}
BENCHMARK(BM_InferTheta)->Arg(5)->Arg(50);

void BM_AnnotationScores(benchmark::State& state) {
    const std::size_t k = static_cast<std::size_t>(state.range(0));
    const corrlda::ModelParams params = params_for(k);
    const corrlda::TrainConfig cfg = config_for(k);
    const corrlda::Document doc = sample_doc(params);
    const std::vector<double> theta = theta_for(params, doc, cfg);
    for (auto _ : state) {
        benchmark::DoNotOptimize(corrlda::annotation_scores(theta, params));
    }
}
BENCHMARK(BM_AnnotationScores)->Arg(5)->Arg(50);

void BM_ScoreVideo(benchmark::State& state) {
    const std::size_t k = static_cast<std::size_t>(state.range(0));
    const corrlda::ModelParams params = params_for(k);
    const corrlda::TrainConfig cfg = config_for(k);
    const corrlda::Document doc = sample_doc(params);
    const std::vector<double> theta = theta_for(params, doc, cfg);
    const std::vector<std::size_t> query = {3, 11, 17, 24, 38};
    for (auto _ : state) {
        benchmark::DoNotOptimize(corrlda::score_video(query, theta, params));
    }
}
BENCHMARK(BM_ScoreVideo)->Arg(5)->Arg(50);

void BM_ExactLogLikelihood(benchmark::State& state) {
    const corrlda::ModelParams params = params_for(3);
    const corrlda::Document doc = corrlda::sample_document(params, 6, 3, 7, "tiny").first;
    for (auto _ : state) {
        benchmark::DoNotOptimize(corrlda::exact_log_likelihood(params, doc));
    }
}
BENCHMARK(BM_ExactLogLikelihood);

} // namespace

BENCHMARK_MAIN();
