#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "corrlda/corpus.hpp"

namespace corrlda {

// Immutable parameter set: symmetric Dirichlet prior alpha, per-topic
// sensory emission rows pi (K x |S|), per-topic text emission rows beta
// (K x |D|). Rows are stored row-major and must each sum to 1 within 1e-9
// with strictly positive entries.
class ModelParams {
public:
    ModelParams(std::size_t k, std::size_t sensory_size, std::size_t text_size, double alpha,
                std::vector<double> pi, std::vector<double> beta);

    std::size_t k() const { return k_; }
    std::size_t sensory_size() const { return sensory_size_; }
    std::size_t text_size() const { return text_size_; }
    double alpha() const { return alpha_; }

    std::span<const double> pi_row(std::size_t topic) const {
        return std::span<const double>(pi_).subspan(topic * sensory_size_, sensory_size_);
    }
    std::span<const double> beta_row(std::size_t topic) const {
        return std::span<const double>(beta_).subspan(topic * text_size_, text_size_);
    }
    const std::vector<double>& pi() const { return pi_; }
    const std::vector<double>& beta() const { return beta_; }

private:
    std::size_t k_;
    std::size_t sensory_size_;
    std::size_t text_size_;
    double alpha_;
    std::vector<double> pi_;
    std::vector<double> beta_;
};

// Latent variables recorded while sampling one document.
struct LatentTrace {
    std::vector<double> theta; // length K, sums to 1
    std::vector<std::size_t> topics; // z_m per sensory slot, length M
    std::vector<std::size_t> caption_sources; // y_n per caption slot, values < M
};

// Rows drawn by normalizing 1 + u entrywise, u uniform in [0, 0.1).
ModelParams init_params(std::size_t k, std::size_t sensory_size, std::size_t text_size,
                        double alpha, std::uint64_t seed);

// Generative process: theta ~ Dir(alpha), per sensory slot z ~ Mult(theta)
// and v ~ Mult(pi_z), per caption slot y ~ Uniform{1..m} and w ~ Mult(beta_{z_y}).
std::pair<Document, LatentTrace> sample_document(const ModelParams& params, std::size_t m,
                                                 std::size_t n, std::uint64_t seed,
                                                 const std::string& id = "sample");

// Brute-force marginal log p(sensory, caption) by enumerating topic
// assignments over sensory slots; caption sources are summed analytically.
// Guarded by K^M * M^N <= 1e7.
double exact_log_likelihood(const ModelParams& params, const Document& doc);

void save_model(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_model(const std::filesystem::path& path);

// CRC-32 of the serialized parameter payload; ties index files to the
// exact model that produced them.
std::uint32_t params_digest(const ModelParams& params);

} // namespace corrlda
