#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace corrlda {

// Deterministic random source. All draws are built from the raw mt19937_64
// output stream, so a given seed yields the same sequence on every platform
// (standard-library distributions are implementation-defined and avoided).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // Raw 64-bit engine output; useful for deriving child seeds.
    std::uint64_t next_raw() { return gen_(); }

    // Uniform double in [0, 1) with 53-bit resolution.
    double next_double() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double next_uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    // Uniform index in {0, ..., n-1}; n must be >= 1.
    std::size_t next_index(std::size_t n);

    // Standard normal via Box-Muller.
    double next_gaussian();

    // Gamma(shape, 1) via Marsaglia-Tsang, with the shape<1 boost.
    double next_gamma(double shape);

    // Symmetric Dirichlet(alpha) sample written into out.
    void next_dirichlet(double alpha, std::span<double> out);

    // Index drawn from a (normalized) probability vector by inverse CDF.
    std::size_t next_discrete(std::span<const double> probs);

private:
    std::mt19937_64 gen_;
};

} // namespace corrlda
