#include "corrlda/rng.hpp"

#include <cmath>
#include <numbers>

#include "corrlda/errors.hpp"
#include "corrlda/numerics.hpp"

namespace corrlda {

std::size_t Rng::next_index(std::size_t n) {
    if (n == 0) throw NumericalError("Rng::next_index: n must be >= 1");
    auto idx = static_cast<std::size_t>(next_double() * static_cast<double>(n));
    return idx < n ? idx : n - 1;
}

double Rng::next_gaussian() {
    const double u1 = 1.0 - next_double(); // (0, 1], keeps log finite
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::next_gamma(double shape) {
    if (!(shape > 0.0)) throw NumericalError("Rng::next_gamma: shape must be positive");
    if (shape < 1.0) {
        const double u = 1.0 - next_double();
        return next_gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x;
        double v;
        do {
            x = next_gaussian();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = 1.0 - next_double();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

void Rng::next_dirichlet(double alpha, std::span<double> out) {
    for (double& v : out) v = next_gamma(alpha);
    normalize(out);
}

std::size_t Rng::next_discrete(std::span<const double> probs) {
    if (probs.empty()) throw NumericalError("Rng::next_discrete: empty probability vector");
    const double u = next_double();
    double cum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        cum += probs[i];
        if (u < cum) return i;
    }
    return probs.size() - 1;
}

} // namespace corrlda
