#include "corrlda/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "corrlda/errors.hpp"

namespace corrlda {

double digamma(double x) {
    if (!(x > 0.0)) {
        throw NumericalError("digamma: argument must be positive, got " + std::to_string(x));
    }
    double acc = 0.0;
    while (x < 10.0) {
        acc -= 1.0 / x;
        x += 1.0;
    }
    // Asymptotic series: Psi(x) ~ ln x - 1/(2x) - sum_n B_{2n}/(2n x^{2n}).
    // Terms through x^{-12}; truncation error < 1e-13 for x >= 10.
    const double t = 1.0 / (x * x);
    const double series =
        t * (1.0 / 12.0 -
             t * (1.0 / 120.0 -
                  t * (1.0 / 252.0 -
                       t * (1.0 / 240.0 -
                            t * (1.0 / 132.0 - t * (691.0 / 32760.0))))));
    return acc + std::log(x) - 0.5 / x - series;
}

double log_add(double log_a, double log_b) {
    const double neg_inf = -std::numeric_limits<double>::infinity();
    if (log_a == neg_inf) return log_b;
    if (log_b == neg_inf) return log_a;
    if (log_a < log_b) std::swap(log_a, log_b);
    return log_a + std::log1p(std::exp(log_b - log_a));
}

double log_sum_exp(std::span<const double> values) {
    double acc = -std::numeric_limits<double>::infinity();
    for (double v : values) acc = log_add(acc, v);
    return acc;
}

double log_dirichlet_moment(double alpha, std::span<const std::size_t> counts,
                            std::size_t total) {
    const double k = static_cast<double>(counts.size());
    double value = std::lgamma(k * alpha) - std::lgamma(k * alpha + static_cast<double>(total));
    for (std::size_t c : counts) {
        if (c == 0) continue;
        value += std::lgamma(alpha + static_cast<double>(c)) - std::lgamma(alpha);
    }
    return value;
}

void normalize(std::span<double> values) {
    double sum = 0.0;
    for (double v : values) sum += v;
    if (!(sum > 0.0) || !std::isfinite(sum)) {
        throw NumericalError("normalize: vector sum is not a positive finite value");
    }
    for (double& v : values) v /= sum;
}

void softmax_inplace(std::span<double> log_values) {
    if (log_values.empty()) return;
    const double max = *std::max_element(log_values.begin(), log_values.end());
    if (!std::isfinite(max)) {
        throw NumericalError("softmax: no finite entry");
    }
    double sum = 0.0;
    for (double& v : log_values) {
        v = std::exp(v - max);
        sum += v;
    }
    for (double& v : log_values) v /= sum;
}

} // namespace corrlda
