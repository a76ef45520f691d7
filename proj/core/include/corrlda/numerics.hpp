#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace corrlda {

// Digamma function Psi(x) for x > 0, accurate to better than 1e-12.
// Upward recurrence to x >= 10, then the asymptotic series in 1/x^2.
double digamma(double x);

// log(exp(log_a) + exp(log_b)), safe against -inf inputs.
double log_add(double log_a, double log_b);

// log sum_i exp(values[i]); returns -inf for an empty span.
double log_sum_exp(std::span<const double> values);

// log E[prod_k theta_k^{counts_k}] for theta ~ Dirichlet(alpha * 1_K),
// where total = sum_k counts_k. Closed form as a ratio of log-gammas.
double log_dirichlet_moment(double alpha, std::span<const std::size_t> counts,
                            std::size_t total);

// Normalizes values in place to sum to 1. Throws NumericalError if the
// sum is zero or non-finite.
void normalize(std::span<double> values);

// exp-normalizes log-domain values in place (softmax with max-shift).
void softmax_inplace(std::span<double> log_values);

} // namespace corrlda
