#pragma once

#include <span>
#include <vector>

namespace mmchain {

/// r_t = 100 * ln(P_t / P_{t-1}); output has one element fewer than input.
std::vector<double> log_returns(std::span<const double> prices);

/// Sample quantile by linear interpolation of order statistics
/// (Hyndman-Fan type 7, the R default).
double quantile_type7(std::span<const double> values, double prob);

/// Three-state discretization around the lower/upper sample quantiles:
/// state 1 if r <= q_lower, state 3 if r >= q_upper, state 2 otherwise.
/// Returned labels are one-based (1, 2, 3).
std::vector<int> discretize_quantiles(std::span<const double> series,
                                      double lower_q = 0.25,
                                      double upper_q = 0.75);

/// Trailing moving average; element i averages inputs i..i+window-1, so the
/// output has length n - window + 1.
std::vector<double> moving_average(std::span<const double> series,
                                   std::size_t window = 5);

}  // namespace mmchain
