#include "mmchain/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mmchain/error.hpp"

namespace mmchain {

std::vector<double> log_returns(std::span<const double> prices) {
  if (prices.size() < 2) throw DataError("log_returns: need at least 2 prices");
  for (double p : prices) {
    if (!(p > 0.0) || !std::isfinite(p)) {
      throw DataError("log_returns: prices must be positive and finite");
    }
  }
  std::vector<double> out(prices.size() - 1);
  for (std::size_t t = 1; t < prices.size(); ++t) {
    out[t - 1] = 100.0 * std::log(prices[t] / prices[t - 1]);
  }
  return out;
}

double quantile_type7(std::span<const double> values, double prob) {
  if (values.empty()) throw InvalidArgument("quantile: empty input");
  if (prob < 0.0 || prob > 1.0) throw InvalidArgument("quantile: prob outside [0,1]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = static_cast<double>(sorted.size() - 1) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<int> discretize_quantiles(std::span<const double> series,
                                      double lower_q, double upper_q) {
  if (series.size() < 4) {
    throw DataError("discretize: need at least 4 observations, got " +
                    std::to_string(series.size()));
  }
  if (!(lower_q < upper_q)) throw InvalidArgument("discretize: lower_q must be < upper_q");
  for (double v : series) {
    if (!std::isfinite(v)) throw DataError("discretize: non-finite value");
  }
  const double lo = quantile_type7(series, lower_q);
  const double hi = quantile_type7(series, upper_q);
  if (!(lo < hi)) {
    throw DataError("discretize: degenerate series, lower and upper quantiles coincide");
  }
  std::vector<int> states(series.size());
  std::transform(series.begin(), series.end(), states.begin(), [&](double r) {
    if (r <= lo) return 1;
    if (r >= hi) return 3;
    return 2;
  });
  return states;
}

std::vector<double> moving_average(std::span<const double> series,
                                   std::size_t window) {
  if (window < 1) throw InvalidArgument("moving_average: window must be >= 1");
  if (window > series.size()) {
    throw InvalidArgument("moving_average: window exceeds series length");
  }
  std::vector<double> out;
  out.reserve(series.size() - window + 1);
  for (std::size_t i = 0; i + window <= series.size(); ++i) {
    const double sum = std::accumulate(series.begin() + static_cast<std::ptrdiff_t>(i),
                                       series.begin() + static_cast<std::ptrdiff_t>(i + window), 0.0);
    out.push_back(sum / static_cast<double>(window));
  }
  return out;
}

}  // namespace mmchain
