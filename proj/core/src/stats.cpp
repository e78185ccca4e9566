#include "mmchain/stats.hpp"

#include <cmath>
#include <numbers>

#include "mmchain/error.hpp"

namespace mmchain {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) * std::numbers::inv_sqrtpi / std::numbers::sqrt2;
}

double log_normal_cdf(double x) {
  if (x > -30.0) return std::log(0.5 * std::erfc(-x / std::numbers::sqrt2));
  // Asymptotic series of the Mills ratio.
  const double x2 = x * x;
  return -0.5 * x2 - std::log(-x) - 0.5 * std::log(2.0 * std::numbers::pi) +
         std::log1p(-1.0 / x2 + 3.0 / (x2 * x2));
}

double chi2_1_sf(double x) {
  if (!(x >= 0.0)) throw InvalidArgument("chi2_1_sf: argument must be >= 0");
  // 2 * (1 - Phi(sqrt(x))) == erfc(sqrt(x / 2)), without cancellation.
  return std::erfc(std::sqrt(0.5 * x));
}

double two_sided_normal_p(double z) { return std::erfc(std::abs(z) / std::numbers::sqrt2); }

}  // namespace mmchain
