#pragma once

namespace mmchain {

/// Standard normal CDF via the complementary error function; accurate to
/// about 1e-15 absolute across the real line.
double normal_cdf(double x);
double normal_pdf(double x);

/// log Phi(x), finite far into the lower tail.
double log_normal_cdf(double x);

/// Upper tail of the chi-square(1) distribution, 2 * (1 - Phi(sqrt(x))).
double chi2_1_sf(double x);

/// Two-sided p-value of a standard normal statistic.
double two_sided_normal_p(double z);

}  // namespace mmchain
