#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace mmchain {

/// How standard errors are derived from a log-likelihood Hessian H.
enum class VarianceMethod {
  /// Avar = -H^{-1}.
  Observed,
  /// Inverse information restricted to the tangent space of sum(w) = 1:
  /// Z (Z^T (-H) Z)^{-1} Z^T with Z an orthonormal basis of 1^perp.
  SimplexTangent,
};

VarianceMethod parse_variance_method(std::string_view name);
std::string_view variance_method_name(VarianceMethod method);

struct ParameterRow {
  std::string name;
  double estimate = 0.0;
  /// NaN when the Hessian does not yield a usable variance.
  double std_error = 0.0;
  double z = 0.0;
  double p_value = 0.0;

  bool has_std_error() const;
};

struct EquationReport {
  std::size_t equation = 1;  // one-based
  std::vector<ParameterRow> rows;
  double loglik = 0.0;
  std::vector<std::string> warnings;
};

struct FitReport {
  std::vector<EquationReport> equations;
};

struct WaldResult {
  double statistic = 0.0;
  int df = 1;
  double p_value = 1.0;
  double null_value = 0.0;
};

/// (estimate - null)^2 / se^2 referred to chi-square(1).
WaldResult wald_test(double estimate, double std_error, double null_value);

/// "***" for p <= 0.001, "**" for p <= 0.05, "*" for p <= 0.1, else "".
std::string significance_stars(double p_value);

/// Covariance of the estimates from a log-likelihood Hessian; nullopt when
/// the relevant information matrix is singular or not positive definite.
std::optional<Eigen::MatrixXd> covariance_from_hessian(const Eigen::MatrixXd& hessian,
                                                       VarianceMethod method);

/// Fills estimate / se / z / p rows. Parameters with a non-positive variance
/// get NaN standard errors and a warning.
EquationReport make_equation_report(std::size_t equation,
                                    const std::vector<std::string>& names,
                                    const Eigen::VectorXd& estimates,
                                    const Eigen::MatrixXd& hessian, double loglik,
                                    VarianceMethod method);

/// R-style listing: per equation a "$`Equation j`" block with columns
/// Estimate / Std. Error / t value / Pr(>|t|) and stars, then "$`LogLik j`".
std::string format_report(const FitReport& report);

}  // namespace mmchain
