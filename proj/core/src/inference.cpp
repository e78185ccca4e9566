#include "mmchain/inference.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "mmchain/error.hpp"
#include "mmchain/stats.hpp"

namespace mmchain {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fixed(double v, int decimals) {
  if (!std::isfinite(v)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  // Avoid "-0.000".
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

// R prints numeric matrices with 7 significant digits.
std::string significant7(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "NA" : (v > 0 ? "Inf" : "-Inf");
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.7g", v);
  return buf;
}

std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace

VarianceMethod parse_variance_method(std::string_view name) {
  if (name == "observed") return VarianceMethod::Observed;
  if (name == "simplex-tangent" || name == "constrained") return VarianceMethod::SimplexTangent;
  throw InvalidArgument("unknown variance method '" + std::string(name) +
                        "' (expected observed or simplex-tangent)");
}

std::string_view variance_method_name(VarianceMethod method) {
  return method == VarianceMethod::Observed ? "observed" : "simplex-tangent";
}

bool ParameterRow::has_std_error() const { return std::isfinite(std_error) && std_error > 0.0; }

WaldResult wald_test(double estimate, double std_error, double null_value) {
  if (!(std_error > 0.0) || !std::isfinite(std_error)) {
    throw InvalidArgument("wald_test: standard error must be positive and finite");
  }
  const double d = estimate - null_value;
  WaldResult w;
  w.statistic = d * d / (std_error * std_error);
  w.p_value = chi2_1_sf(w.statistic);
  w.null_value = null_value;
  return w;
}

std::string significance_stars(double p) {
  if (!std::isfinite(p)) return "";
  if (p <= 0.001) return "***";
  if (p <= 0.05) return "**";
  if (p <= 0.1) return "*";
  return "";
}

std::optional<Eigen::MatrixXd> covariance_from_hessian(const Eigen::MatrixXd& hessian,
                                                       VarianceMethod method) {
  const Eigen::Index p = hessian.rows();
  if (p == 0 || hessian.cols() != p || !hessian.allFinite()) return std::nullopt;
  const Eigen::MatrixXd info = -0.5 * (hessian + hessian.transpose());
  if (method == VarianceMethod::Observed) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(info);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) return std::nullopt;
    return lu.inverse();
  }
  if (p == 1) return Eigen::MatrixXd::Zero(1, 1);
  // Orthonormal basis of the complement of the ones vector.
  Eigen::MatrixXd basis(p, p);
  basis.col(0).setConstant(1.0 / std::sqrt(static_cast<double>(p)));
  basis.rightCols(p - 1) = Eigen::MatrixXd::Identity(p, p).rightCols(p - 1);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis);
  const Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd z = q.rightCols(p - 1);
  const Eigen::MatrixXd reduced = z.transpose() * info * z;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(reduced);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return std::nullopt;
  if (ldlt.vectorD().minCoeff() <= 1e-12 * std::max(1.0, ldlt.vectorD().maxCoeff())) {
    return std::nullopt;
  }
  return z * ldlt.solve(Eigen::MatrixXd::Identity(p - 1, p - 1)) * z.transpose();
}

EquationReport make_equation_report(std::size_t equation, const std::vector<std::string>& names,
                                    const Eigen::VectorXd& estimates,
                                    const Eigen::MatrixXd& hessian, double loglik,
                                    VarianceMethod method) {
  EquationReport rep;
  rep.equation = equation;
  rep.loglik = loglik;
  const auto cov = covariance_from_hessian(hessian, method);
  if (!cov) rep.warnings.push_back("singular Hessian: standard errors unavailable");
  bool negative = false;
  for (Eigen::Index i = 0; i < estimates.size(); ++i) {
    ParameterRow row;
    row.name = i < static_cast<Eigen::Index>(names.size()) ? names[static_cast<std::size_t>(i)]
                                                           : std::to_string(i + 1);
    row.estimate = estimates(i);
    const double var = cov ? (*cov)(i, i) : kNaN;
    if (std::isfinite(var) && var > 0.0) {
      row.std_error = std::sqrt(var);
      row.z = row.estimate / row.std_error;
      row.p_value = two_sided_normal_p(row.z);
    } else {
      negative = negative || (cov.has_value());
      row.std_error = row.z = row.p_value = kNaN;
    }
    rep.rows.push_back(std::move(row));
  }
  if (negative) rep.warnings.push_back("non-positive variance for some parameters");
  return rep;
}

std::string format_report(const FitReport& report) {
  std::ostringstream out;
  for (const auto& eq : report.equations) {
    out << "$`Equation " << eq.equation << "`\n";
    const std::vector<std::string> headers = {"Estimate", "Std. Error", "t value", "Pr(>|t|)"};
    std::vector<std::vector<std::string>> cells;
    std::vector<std::string> stars;
    std::size_t name_width = 0;
    for (const auto& row : eq.rows) {
      cells.push_back({fixed(row.estimate, 6), fixed(row.std_error, 6), fixed(row.z, 3),
                       fixed(row.p_value, 3)});
      stars.push_back(significance_stars(row.p_value));
      name_width = std::max(name_width, row.name.size());
    }
    std::vector<std::size_t> width(headers.size());
    for (std::size_t c = 0; c < headers.size(); ++c) {
      width[c] = headers[c].size();
      for (const auto& r : cells) width[c] = std::max(width[c], r[c].size());
    }
    out << std::string(name_width, ' ');
    for (std::size_t c = 0; c < headers.size(); ++c) out << ' ' << pad_left(headers[c], width[c]);
    out << ' ' << std::string(3, ' ') << '\n';
    for (std::size_t r = 0; r < cells.size(); ++r) {
      out << pad_right(eq.rows[r].name, name_width);
      for (std::size_t c = 0; c < headers.size(); ++c) out << ' ' << pad_left(cells[r][c], width[c]);
      out << ' ' << pad_right(stars[r], 3) << '\n';
    }
    out << '\n';
    out << "$`LogLik " << eq.equation << "`\n";
    const std::string ll = significant7(eq.loglik);
    const std::size_t w = std::max<std::size_t>(4, ll.size());
    out << std::string(4, ' ') << ' ' << pad_left("[,1]", w) << '\n';
    out << "[1,]" << ' ' << pad_left(ll, w) << '\n';
    out << '\n';
  }
  return out.str();
}

}  // namespace mmchain
