#include "mmchain/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mmchain::mixture {

double loglik(const Eigen::VectorXd& lambda, const Eigen::MatrixXd& q) {
  const Eigen::VectorXd mix = q * lambda;
  double ll = 0.0;
  for (Eigen::Index t = 0; t < mix.size(); ++t) {
    if (!(mix(t) > 0.0)) return -std::numeric_limits<double>::infinity();
    ll += std::log(mix(t));
  }
  return ll;
}

Eigen::VectorXd gradient(const Eigen::VectorXd& lambda, const Eigen::MatrixXd& q) {
  const Eigen::VectorXd inv = (q * lambda).cwiseInverse();
  return q.transpose() * inv;
}

Eigen::MatrixXd hessian(const Eigen::VectorXd& lambda, const Eigen::MatrixXd& q) {
  const Eigen::VectorXd w = (q * lambda).cwiseInverse().cwiseAbs2();
  Eigen::MatrixXd h = -(q.transpose() * w.asDiagonal() * q);
  return 0.5 * (h + h.transpose());
}

bool is_flat(const Eigen::MatrixXd& q, double tol) {
  const Eigen::Index s = q.cols();
  double lo = loglik(Eigen::VectorXd::Constant(s, 1.0 / static_cast<double>(s)), q);
  double hi = lo;
  for (Eigen::Index k = 0; k < s; ++k) {
    const double v = loglik(Eigen::VectorXd::Unit(s, k), q);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return std::isfinite(lo) && hi - lo < tol;
}

}  // namespace mmchain::mixture
