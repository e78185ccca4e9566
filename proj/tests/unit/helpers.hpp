#pragma once

#include <random>
#include <vector>

#include <Eigen/Dense>

#include "mmchain/panel.hpp"

namespace testutil {

/// Uniform i.i.d. states 0..m-1; the first m entries cycle through every
/// state so the column always passes Panel validation.
inline std::vector<int> iid_states(std::size_t n, int m, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> u(0, m - 1);
  std::vector<int> s(n);
  for (std::size_t t = 0; t < n; ++t) s[t] = t < static_cast<std::size_t>(m) ? static_cast<int>(t) : u(rng);
  return s;
}

inline int draw(const Eigen::VectorXd& p, std::mt19937_64& rng) {
  double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  for (Eigen::Index c = 0; c < p.size(); ++c) {
    if (u < p(c)) return static_cast<int>(c);
    u -= p(c);
  }
  return static_cast<int>(p.size() - 1);
}

/// Random row-stochastic matrix with entries bounded away from zero.
inline Eigen::MatrixXd random_stochastic(int rows, int cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.2, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int c = 0; c < cols; ++c) m(i, c) = u(rng);
    m.row(i) /= m.row(i).sum();
  }
  return m;
}

/// Central second differences of a scalar function.
template <class F>
Eigen::MatrixXd fd_hessian(F f, const Eigen::VectorXd& x, double h) {
  const Eigen::Index p = x.size();
  Eigen::MatrixXd out(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      Eigen::VectorXd a = x, b = x, c = x, d = x;
      a(i) += h; a(j) += h;
      b(i) += h; b(j) -= h;
      c(i) -= h; c(j) += h;
      d(i) -= h; d(j) -= h;
      out(i, j) = (f(a) - f(b) - f(c) + f(d)) / (4.0 * h * h);
    }
  }
  return out;
}

template <class F>
Eigen::VectorXd fd_gradient(F f, const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd a = x, b = x;
    a(i) += h;
    b(i) -= h;
    g(i) = (f(a) - f(b)) / (2.0 * h);
  }
  return g;
}

inline double max_rel_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

}  // namespace testutil
