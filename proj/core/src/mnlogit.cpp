#include "mmchain/mnlogit.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <string>

#include "mmchain/error.hpp"

namespace mmchain {
namespace {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

Matrix unstack(const Vector& beta, int states, Eigen::Index p) {
  if (beta.size() != (states - 1) * p) throw InvalidArgument("mnlogit: coefficient length mismatch");
  Matrix b(states - 1, p);
  for (int c = 0; c < states - 1; ++c) b.row(c) = beta.segment(c * p, p).transpose();
  return b;
}

// Log-probabilities, rows x states, reference class in column 0.
Matrix log_probs(const Matrix& x, const Matrix& b) {
  const Eigen::Index n = x.rows();
  const Eigen::Index m = b.rows() + 1;
  Matrix eta(n, m);
  eta.col(0).setZero();
  eta.rightCols(m - 1) = x * b.transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mx = eta.row(i).maxCoeff();
    const double lse = mx + std::log((eta.row(i).array() - mx).exp().sum());
    eta.row(i).array() -= lse;
  }
  return eta;
}

}  // namespace

std::vector<std::string> DesignSpec::column_names() const {
  std::vector<std::string> names{"(Intercept)"};
  for (int c = 2; c <= lag_states; ++c) names.push_back("lag_state_" + std::to_string(c));
  for (int i = 0; i < covariates; ++i) {
    names.push_back(i < static_cast<int>(covariate_names.size()) ? covariate_names[static_cast<std::size_t>(i)]
                                                                 : "x" + std::to_string(i + 1));
  }
  return names;
}

Eigen::RowVectorXd DesignSpec::row(int lag_state, const Eigen::VectorXd& x) const {
  if (lag_state < 0 || lag_state >= lag_states) throw InvalidArgument("design row: lag state out of range");
  if (x.size() != covariates) {
    throw InvalidArgument("design row: expected " + std::to_string(covariates) +
                          " covariate values, got " + std::to_string(x.size()));
  }
  Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(columns());
  r(0) = 1.0;
  if (lag_state > 0) r(lag_state) = 1.0;
  r.tail(covariates) = x.transpose();
  return r;
}

std::size_t first_design_time(int x_lag) { return static_cast<std::size_t>(std::max(1, x_lag)); }

Design build_design(const Panel& panel, std::size_t from_chain, std::size_t to_chain,
                    const CovariateMatrix& covariates, int x_lag) {
  const std::size_t s = panel.num_chains();
  if (from_chain >= s || to_chain >= s) throw InvalidArgument("build_design: chain index out of range");
  if (x_lag < 0) throw InvalidArgument("build_design: x_lag must be non-negative");
  const std::size_t n = panel.length();
  if (!covariates.empty() && static_cast<std::size_t>(covariates.rows()) != n) {
    throw DataError("covariates have " + std::to_string(covariates.rows()) +
                    " rows but the panel has " + std::to_string(n) + " observations");
  }
  const std::size_t t0 = first_design_time(x_lag);
  if (t0 >= n) throw DataError("build_design: x_lag leaves no usable observations");

  Design d;
  d.spec.lag_states = panel.states(from_chain);
  d.spec.target_states = panel.states(to_chain);
  d.spec.covariates = static_cast<int>(covariates.cols());
  d.spec.x_lag = x_lag;
  d.spec.covariate_names = covariates.names();
  const auto rows = static_cast<Eigen::Index>(n - t0);
  d.x = Matrix::Zero(rows, d.spec.columns());
  d.y.resize(rows);
  const Eigen::Index off = d.spec.lag_states;
  for (std::size_t t = t0; t < n; ++t) {
    const auto r = static_cast<Eigen::Index>(t - t0);
    d.x(r, 0) = 1.0;
    const int lag = panel.at(from_chain, t - 1);
    if (lag > 0) d.x(r, lag) = 1.0;
    if (!covariates.empty()) {
      d.x.row(r).segment(off, d.spec.covariates) =
          covariates.values().row(static_cast<Eigen::Index>(t) - x_lag);
    }
    d.y(r) = panel.at(to_chain, t);
    d.times.push_back(t);
  }
  return d;
}

double mnlogit_loglik(const Matrix& x, const Eigen::VectorXi& y, int states, const Vector& beta) {
  const Matrix lp = log_probs(x, unstack(beta, states, x.cols()));
  double ll = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) ll += lp(i, y(i));
  return ll;
}

Vector mnlogit_score(const Matrix& x, const Eigen::VectorXi& y, int states, const Vector& beta) {
  const Eigen::Index p = x.cols();
  const Matrix prob = log_probs(x, unstack(beta, states, p)).array().exp();
  Vector g = Vector::Zero((states - 1) * p);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (int c = 1; c < states; ++c) {
      const double resid = (y(i) == c ? 1.0 : 0.0) - prob(i, c);
      g.segment((c - 1) * p, p) += resid * x.row(i).transpose();
    }
  }
  return g;
}

Matrix mnlogit_hessian(const Matrix& x, int states, const Vector& beta) {
  const Eigen::Index p = x.cols();
  const Matrix prob = log_probs(x, unstack(beta, states, p)).array().exp();
  const Eigen::Index q = (states - 1) * p;
  Matrix h = Matrix::Zero(q, q);
  for (int c = 1; c < states; ++c) {
    for (int e = c; e < states; ++e) {
      const Vector w = -(prob.col(c).array() * ((c == e ? 1.0 : 0.0) - prob.col(e).array())).matrix();
      Matrix block = x.transpose() * w.asDiagonal() * x;
      h.block((c - 1) * p, (e - 1) * p, p, p) = block;
      if (e != c) h.block((e - 1) * p, (c - 1) * p, p, p) = block.transpose();
    }
  }
  return h;
}

MnLogitModel fit_mnlogit(const Design& design, const MnLogitOptions& options) {
  const Matrix& x = design.x;
  const Eigen::VectorXi& y = design.y;
  const int m = design.spec.target_states;
  const Eigen::Index p = x.cols();
  if (m < 2) throw InvalidArgument("mnlogit: at least two response states are required");
  if (x.rows() < p + 1) {
    throw DataError("mnlogit: " + std::to_string(x.rows()) + " rows for " + std::to_string(p) +
                    " predictors");
  }
  std::vector<int> seen(static_cast<std::size_t>(m), 0);
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y(i) < 0 || y(i) >= m) throw InvalidArgument("mnlogit: response state out of range");
    ++seen[static_cast<std::size_t>(y(i))];
  }
  for (int c = 0; c < m; ++c) {
    if (seen[static_cast<std::size_t>(c)] == 0) {
      throw DataError("mnlogit: response state " + std::to_string(c + 1) +
                      " never occurs in the estimation sample");
    }
  }

  Eigen::ColPivHouseholderQR<Matrix> qr(x);
  qr.setThreshold(1e-10);
  if (qr.rank() < p) {
    const auto names = design.spec.column_names();
    std::string cols;
    for (Eigen::Index i = qr.rank(); i < p; ++i) {
      if (!cols.empty()) cols += ", ";
      cols += names[static_cast<std::size_t>(qr.colsPermutation().indices()(i))];
    }
    throw DataError("mnlogit: rank-deficient design; collinear column(s): " + cols);
  }

  MnLogitModel model;
  model.spec = design.spec;
  const Eigen::Index q = (m - 1) * p;
  Vector beta = Vector::Zero(q);
  // Intercepts at the empirical log-odds.
  for (int c = 1; c < m; ++c) {
    beta((c - 1) * p) = std::log(static_cast<double>(seen[static_cast<std::size_t>(c)]) / seen[0]);
  }
  double ll = mnlogit_loglik(x, y, m, beta);

  for (int it = 0; it < options.max_iterations; ++it) {
    model.iterations = it + 1;
    const Vector g = mnlogit_score(x, y, m, beta);
    if (g.cwiseAbs().maxCoeff() <= options.score_tolerance) {
      model.converged = true;
      break;
    }
    const Matrix info = -mnlogit_hessian(x, m, beta);
    Eigen::LDLT<Matrix> ldlt(info);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
        ldlt.vectorD().minCoeff() <= 1e-14 * std::max(1.0, ldlt.vectorD().maxCoeff())) {
      ldlt.compute(info + options.ridge * Matrix::Identity(q, q));
    }
    Vector step = ldlt.solve(g);
    if (!step.allFinite()) break;
    double t = 1.0;
    Vector next = beta + step;
    double next_ll = mnlogit_loglik(x, y, m, next);
    int halvings = 0;
    while (!(next_ll >= ll - 1e-12 * std::abs(ll)) && halvings < 40) {
      t *= 0.5;
      next = beta + t * step;
      next_ll = mnlogit_loglik(x, y, m, next);
      ++halvings;
    }
    if (!(next_ll >= ll - 1e-12 * std::abs(ll))) break;
    const double change = next_ll - ll;
    beta = next;
    ll = next_ll;
    if (std::abs(change) <= options.loglik_tolerance) {
      model.converged = true;
      break;
    }
  }

  model.loglik = ll;
  model.coefficients = unstack(beta, m, p);
  if (beta.cwiseAbs().maxCoeff() > options.separation_bound) {
    model.separated = true;
    model.warnings.push_back("possible separation: a coefficient exceeds " +
                             std::to_string(static_cast<int>(options.separation_bound)) +
                             " in absolute value");
  }
  if (!model.converged) model.warnings.push_back("Newton-Raphson did not converge");
  const Matrix info = -mnlogit_hessian(x, m, beta);
  Eigen::LDLT<Matrix> ldlt(info);
  if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
    model.covariance = ldlt.solve(Matrix::Identity(q, q));
  } else {
    model.covariance = Matrix::Constant(q, q, std::numeric_limits<double>::quiet_NaN());
  }
  return model;
}

Matrix predict_probs(const MnLogitModel& model, const Matrix& x) {
  if (x.cols() != model.coefficients.cols()) {
    throw InvalidArgument("predict_probs: design has " + std::to_string(x.cols()) +
                          " columns, model expects " + std::to_string(model.coefficients.cols()));
  }
  Matrix prob = log_probs(x, model.coefficients).array().exp();
  return prob.cwiseMax(DBL_MIN);
}

}  // namespace mmchain
