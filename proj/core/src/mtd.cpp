#include "mmchain/mtd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "mmchain/error.hpp"
#include "mmchain/mixture.hpp"

namespace mmchain {
namespace {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Minimizes c^T x subject to A x = b, x >= 0 with the two-phase tableau
// simplex method and Bland's rule. Sized for the handful of variables of
// the min-max weight problem.
std::optional<Vector> simplex_lp(Matrix a, Vector b, const Vector& c) {
  const Eigen::Index m = a.rows(), n = a.cols();
  for (Eigen::Index i = 0; i < m; ++i) {
    if (b(i) < 0.0) {
      a.row(i) *= -1.0;
      b(i) *= -1.0;
    }
  }
  const Eigen::Index cols = n + m;  // structural + artificial
  Matrix t = Matrix::Zero(m + 1, cols + 1);
  t.topLeftCorner(m, n) = a;
  t.block(0, n, m, m).setIdentity();
  t.topRightCorner(m, 1) = b;
  std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) basis[static_cast<std::size_t>(i)] = n + i;

  constexpr double eps = 1e-11;
  auto pivot = [&](Eigen::Index r, Eigen::Index col) {
    t.row(r) /= t(r, col);
    for (Eigen::Index i = 0; i <= m; ++i) {
      if (i != r && t(i, col) != 0.0) t.row(i) -= t(i, col) * t.row(r);
    }
    basis[static_cast<std::size_t>(r)] = col;
  };
  auto run = [&](Eigen::Index allowed) -> bool {
    for (int iter = 0; iter < 10000; ++iter) {
      Eigen::Index enter = -1;
      for (Eigen::Index j = 0; j < allowed; ++j) {
        if (t(m, j) < -eps) { enter = j; break; }
      }
      if (enter < 0) return true;
      Eigen::Index leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < m; ++i) {
        if (t(i, enter) > eps) {
          const double ratio = t(i, cols) / t(i, enter);
          if (ratio < best - eps ||
              (std::abs(ratio - best) <= eps && leave >= 0 &&
               basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
            best = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0) return false;  // unbounded
      pivot(leave, enter);
    }
    return false;
  };

  // Phase 1: minimize the sum of artificials.
  for (Eigen::Index i = 0; i < m; ++i) t.row(m) -= t.row(i);
  t.block(m, n, 1, m).setZero();
  if (!run(cols) || -t(m, cols) > 1e-9) return std::nullopt;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (basis[static_cast<std::size_t>(i)] < n) continue;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (std::abs(t(i, j)) > eps) { pivot(i, j); break; }
    }
  }

  // Phase 2 on the structural columns.
  t.row(m).setZero();
  t.block(m, 0, 1, n) = c.transpose();
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index bi = basis[static_cast<std::size_t>(i)];
    if (bi < n && c(bi) != 0.0) t.row(m) -= c(bi) * t.row(i);
  }
  if (!run(n)) return std::nullopt;
  Vector x = Vector::Zero(n);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index bi = basis[static_cast<std::size_t>(i)];
    if (bi < n) x(bi) = t(i, cols);
  }
  return x;
}

void check_equation(const Panel& panel, std::size_t j) {
  if (j >= panel.num_chains()) throw InvalidArgument("equation index out of range");
}

}  // namespace

Vector mtd_predict(const MtdModel& model, std::size_t j, std::span<const int> lagged) {
  if (j >= model.weights.size()) throw InvalidArgument("mtd_predict: equation out of range");
  const auto s = model.weights[j].size();
  if (static_cast<Eigen::Index>(lagged.size()) != s) {
    throw InvalidArgument("mtd_predict: one lagged state per chain is required");
  }
  Vector out = Vector::Zero(model.transmats[j][0].probs.cols());
  for (Eigen::Index k = 0; k < s; ++k) {
    const auto& tm = model.transmats[j][static_cast<std::size_t>(k)].probs;
    const int state = lagged[static_cast<std::size_t>(k)];
    if (state < 0 || state >= tm.rows()) throw InvalidArgument("mtd_predict: invalid lagged state");
    out += model.weights[j](k) * tm.row(state).transpose();
  }
  return out;
}

Matrix mtd_component_probs(const Panel& panel,
                           const std::vector<std::vector<TransitionMatrix>>& transmats,
                           std::size_t j) {
  check_equation(panel, j);
  const std::size_t s = panel.num_chains();
  const auto n = static_cast<Eigen::Index>(panel.length());
  Matrix q(n - 1, static_cast<Eigen::Index>(s));
  for (Eigen::Index t = 1; t < n; ++t) {
    const int target = panel.at(j, static_cast<std::size_t>(t));
    for (std::size_t k = 0; k < s; ++k) {
      q(t - 1, static_cast<Eigen::Index>(k)) =
          transmats[j][k](panel.at(k, static_cast<std::size_t>(t - 1)), target);
    }
  }
  return q;
}

Vector mtd_loglik(const Panel& panel, const std::vector<Vector>& weights,
                  const std::vector<std::vector<TransitionMatrix>>& transmats) {
  const std::size_t s = panel.num_chains();
  if (weights.size() != s || transmats.size() != s) {
    throw InvalidArgument("mtd_loglik: one weight profile and transition row per equation");
  }
  Vector ll(static_cast<Eigen::Index>(s));
  for (std::size_t j = 0; j < s; ++j) {
    ll(static_cast<Eigen::Index>(j)) =
        mixture::loglik(weights[j], mtd_component_probs(panel, transmats, j));
  }
  return ll;
}

ReallocationResult reallocate_weights(const Matrix& q, Vector start, const MtdOptions& opt) {
  if (!(opt.delta_stop > 0.0)) throw InvalidArgument("delta_stop must be > 0");
  if (!(opt.delta > 0.0 && opt.delta <= 1.0)) throw InvalidArgument("delta must be in (0, 1]");
  const Eigen::Index s = q.cols();
  ReallocationResult res;
  res.weights = std::move(start);
  res.loglik = mixture::loglik(res.weights, q);
  res.trace.push_back(res.loglik);
  double delta = opt.delta;
  bool phase_open = false;
  while (delta >= opt.delta_stop && res.accepted_steps < opt.max_steps) {
    if (!phase_open) {
      ++res.phases;
      phase_open = true;
    }
    if (!std::isfinite(res.loglik)) break;
    const Vector grad = mixture::gradient(res.weights, q);
    Eigen::Index up = 0, down = -1;
    for (Eigen::Index k = 1; k < s; ++k) {
      if (grad(k) > grad(up)) up = k;
    }
    for (Eigen::Index k = 0; k < s; ++k) {
      if (opt.constrained && !(res.weights(k) > 0.0)) continue;
      if (k == up) continue;
      if (down < 0 || grad(k) < grad(down)) down = k;
    }
    bool accepted = false;
    if (down >= 0 && grad(up) > grad(down)) {
      const double amount = opt.constrained ? std::min(delta, res.weights(down)) : delta;
      Vector candidate = res.weights;
      candidate(up) += amount;
      candidate(down) -= amount;
      if (opt.constrained && amount == res.weights(down)) candidate(down) = 0.0;
      const double ll = mixture::loglik(candidate, q);
      if (std::isfinite(ll) && ll > res.loglik) {
        res.weights = std::move(candidate);
        res.loglik = ll;
        res.trace.push_back(ll);
        ++res.accepted_steps;
        accepted = true;
      }
    }
    if (!accepted) {
      delta *= 0.5;
      phase_open = false;
    }
  }
  return res;
}

MtdModel estimate_mtd(const Panel& panel, const MtdOptions& opt) {
  if (!(opt.delta_stop > 0.0)) throw InvalidArgument("delta_stop must be > 0");
  if (!(opt.delta > 0.0 && opt.delta <= 1.0)) throw InvalidArgument("delta must be in (0, 1]");
  const std::size_t s = panel.num_chains();
  const auto ss = static_cast<Eigen::Index>(s);
  MtdModel model;
  model.constrained = opt.constrained;
  model.transmats = transition_grid(panel);
  model.loglik.resize(ss);
  for (std::size_t j = 0; j < s; ++j) {
    const Matrix q = mtd_component_probs(panel, model.transmats, j);
    std::vector<Vector> starts{Vector::Constant(ss, 1.0 / static_cast<double>(s))};
    for (Eigen::Index k = 0; k < ss; ++k) starts.push_back(Vector::Unit(ss, k));
    std::optional<ReallocationResult> best;
    for (auto& st : starts) {
      if (!std::isfinite(mixture::loglik(st, q))) continue;
      ReallocationResult r = reallocate_weights(q, st, opt);
      if (!best || r.loglik > best->loglik) best = std::move(r);
    }
    if (!best) {
      throw EstimationError("mtd equation " + std::to_string(j + 1) +
                            ": log-likelihood is -infinity at every starting point");
    }
    model.weights.push_back(best->weights);
    model.loglik(static_cast<Eigen::Index>(j)) = best->loglik;
    model.hessians.push_back(mixture::hessian(best->weights, q));

    std::vector<std::string> names;
    for (std::size_t k = 0; k < s; ++k) names.push_back(std::to_string(k + 1));
    EquationReport rep = make_equation_report(j + 1, names, best->weights, model.hessians.back(),
                                              best->loglik, opt.variance);
    if (mixture::is_flat(q)) {
      rep.warnings.push_back("flat likelihood: weights are not identified by the data");
    }
    if (!opt.constrained && (best->weights.array() < 0.0).any()) {
      rep.warnings.push_back("negative weights: predictions may fall outside [0, 1]");
    }
    model.report.equations.push_back(std::move(rep));
  }
  return model;
}

std::vector<Matrix> mtd_hessian(const Panel& panel, const MtdModel& model) {
  std::vector<Matrix> out;
  for (std::size_t j = 0; j < panel.num_chains(); ++j) {
    out.push_back(mixture::hessian(model.weights[j], mtd_component_probs(panel, model.transmats, j)));
  }
  return out;
}

namespace {

// Columns v_k = P^(jk)^T xhat^(k): the chain-k distribution pushed through
// P^(jk) onto the states of chain j.
Matrix pushed_distributions(const Panel& panel,
                            const std::vector<std::vector<TransitionMatrix>>& transmats,
                            std::size_t j) {
  const std::size_t s = panel.num_chains();
  Matrix v(panel.states(j), static_cast<Eigen::Index>(s));
  for (std::size_t k = 0; k < s; ++k) {
    v.col(static_cast<Eigen::Index>(k)) =
        transmats[j][k].probs.transpose() * empirical_distribution(panel, k);
  }
  return v;
}

}  // namespace

double minmax_residual(const Panel& panel,
                       const std::vector<std::vector<TransitionMatrix>>& transmats,
                       std::size_t j, const Vector& lambda) {
  check_equation(panel, j);
  const Matrix v = pushed_distributions(panel, transmats, j);
  return (v * lambda - empirical_distribution(panel, j)).cwiseAbs().maxCoeff();
}

std::vector<Vector> estimate_lambda_minmax(const Panel& panel) {
  const auto grid = transition_grid(panel);
  const std::size_t s = panel.num_chains();
  const auto ss = static_cast<Eigen::Index>(s);
  std::vector<Vector> out;
  for (std::size_t j = 0; j < s; ++j) {
    if (s == 1) {
      out.push_back(Vector::Ones(1));
      continue;
    }
    const Matrix v = pushed_distributions(panel, grid, j);
    const Vector target = empirical_distribution(panel, j);
    const Eigen::Index m = v.rows();
    // Variables: lambda (s), tau, slacks (2m). Rows: 2m bounds + sum-to-one.
    const Eigen::Index nvar = ss + 1 + 2 * m;
    Matrix a = Matrix::Zero(2 * m + 1, nvar);
    Vector b(2 * m + 1);
    for (Eigen::Index i = 0; i < m; ++i) {
      a.block(i, 0, 1, ss) = v.row(i);
      a(i, ss) = -1.0;
      a(i, ss + 1 + i) = 1.0;
      b(i) = target(i);
      a.block(m + i, 0, 1, ss) = -v.row(i);
      a(m + i, ss) = -1.0;
      a(m + i, ss + 1 + m + i) = 1.0;
      b(m + i) = -target(i);
    }
    a.block(2 * m, 0, 1, ss).setOnes();
    b(2 * m) = 1.0;
    Vector c = Vector::Zero(nvar);
    c(ss) = 1.0;
    const auto x = simplex_lp(a, b, c);
    if (!x) throw EstimationError("min-max weight LP failed for equation " + std::to_string(j + 1));
    Vector lambda = x->head(ss).cwiseMax(0.0);
    out.push_back(lambda / lambda.sum());
  }
  return out;
}

}  // namespace mmchain
