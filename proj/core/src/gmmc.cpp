#include "mmchain/gmmc.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mmchain/error.hpp"
#include "mmchain/mixture.hpp"
#include "mmchain/transforms.hpp"

namespace mmchain {
namespace {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

std::vector<std::size_t> resolve_equations(std::vector<std::size_t> eqs, std::size_t s) {
  if (eqs.empty()) {
    for (std::size_t j = 0; j < s; ++j) eqs.push_back(j);
  }
  for (std::size_t j : eqs) {
    if (j >= s) throw InvalidArgument("equation " + std::to_string(j + 1) + " does not exist");
  }
  return eqs;
}

std::string pair_label(std::size_t j, std::size_t k) {
  return "(equation " + std::to_string(j + 1) + ", source chain " + std::to_string(k + 1) + ")";
}

}  // namespace

ProbStage build_prob_tensor(const Panel& panel, const CovariateMatrix& covariates, int x_lag,
                            const std::vector<std::size_t>& equations) {
  const std::size_t s = panel.num_chains();
  ProbStage stage;
  stage.equations = resolve_equations(equations, s);
  for (std::size_t j : stage.equations) {
    std::vector<MnLogitModel> row;
    Matrix q;
    for (std::size_t k = 0; k < s; ++k) {
      try {
        const Design d = build_design(panel, k, j, covariates, x_lag);
        MnLogitModel model = fit_mnlogit(d);
        const Matrix prob = predict_probs(model, d.x);
        if (q.size() == 0) q.resize(d.x.rows(), static_cast<Eigen::Index>(s));
        for (Eigen::Index r = 0; r < d.x.rows(); ++r) q(r, static_cast<Eigen::Index>(k)) = prob(r, d.y(r));
        row.push_back(std::move(model));
      } catch (const DataError& e) {
        throw DataError(std::string(e.what()) + " " + pair_label(j, k));
      } catch (const EstimationError& e) {
        throw EstimationError(std::string(e.what()) + " " + pair_label(j, k));
      }
    }
    stage.submodels.push_back(std::move(row));
    stage.q.push_back(std::move(q));
  }
  return stage;
}

double gmmc_loglik(const Vector& lambda, const Matrix& q) { return mixture::loglik(lambda, q); }

Matrix gmmc_hessian(const Vector& lambda, const Matrix& q) { return mixture::hessian(lambda, q); }

bool GmmcFit::converged() const {
  return std::all_of(equations.begin(), equations.end(),
                     [](const GmmcEquation& e) { return e.converged; });
}

const GmmcEquation& GmmcFit::equation(std::size_t j) const {
  for (const auto& e : equations) {
    if (e.index == j) return e;
  }
  throw InvalidArgument("equation " + std::to_string(j + 1) + " was not estimated");
}

GmmcFit estimate_gmmc(const Panel& panel, const CovariateMatrix& covariates,
                      const std::optional<Vector>& initial, const GmmcOptions& options) {
  if (panel.num_chains() < 2) throw InvalidArgument("estimate_gmmc: at least two chains are required");
  const ProbStage stage = build_prob_tensor(panel, covariates, options.x_lag, options.equations);
  return estimate_gmmc(stage, panel, covariates.names(), initial, options);
}

GmmcFit estimate_gmmc(const ProbStage& stage, const Panel& panel,
                      const std::vector<std::string>& covariate_names,
                      const std::optional<Vector>& initial, const GmmcOptions& options) {
  const std::size_t s = panel.num_chains();
  const auto ss = static_cast<Eigen::Index>(s);
  Vector start = Vector::Constant(ss, 1.0 / static_cast<double>(s));
  if (initial) {
    if (initial->size() != ss) {
      throw InvalidArgument("estimate_gmmc: initial needs " + std::to_string(s) + " values, got " +
                            std::to_string(initial->size()));
    }
    if (!initial->allFinite()) throw InvalidArgument("estimate_gmmc: initial values must be finite");
    start = optim::project_simplex(*initial);
  }

  GmmcFit fit;
  fit.x_lag = options.x_lag;
  fit.alphabet_sizes = panel.alphabet_sizes();
  fit.covariate_names = covariate_names;
  fit.variance = options.variance;
  const optim::ConstraintSet cs = optim::simplex_constraints(ss);

  for (std::size_t e = 0; e < stage.equations.size(); ++e) {
    const Matrix& q = stage.q[e];
    optim::Objective obj;
    obj.value = [&q](const Vector& l) { return mixture::loglik(l, q); };
    obj.gradient = [&q](const Vector& l) { return mixture::gradient(l, q); };
    optim::AugLagOptions ao = options.auglag;
    ao.compute_hessian = false;

    Vector x0 = start;
    if (!std::isfinite(mixture::loglik(x0, q))) {
      // A vertex start can hit a zero component; fall back to the barycenter.
      x0 = Vector::Constant(ss, 1.0 / static_cast<double>(s));
    }
    const optim::AugLagResult r = optim::maximize_auglag(obj, cs, x0, ao);

    GmmcEquation eq;
    eq.index = stage.equations[e];
    // The multiplier method meets the constraints only to its tolerance.
    eq.weights = optim::project_simplex(r.argmax);
    eq.submodels = stage.submodels[e];
    eq.loglik = gmmc_loglik(eq.weights, q);
    eq.hessian = gmmc_hessian(eq.weights, q);
    eq.converged = r.converged;
    eq.outer_iterations = r.outer_iterations;
    eq.max_violation = r.max_violation;

    std::vector<std::string> names;
    for (std::size_t k = 1; k <= s; ++k) names.push_back(std::to_string(k));
    EquationReport rep = make_equation_report(eq.index + 1, names, eq.weights, eq.hessian,
                                              eq.loglik, options.variance);
    if (!r.converged) rep.warnings.push_back("augmented Lagrangian did not converge: " + r.message);
    if (eq.weights.minCoeff() < 1e-6) {
      rep.warnings.push_back("estimate on the boundary of the simplex; Wald statistics are approximate");
    }
    if (mixture::is_flat(q)) {
      rep.warnings.push_back("flat likelihood: weights are not identified by the data");
    }
    for (std::size_t k = 0; k < s; ++k) {
      for (const auto& w : eq.submodels[k].warnings) {
        rep.warnings.push_back("logit " + pair_label(eq.index, k) + ": " + w);
      }
    }
    fit.report.equations.push_back(std::move(rep));
    fit.equations.push_back(std::move(eq));
  }
  return fit;
}

Vector conditional_distribution(const GmmcFit& fit, std::size_t equation,
                                const std::vector<int>& lagged_states, const Vector& x) {
  const GmmcEquation& eq = fit.equation(equation);
  if (lagged_states.size() != eq.submodels.size()) {
    throw InvalidArgument("conditional_distribution: one lagged state per chain is required");
  }
  const int m = fit.alphabet_sizes[equation];
  Vector out = Vector::Zero(m);
  for (std::size_t k = 0; k < eq.submodels.size(); ++k) {
    const MnLogitModel& model = eq.submodels[k];
    const Eigen::RowVectorXd row = model.spec.row(lagged_states[k], x);
    out += eq.weights(static_cast<Eigen::Index>(k)) * predict_probs(model, row).row(0).transpose();
  }
  return out;
}

Matrix conditional_transition_matrix(const GmmcFit& fit, std::size_t equation, const Vector& x) {
  const GmmcEquation& eq = fit.equation(equation);
  const int msrc = eq.submodels.front().spec.lag_states;
  for (const auto& model : eq.submodels) {
    if (model.spec.lag_states != msrc) {
      throw InvalidArgument(
          "conditional_transition_matrix: chains have different numbers of states; use "
          "conditional_distribution with explicit lagged states");
    }
  }
  Matrix t(msrc, fit.alphabet_sizes[equation]);
  for (int i = 0; i < msrc; ++i) {
    const std::vector<int> lagged(eq.submodels.size(), i);
    t.row(i) = conditional_distribution(fit, equation, lagged, x).transpose();
  }
  return t;
}

std::vector<Edge> transition_edges(const Matrix& transition) {
  std::vector<Edge> edges;
  for (Eigen::Index i = 0; i < transition.rows(); ++i) {
    for (Eigen::Index c = 0; c < transition.cols(); ++c) {
      edges.push_back({static_cast<int>(i) + 1, static_cast<int>(c) + 1, transition(i, c)});
    }
  }
  return edges;
}

Matrix smoothed_conditional_probs(const GmmcFit& fit, const Panel& panel,
                                  const CovariateMatrix& covariates, std::size_t equation,
                                  std::size_t source_chain, std::size_t window) {
  const GmmcEquation& eq = fit.equation(equation);
  if (source_chain >= eq.submodels.size()) throw InvalidArgument("source chain out of range");
  const Design d = build_design(panel, source_chain, equation, covariates, fit.x_lag);
  const Matrix prob = predict_probs(eq.submodels[source_chain], d.x);
  if (window < 1 || window > static_cast<std::size_t>(prob.rows())) {
    throw InvalidArgument("moving average window must be between 1 and the series length");
  }
  Matrix out(prob.rows() - static_cast<Eigen::Index>(window) + 1, prob.cols());
  for (Eigen::Index c = 0; c < prob.cols(); ++c) {
    const Vector col = prob.col(c);
    const std::vector<double> ma =
        moving_average(std::span<const double>(col.data(), static_cast<std::size_t>(col.size())), window);
    out.col(c) = Eigen::Map<const Vector>(ma.data(), static_cast<Eigen::Index>(ma.size()));
  }
  return out;
}

}  // namespace mmchain
