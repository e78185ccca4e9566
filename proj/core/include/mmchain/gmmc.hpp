#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mmchain/inference.hpp"
#include "mmchain/mnlogit.hpp"
#include "mmchain/optim.hpp"
#include "mmchain/panel.hpp"

namespace mmchain {

/// Covariate mixture chain: for equation j
///   P(S_jt = i0 | S_{1,t-1}..S_{s,t-1}, x) = sum_k lambda_jk P(S_jt = i0 | S_{k,t-1}, x)
/// where each component is a multinomial logit fitted separately.

struct ProbStage {
  /// submodels[e][k]: logit of the e-th requested equation on chain k.
  std::vector<std::vector<MnLogitModel>> submodels;
  /// q[e](r, k): fitted probability of the realized state on design row r.
  std::vector<Eigen::MatrixXd> q;
  std::vector<std::size_t> equations;
};

/// Fits every (j, k) logit for the requested equations (all when empty).
/// Errors from a single fit are rethrown naming the (j, k) pair.
ProbStage build_prob_tensor(const Panel& panel, const CovariateMatrix& covariates, int x_lag = 1,
                            const std::vector<std::size_t>& equations = {});

/// LL_j = sum_t log(lambda . q_t); -infinity when a mixture probability is <= 0.
double gmmc_loglik(const Eigen::VectorXd& lambda, const Eigen::MatrixXd& q);

/// H = -sum_t q_t q_t^T / (lambda . q_t)^2.
Eigen::MatrixXd gmmc_hessian(const Eigen::VectorXd& lambda, const Eigen::MatrixXd& q);

struct GmmcOptions {
  int x_lag = 1;
  /// Zero-based equations to estimate; empty means all.
  std::vector<std::size_t> equations;
  VarianceMethod variance = VarianceMethod::Observed;
  optim::AugLagOptions auglag{};
};

struct GmmcEquation {
  std::size_t index = 0;  // zero-based equation j
  Eigen::VectorXd weights;
  std::vector<MnLogitModel> submodels;  // one per source chain k
  double loglik = 0.0;
  Eigen::MatrixXd hessian;
  bool converged = false;
  int outer_iterations = 0;
  double max_violation = 0.0;
};

struct GmmcFit {
  std::vector<GmmcEquation> equations;
  FitReport report;
  int x_lag = 1;
  std::vector<int> alphabet_sizes;
  std::vector<std::string> covariate_names;
  VarianceMethod variance = VarianceMethod::Observed;

  bool converged() const;
  /// Throws InvalidArgument when equation j was not estimated.
  const GmmcEquation& equation(std::size_t j) const;
};

/// Constrained MLE of every requested equation. `initial` (length s) is
/// projected onto the simplex; uniform when absent.
GmmcFit estimate_gmmc(const Panel& panel, const CovariateMatrix& covariates,
                      const std::optional<Eigen::VectorXd>& initial = std::nullopt,
                      const GmmcOptions& options = {});

/// Same, from a precomputed probability stage.
GmmcFit estimate_gmmc(const ProbStage& stage, const Panel& panel,
                      const std::vector<std::string>& covariate_names,
                      const std::optional<Eigen::VectorXd>& initial, const GmmcOptions& options);

/// Distribution of S_j given distinct lagged states (zero-based, one per
/// chain) and covariate values.
Eigen::VectorXd conditional_distribution(const GmmcFit& fit, std::size_t equation,
                                         const std::vector<int>& lagged_states,
                                         const Eigen::VectorXd& x);

/// T(i, i0) with every lagged chain held at state i. Requires all chains to
/// share one alphabet size.
Eigen::MatrixXd conditional_transition_matrix(const GmmcFit& fit, std::size_t equation,
                                              const Eigen::VectorXd& x);

struct Edge {
  int source = 1;  // one-based
  int dest = 1;    // one-based
  double probability = 0.0;
};

std::vector<Edge> transition_edges(const Eigen::MatrixXd& transition);

/// Fitted paths P(S_jt = c | S_{k,t-1}, x) for every target state c, each
/// smoothed by a trailing moving average. Rows are time, columns states.
Eigen::MatrixXd smoothed_conditional_probs(const GmmcFit& fit, const Panel& panel,
                                           const CovariateMatrix& covariates, std::size_t equation,
                                           std::size_t source_chain, std::size_t window = 5);

}  // namespace mmchain
