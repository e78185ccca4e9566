#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mmchain/inference.hpp"
#include "mmchain/panel.hpp"

namespace mmchain {

/// Multimatrix MTD multivariate Markov chain:
///   P_j(i0 | i_1..i_s) = sum_k lambda_jk P^(jk)(i0 | i_k)
/// with P^(jk) the empirical transition matrices from chain k to chain j.
struct MtdModel {
  /// weights[j] is the mixture profile of equation j (length s).
  std::vector<Eigen::VectorXd> weights;
  /// transmats[j][k] = P^(jk).
  std::vector<std::vector<TransitionMatrix>> transmats;
  Eigen::VectorXd loglik;
  std::vector<Eigen::MatrixXd> hessians;
  FitReport report;
  bool constrained = true;
};

struct MtdOptions {
  /// Initial amount of weight moved per reallocation.
  double delta = 0.1;
  /// Estimation stops once delta has been halved below this value.
  double delta_stop = 1e-4;
  /// Keep lambda_jk >= 0; sum-to-one is always enforced.
  bool constrained = true;
  VarianceMethod variance = VarianceMethod::Observed;
  long max_steps = 1'000'000;
};

/// Distribution over the states of chain j given the lagged states of every
/// chain (zero-based).
Eigen::VectorXd mtd_predict(const MtdModel& model, std::size_t equation,
                            std::span<const int> lagged_states);

/// (n-1) x s matrix: Q(t-1, k) = P^(jk)(S_{j,t} | S_{k,t-1}).
Eigen::MatrixXd mtd_component_probs(const Panel& panel,
                                    const std::vector<std::vector<TransitionMatrix>>& transmats,
                                    std::size_t equation);

/// Per-equation log-likelihood; -infinity marks a realized transition with
/// zero mixture probability.
Eigen::VectorXd mtd_loglik(const Panel& panel, const std::vector<Eigen::VectorXd>& weights,
                           const std::vector<std::vector<TransitionMatrix>>& transmats);

struct ReallocationResult {
  Eigen::VectorXd weights;
  double loglik = 0.0;
  long accepted_steps = 0;
  int phases = 0;
  /// Log-likelihood after each accepted step (starting value first).
  std::vector<double> trace;
};

/// Iterative weight reallocation for one equation: move `delta` from the
/// coordinate with the smallest partial derivative to the one with the
/// largest, keep the move when LL improves, otherwise halve delta. Ties go
/// to the lowest index.
ReallocationResult reallocate_weights(const Eigen::MatrixXd& component_probs,
                                      Eigen::VectorXd start, const MtdOptions& options);

/// Full fit: empirical transition matrices, then per equation the best
/// reallocation run over the uniform start and every simplex vertex.
MtdModel estimate_mtd(const Panel& panel, const MtdOptions& options = {});

/// Per-equation s x s Hessian of the log-likelihood in the weights.
std::vector<Eigen::MatrixXd> mtd_hessian(const Panel& panel, const MtdModel& model);

/// max_i | (sum_k lambda_k P^(jk)^T xhat^(k))_i - xhat^(j)_i |.
double minmax_residual(const Panel& panel,
                       const std::vector<std::vector<TransitionMatrix>>& transmats,
                       std::size_t equation, const Eigen::VectorXd& lambda);

/// Min-max weight estimator, solved exactly as a linear program in
/// (lambda, bound). One profile per equation.
std::vector<Eigen::VectorXd> estimate_lambda_minmax(const Panel& panel);

}  // namespace mmchain
