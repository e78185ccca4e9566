#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mmchain/inference.hpp"
#include "mmchain/optim.hpp"
#include "mmchain/panel.hpp"

namespace mmchain {

/// MTD-probit: for equation j
///   P_j(i0 | i_1..i_s) = Phi(eta_j0 + sum_k eta_jk P^(jk)(i0|i_k))
///                        / sum_c Phi(eta_j0 + sum_k eta_jk P^(jk)(c|i_k))
/// with plug-in transition matrices P^(jk) and unconstrained eta.
struct ProbitModel {
  /// etas[j] = (eta_j0, eta_j1, ..., eta_js).
  std::vector<Eigen::VectorXd> etas;
  std::vector<std::vector<TransitionMatrix>> transmats;
  Eigen::VectorXd loglik;
  std::vector<Eigen::MatrixXd> hessians;
  FitReport report;
  bool fix_intercept = false;
  std::vector<bool> converged;
};

struct ProbitOptions {
  optim::Method method = optim::Method::Bfgs;
  optim::Options optimizer{};
  /// Hold eta_j0 at zero instead of estimating it.
  bool fix_intercept = false;
  VarianceMethod variance = VarianceMethod::Observed;
};

/// Probability of target state i0 (zero-based) for equation j.
double probit_prob(const ProbitModel& model, std::size_t equation,
                   std::span<const int> lagged_states, int target);

/// Full distribution over the target states of equation j.
Eigen::VectorXd probit_distribution(const ProbitModel& model, std::size_t equation,
                                    std::span<const int> lagged_states);

/// Per-equation log-likelihood, accumulated over distinct
/// (i_1..i_s, i0) patterns weighted by their counts.
Eigen::VectorXd probit_loglik(const Panel& panel, const ProbitModel& model);

/// Estimates transition matrices (empirical, then fixed) and eta for every
/// equation. `initial` has s + 1 entries (eta_0 first) and is shared by all
/// equations; with fix_intercept its first entry is ignored.
ProbitModel estimate_mtd_probit(const Panel& panel, const Eigen::VectorXd& initial,
                                const ProbitOptions& options = {});

/// Same as estimate_mtd_probit with caller-supplied transition matrices.
ProbitModel estimate_mtd_probit_with(const Panel& panel,
                                     std::vector<std::vector<TransitionMatrix>> transmats,
                                     const Eigen::VectorXd& initial,
                                     const ProbitOptions& options = {});

}  // namespace mmchain
