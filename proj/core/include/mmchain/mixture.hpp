#pragma once

#include <Eigen/Dense>

namespace mmchain::mixture {

// Helpers for log-likelihoods of the form
//   LL(lambda) = sum_t log( sum_k lambda_k * Q(t, k) )
// where row t of Q holds the component probabilities of the realized
// transition at time t. Both the MTD and the covariate model reduce to this.

/// Returns -infinity when some mixture probability is <= 0.
double loglik(const Eigen::VectorXd& lambda, const Eigen::MatrixXd& q);

/// dLL/dlambda_k = sum_t Q(t,k) / (Q lambda)_t.
Eigen::VectorXd gradient(const Eigen::VectorXd& lambda, const Eigen::MatrixXd& q);

/// H = -sum_t q_t q_t^T / (q_t . lambda)^2; symmetric negative semi-definite.
Eigen::MatrixXd hessian(const Eigen::VectorXd& lambda, const Eigen::MatrixXd& q);

/// True when LL varies by less than `tol` across the simplex vertices and
/// the barycenter (the weights are then not identified by the data).
bool is_flat(const Eigen::MatrixXd& q, double tol = 1e-6);

}  // namespace mmchain::mixture
