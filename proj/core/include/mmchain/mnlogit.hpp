#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mmchain/panel.hpp"

namespace mmchain {

/// Predictor layout: intercept, indicators for lag states 2..m_k, then the
/// covariates. Reference category of the response is state 1.
struct DesignSpec {
  int lag_states = 2;     // m_k
  int target_states = 2;  // m_j
  int covariates = 0;     // d
  int x_lag = 1;
  std::vector<std::string> covariate_names;

  Eigen::Index columns() const { return 1 + (lag_states - 1) + covariates; }
  std::vector<std::string> column_names() const;
  /// One design row for a zero-based lag state and covariate vector.
  Eigen::RowVectorXd row(int lag_state, const Eigen::VectorXd& x) const;
};

struct Design {
  Eigen::MatrixXd x;
  /// Zero-based response states.
  Eigen::VectorXi y;
  DesignSpec spec;
  /// Zero-based time index of the response on each row.
  std::vector<std::size_t> times;
};

/// Index of the first usable response time: max(1, x_lag).
std::size_t first_design_time(int x_lag);

/// Rows for t = max(1, x_lag) .. n-1 (zero-based): response S_{j,t},
/// lag state S_{k,t-1}, covariate row t - x_lag. `covariates` may be empty.
Design build_design(const Panel& panel, std::size_t from_chain, std::size_t to_chain,
                    const CovariateMatrix& covariates, int x_lag = 1);

struct MnLogitOptions {
  int max_iterations = 100;
  double score_tolerance = 1e-8;
  double loglik_tolerance = 1e-10;
  double separation_bound = 30.0;
  double ridge = 1e-8;
};

struct MnLogitModel {
  /// (m_j - 1) x p; row c holds the coefficients of state c + 2.
  Eigen::MatrixXd coefficients;
  DesignSpec spec;
  /// Covariance of the stacked coefficients (row-major by class).
  Eigen::MatrixXd covariance;
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;
  bool separated = false;
  std::vector<std::string> warnings;
};

/// Multinomial log-likelihood at stacked coefficients beta
/// (length (m-1) * p, class-major).
double mnlogit_loglik(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, int states,
                      const Eigen::VectorXd& beta);

/// Analytic score of mnlogit_loglik.
Eigen::VectorXd mnlogit_score(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, int states,
                              const Eigen::VectorXd& beta);

/// Analytic Hessian of mnlogit_loglik.
Eigen::MatrixXd mnlogit_hessian(const Eigen::MatrixXd& x, int states,
                                const Eigen::VectorXd& beta);

/// Newton-Raphson fit. Throws DataError for a rank-deficient design (naming
/// the collinear columns) or an unobserved response state.
MnLogitModel fit_mnlogit(const Design& design, const MnLogitOptions& options = {});

/// rows x m_j matrix of fitted probabilities.
Eigen::MatrixXd predict_probs(const MnLogitModel& model, const Eigen::MatrixXd& x);

}  // namespace mmchain
