#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace mmchain::optim {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using ScalarFn = std::function<double(const Vector&)>;
using GradientFn = std::function<Vector(const Vector&)>;

/// A function to maximize. `gradient` is optional; central differences are
/// used when it is empty. `value` may return a non-finite number to signal
/// that a point is outside the function's domain.
struct Objective {
  ScalarFn value;
  GradientFn gradient;
};

enum class Method { NewtonRaphson, Bfgs, NelderMead };

/// Accepts "nr", "newton-raphson", "bfgs", "nm", "nelder-mead" (any case).
Method parse_method(std::string_view name);
std::string_view method_name(Method method);

struct Options {
  double gradient_tolerance = 1e-6;
  int max_iterations = 500;
  /// Finite-difference step for numeric gradients and Hessians.
  double fd_step = 1e-5;
  double armijo_slope = 1e-4;
  double backtrack_factor = 0.5;
  /// Attach the Hessian of the objective at the returned point.
  bool compute_hessian = false;
};

struct Result {
  Vector argmax;
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;
  std::optional<Matrix> hessian;
  std::string message;
};

Result maximize_unconstrained(const Objective& f, Vector start,
                              Method method = Method::Bfgs,
                              const Options& options = {});

/// Runs maximize_unconstrained from each start and keeps the best converged
/// result (or the best value when none converged).
Result maximize_multistart(const Objective& f, std::span<const Vector> starts,
                           Method method = Method::Bfgs,
                           const Options& options = {});

/// Central-difference gradient. Throws EstimationError when the stencil
/// hits a non-finite value.
Vector numeric_gradient(const ScalarFn& f, const Vector& theta, double h = 1e-5);

/// Central-difference Hessian, symmetrized as (H + H^T) / 2.
Matrix numeric_hessian(const ScalarFn& f, const Vector& theta, double h = 1e-5);

/// Central differences of an analytic gradient, symmetrized.
Matrix numeric_jacobian_hessian(const GradientFn& grad, const Vector& theta,
                                double h = 1e-5);

/// Euclidean projection onto {w : w >= 0, sum(w) = 1}.
Vector project_simplex(const Vector& v);

struct Constraint {
  ScalarFn value;
  /// Optional; central differences when empty.
  GradientFn gradient;
};

/// Equalities h(x) = 0 and inequalities g(x) >= 0.
struct ConstraintSet {
  std::vector<Constraint> equalities;
  std::vector<Constraint> inequalities;
};

/// sum(x) = 1 and x_k >= 0 for a length-p profile.
ConstraintSet simplex_constraints(Eigen::Index p);

struct AugLagOptions {
  Options inner{};
  Method inner_method = Method::Bfgs;
  int max_outer_iterations = 50;
  double constraint_tolerance = 1e-6;
  /// Largest tolerated inequality violation at a converged point.
  double inequality_tolerance = 1e-8;
  /// Stationarity test, relative to max(1, |grad f|_inf).
  double kkt_tolerance = 1e-6;
  double initial_penalty = 1.0;
  double penalty_growth = 10.0;
  double max_penalty = 1e12;
  /// Tolerance applied to the starting point's feasibility.
  double start_feasibility_tolerance = 1e-8;
  bool compute_hessian = true;
};

struct AugLagResult : Result {
  Vector equality_multipliers;
  Vector inequality_multipliers;
  double penalty = 0.0;
  int outer_iterations = 0;
  double max_violation = 0.0;
  double kkt_residual = 0.0;
};

/// Maximizes f subject to the constraint set with the
/// Powell-Hestenes-Rockafellar augmented Lagrangian. The inner problem is
/// solved with maximize_unconstrained; multipliers are updated after each
/// inner solve and the penalty grows when the violation fails to shrink by
/// a factor of 4. The Hessian returned is that of f alone.
AugLagResult maximize_auglag(const Objective& f, const ConstraintSet& constraints,
                             Vector start, const AugLagOptions& options = {});

}  // namespace mmchain::optim
