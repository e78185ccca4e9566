#include <algorithm>
#include <cmath>
#include <string>

#include "mmchain/error.hpp"
#include "mmchain/optim.hpp"

namespace mmchain::optim {
namespace {

Vector constraint_gradient(const Constraint& c, const Vector& x, double h) {
  return c.gradient ? c.gradient(x) : numeric_gradient(c.value, x, h);
}

struct Violation {
  double equality = 0.0;    // max |h|
  double inequality = 0.0;  // max(0, -g)
  double merit = 0.0;       // max(|h|, |min(g, nu / sigma)|)
};

Violation measure(const ConstraintSet& cs, const Vector& x, const Vector& nu, double sigma) {
  Violation v;
  for (const auto& c : cs.equalities) {
    v.equality = std::max(v.equality, std::abs(c.value(x)));
  }
  v.merit = v.equality;
  for (std::size_t i = 0; i < cs.inequalities.size(); ++i) {
    const double g = cs.inequalities[i].value(x);
    v.inequality = std::max(v.inequality, -g);
    v.merit = std::max(v.merit, std::abs(std::min(g, nu(static_cast<Eigen::Index>(i)) / sigma)));
  }
  return v;
}

}  // namespace

AugLagResult maximize_auglag(const Objective& f, const ConstraintSet& cs, Vector start,
                             const AugLagOptions& opt) {
  const auto n_eq = static_cast<Eigen::Index>(cs.equalities.size());
  const auto n_in = static_cast<Eigen::Index>(cs.inequalities.size());
  const double h = opt.inner.fd_step;

  for (const auto& c : cs.equalities) {
    if (std::abs(c.value(start)) > opt.start_feasibility_tolerance) {
      throw InvalidArgument("maximize_auglag: infeasible start (equality residual " +
                            std::to_string(c.value(start)) + ")");
    }
  }
  for (const auto& c : cs.inequalities) {
    if (c.value(start) < -opt.start_feasibility_tolerance) {
      throw InvalidArgument("maximize_auglag: infeasible start (inequality residual " +
                            std::to_string(c.value(start)) + ")");
    }
  }
  if (!std::isfinite(f.value(start))) {
    throw EstimationError("maximize_auglag: objective is not finite at the start");
  }

  Vector mu = Vector::Zero(n_eq);
  Vector nu = Vector::Zero(n_in);
  double sigma = opt.initial_penalty;
  Vector x = std::move(start);

  // Maximizing f - P(x), where P is the PHR penalty for minimization.
  auto penalty_value = [&](const Vector& at) {
    double p = 0.0;
    for (Eigen::Index i = 0; i < n_eq; ++i) {
      const double hv = cs.equalities[static_cast<std::size_t>(i)].value(at);
      p += -mu(i) * hv + 0.5 * sigma * hv * hv;
    }
    for (Eigen::Index i = 0; i < n_in; ++i) {
      const double g = cs.inequalities[static_cast<std::size_t>(i)].value(at);
      if (g <= nu(i) / sigma) {
        p += -nu(i) * g + 0.5 * sigma * g * g;
      } else {
        p += -0.5 * nu(i) * nu(i) / sigma;
      }
    }
    return p;
  };
  auto penalty_gradient = [&](const Vector& at) {
    Vector gp = Vector::Zero(at.size());
    for (Eigen::Index i = 0; i < n_eq; ++i) {
      const auto& c = cs.equalities[static_cast<std::size_t>(i)];
      gp += (-mu(i) + sigma * c.value(at)) * constraint_gradient(c, at, h);
    }
    for (Eigen::Index i = 0; i < n_in; ++i) {
      const auto& c = cs.inequalities[static_cast<std::size_t>(i)];
      const double g = c.value(at);
      if (g <= nu(i) / sigma) gp += (-nu(i) + sigma * g) * constraint_gradient(c, at, h);
    }
    return gp;
  };

  Objective merit;
  merit.value = [&](const Vector& at) {
    const double v = f.value(at);
    return std::isfinite(v) ? v - penalty_value(at) : v;
  };
  merit.gradient = [&](const Vector& at) {
    const Vector g = f.gradient ? f.gradient(at) : numeric_gradient(f.value, at, h);
    return Vector(g - penalty_gradient(at));
  };

  AugLagResult out;
  double previous = measure(cs, x, nu, sigma).merit;
  bool inner_ok = false;
  int outer = 0;
  std::string message = "outer iteration cap reached";
  Options inner = opt.inner;
  inner.compute_hessian = false;

  for (; outer < opt.max_outer_iterations; ++outer) {
    Result r = maximize_unconstrained(merit, x, opt.inner_method, inner);
    out.iterations += r.iterations;
    x = r.argmax;
    inner_ok = r.converged;

    // First-order multiplier updates.
    for (Eigen::Index i = 0; i < n_eq; ++i) {
      mu(i) -= sigma * cs.equalities[static_cast<std::size_t>(i)].value(x);
    }
    for (Eigen::Index i = 0; i < n_in; ++i) {
      nu(i) = std::max(0.0, nu(i) - sigma * cs.inequalities[static_cast<std::size_t>(i)].value(x));
    }

    const Violation v = measure(cs, x, nu, sigma);
    // Stationarity of the ordinary Lagrangian with the updated multipliers:
    // grad f + mu . grad h + nu . grad g = 0.
    const Vector fg = f.gradient ? f.gradient(x) : numeric_gradient(f.value, x, h);
    Vector kkt = fg;
    for (Eigen::Index i = 0; i < n_eq; ++i) {
      const auto& c = cs.equalities[static_cast<std::size_t>(i)];
      kkt += mu(i) * constraint_gradient(c, x, h);
    }
    for (Eigen::Index i = 0; i < n_in; ++i) {
      const auto& c = cs.inequalities[static_cast<std::size_t>(i)];
      kkt += nu(i) * constraint_gradient(c, x, h);
    }
    out.kkt_residual = kkt.size() ? kkt.cwiseAbs().maxCoeff() : 0.0;
    out.max_violation = std::max(v.equality, v.inequality);

    if (inner_ok && v.equality <= opt.constraint_tolerance &&
        v.inequality <= opt.inequality_tolerance && v.merit <= opt.constraint_tolerance &&
        out.kkt_residual <= opt.kkt_tolerance * std::max(1.0, fg.cwiseAbs().maxCoeff())) {
      message = "KKT conditions satisfied";
      ++outer;
      out.converged = true;
      break;
    }
    if (v.merit > opt.constraint_tolerance && v.merit > 0.25 * previous) sigma *= opt.penalty_growth;
    previous = v.merit;
    if (sigma > opt.max_penalty) {
      message = "penalty overflow: constraint violation is not shrinking";
      ++outer;
      break;
    }
  }

  out.argmax = x;
  out.value = f.value(x);
  out.outer_iterations = outer;
  out.equality_multipliers = mu;
  out.inequality_multipliers = nu;
  out.penalty = sigma;
  out.message = message;
  {
    const Vector g = f.gradient ? f.gradient(x) : numeric_gradient(f.value, x, h);
    out.gradient_norm = g.size() ? g.cwiseAbs().maxCoeff() : 0.0;
  }
  if (opt.compute_hessian) {
    out.hessian = f.gradient ? numeric_jacobian_hessian(f.gradient, x, h)
                             : numeric_hessian(f.value, x, h);
  }
  return out;
}

}  // namespace mmchain::optim
