#include "mmchain/optim.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "mmchain/error.hpp"

namespace mmchain::optim {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Internally everything minimizes phi = -f.
struct Minimand {
  const Objective& f;
  double h;

  double value(const Vector& x) const {
    const double v = f.value(x);
    return std::isfinite(v) ? -v : kInf;
  }

  Vector gradient(const Vector& x) const {
    if (f.gradient) return -f.gradient(x);
    return -numeric_gradient(f.value, x, h);
  }
};

double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

// A step that moves neither f nor x beyond rounding means the iterate cannot
// be improved in floating point.
bool stalled(double f_old, double f_new, const Vector& step, const Vector& x) {
  const double eps = std::numeric_limits<double>::epsilon();
  return f_old - f_new <= 8.0 * eps * std::max(1.0, std::abs(f_old)) &&
         inf_norm(step) <= 1e-10 * std::max(1.0, inf_norm(x));
}

// Gradient test used once progress has stalled: relative to the scale of f.
bool stalled_gradient_ok(const Vector& g, double fx, const Options& opt) {
  return inf_norm(g) <= opt.gradient_tolerance * std::max(1.0, std::abs(fx));
}

struct LineSearch {
  double step = 0.0;
  double value = kInf;
  bool ok = false;
};

// Backtracking with the Armijo sufficient-decrease condition. Non-finite
// trial values shrink the step instead of failing.
LineSearch armijo(const Minimand& phi, const Vector& x, double fx, const Vector& g,
                  const Vector& d, const Options& opt) {
  const double slope = g.dot(d);
  double t = 1.0;
  for (int k = 0; k < 80; ++k) {
    const double ft = phi.value(x + t * d);
    if (std::isfinite(ft) && ft <= fx + opt.armijo_slope * t * slope) {
      return {t, ft, true};
    }
    t *= opt.backtrack_factor;
  }
  return {};
}

Result finish(const Objective& f, const Minimand& phi, Vector x, double fx, bool converged,
              int iterations, std::string message, const Options& opt) {
  Result r;
  r.value = -fx;
  r.converged = converged;
  r.iterations = iterations;
  r.message = std::move(message);
  r.gradient_norm = inf_norm(phi.gradient(x));
  if (opt.compute_hessian) {
    r.hessian = f.gradient ? numeric_jacobian_hessian(f.gradient, x, opt.fd_step)
                           : numeric_hessian(f.value, x, opt.fd_step);
  }
  r.argmax = std::move(x);
  return r;
}

Result run_bfgs(const Objective& f, Vector x, const Options& opt) {
  const Minimand phi{f, opt.fd_step};
  double fx = phi.value(x);
  Vector g = phi.gradient(x);
  const Eigen::Index p = x.size();
  Matrix hinv = Matrix::Identity(p, p);
  bool scaled = false;
  for (int it = 0; it < opt.max_iterations; ++it) {
    if (inf_norm(g) <= opt.gradient_tolerance) {
      return finish(f, phi, std::move(x), fx, true, it, "gradient tolerance reached", opt);
    }
    Vector d = -hinv * g;
    if (!(g.dot(d) < 0.0)) {
      hinv.setIdentity();
      d = -g;
    }
    LineSearch ls = armijo(phi, x, fx, g, d, opt);
    if (!ls.ok && !hinv.isIdentity()) {
      hinv.setIdentity();
      d = -g;
      ls = armijo(phi, x, fx, g, d, opt);
    }
    if (!ls.ok) {
      return finish(f, phi, std::move(x), fx, false, it, "line search failed", opt);
    }
    const Vector s = ls.step * d;
    if (stalled(fx, ls.value, s, x)) {
      const bool ok = stalled_gradient_ok(g, fx, opt);
      return finish(f, phi, std::move(x), fx, ok, it,
                    ok ? "no further progress at machine precision" : "line search stalled", opt);
    }
    x += s;
    const Vector g_new = phi.gradient(x);
    const Vector y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        hinv *= sy / y.squaredNorm();
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Vector hy = hinv * y;
      hinv += ((1.0 + rho * y.dot(hy)) * rho) * (s * s.transpose()) -
              rho * (hy * s.transpose() + s * hy.transpose());
    }
    fx = ls.value;
    g = g_new;
  }
  const bool ok = inf_norm(g) <= opt.gradient_tolerance;
  return finish(f, phi, std::move(x), fx, ok, opt.max_iterations,
                ok ? "gradient tolerance reached" : "iteration cap reached", opt);
}

Matrix minimand_hessian(const Objective& f, const Vector& x, double h) {
  return f.gradient ? Matrix(-numeric_jacobian_hessian(f.gradient, x, h))
                    : Matrix(-numeric_hessian(f.value, x, h));
}

Result run_newton(const Objective& f, Vector x, const Options& opt) {
  const Minimand phi{f, opt.fd_step};
  double fx = phi.value(x);
  Vector g = phi.gradient(x);
  const Eigen::Index p = x.size();
  for (int it = 0; it < opt.max_iterations; ++it) {
    if (inf_norm(g) <= opt.gradient_tolerance) {
      return finish(f, phi, std::move(x), fx, true, it, "gradient tolerance reached", opt);
    }
    const Matrix hess = minimand_hessian(f, x, opt.fd_step);
    // Shift the Hessian until it is positive definite (Levenberg damping).
    double shift = 0.0;
    Vector d;
    for (int k = 0; k < 60; ++k) {
      Eigen::LLT<Matrix> llt(hess + shift * Matrix::Identity(p, p));
      if (llt.info() == Eigen::Success) {
        d = llt.solve(-g);
        if (d.allFinite() && g.dot(d) < 0.0) break;
      }
      shift = shift == 0.0 ? std::max(1e-8, 1e-3 * hess.cwiseAbs().maxCoeff()) : shift * 10.0;
      d.resize(0);
    }
    if (d.size() == 0) d = -g;
    LineSearch ls = armijo(phi, x, fx, g, d, opt);
    if (!ls.ok) {
      d = -g;
      ls = armijo(phi, x, fx, g, d, opt);
    }
    if (!ls.ok) {
      return finish(f, phi, std::move(x), fx, false, it, "line search failed", opt);
    }
    if (stalled(fx, ls.value, ls.step * d, x)) {
      const bool ok = stalled_gradient_ok(g, fx, opt);
      return finish(f, phi, std::move(x), fx, ok, it,
                    ok ? "no further progress at machine precision" : "line search stalled", opt);
    }
    x += ls.step * d;
    fx = ls.value;
    g = phi.gradient(x);
  }
  const bool ok = inf_norm(g) <= opt.gradient_tolerance;
  return finish(f, phi, std::move(x), fx, ok, opt.max_iterations,
                ok ? "gradient tolerance reached" : "iteration cap reached", opt);
}

// Nelder-Mead with standard coefficients (reflection 1, expansion 2,
// contraction 0.5, shrink 0.5). Restarts from the best vertex until the
// gradient test passes or the restart budget is spent.
Result run_nelder_mead(const Objective& f, Vector x, const Options& opt) {
  const Minimand phi{f, opt.fd_step};
  const Eigen::Index p = x.size();
  const auto n = static_cast<std::size_t>(p);
  int total = 0;
  double fx = phi.value(x);
  for (int restart = 0; restart < 4; ++restart) {
    std::vector<Vector> pts(n + 1, x);
    std::vector<double> vals(n + 1, fx);
    const double scale = restart == 0 ? 0.1 : 1e-3;
    for (std::size_t i = 0; i < n; ++i) {
      const auto idx = static_cast<Eigen::Index>(i);
      pts[i + 1](idx) += scale * std::max(1.0, std::abs(x(idx)));
      vals[i + 1] = phi.value(pts[i + 1]);
    }
    std::vector<std::size_t> order(n + 1);
    for (int it = 0; it < opt.max_iterations; ++it, ++total) {
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
      const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];
      double spread = 0.0, diam = 0.0;
      for (std::size_t i = 0; i <= n; ++i) {
        spread = std::max(spread, std::abs(vals[i] - vals[best]));
        diam = std::max(diam, inf_norm(pts[i] - pts[best]));
      }
      if (std::isfinite(vals[best]) &&
          spread <= 1e-14 * (1.0 + std::abs(vals[best])) && diam <= 1e-10) {
        break;
      }
      Vector centroid = Vector::Zero(p);
      for (std::size_t i = 0; i <= n; ++i) {
        if (i != worst) centroid += pts[i];
      }
      centroid /= static_cast<double>(n);
      const Vector xr = centroid + (centroid - pts[worst]);
      const double fr = phi.value(xr);
      if (fr < vals[best]) {
        const Vector xe = centroid + 2.0 * (centroid - pts[worst]);
        const double fe = phi.value(xe);
        if (fe < fr) {
          pts[worst] = xe;
          vals[worst] = fe;
        } else {
          pts[worst] = xr;
          vals[worst] = fr;
        }
        continue;
      }
      if (fr < vals[second]) {
        pts[worst] = xr;
        vals[worst] = fr;
        continue;
      }
      const bool outside = fr < vals[worst];
      const Vector xc = outside ? Vector(centroid + 0.5 * (xr - centroid))
                                : Vector(centroid + 0.5 * (pts[worst] - centroid));
      const double fc = phi.value(xc);
      if (fc < (outside ? fr : vals[worst])) {
        pts[worst] = xc;
        vals[worst] = fc;
        continue;
      }
      for (std::size_t i = 0; i <= n; ++i) {
        if (i == best) continue;
        pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
        vals[i] = phi.value(pts[i]);
      }
    }
    const auto best = static_cast<std::size_t>(
        std::min_element(vals.begin(), vals.end()) - vals.begin());
    x = pts[best];
    fx = vals[best];
    if (!std::isfinite(fx)) break;
    if (inf_norm(phi.gradient(x)) <= opt.gradient_tolerance) {
      return finish(f, phi, std::move(x), fx, true, total, "simplex converged", opt);
    }
  }
  return finish(f, phi, std::move(x), fx, false, total,
                "simplex stalled above gradient tolerance", opt);
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

Method parse_method(std::string_view name) {
  const std::string s = lower(name);
  if (s == "nr" || s == "newton-raphson" || s == "newton") return Method::NewtonRaphson;
  if (s == "bfgs") return Method::Bfgs;
  if (s == "nm" || s == "nelder-mead") return Method::NelderMead;
  throw InvalidArgument("unknown optimization method '" + std::string(name) +
                        "' (expected nr, bfgs or nm)");
}

std::string_view method_name(Method method) {
  switch (method) {
    case Method::NewtonRaphson: return "newton-raphson";
    case Method::Bfgs: return "bfgs";
    case Method::NelderMead: return "nelder-mead";
  }
  return "unknown";
}

Result maximize_unconstrained(const Objective& f, Vector start, Method method,
                              const Options& options) {
  if (!std::isfinite(f.value(start))) {
    throw EstimationError("objective is not finite at the starting point");
  }
  switch (method) {
    case Method::NewtonRaphson: return run_newton(f, std::move(start), options);
    case Method::Bfgs: return run_bfgs(f, std::move(start), options);
    case Method::NelderMead: return run_nelder_mead(f, std::move(start), options);
  }
  throw InvalidArgument("unknown optimization method");
}

Result maximize_multistart(const Objective& f, std::span<const Vector> starts,
                           Method method, const Options& options) {
  if (starts.empty()) throw InvalidArgument("multistart: no starting points");
  std::optional<Result> best;
  for (const Vector& s : starts) {
    if (!std::isfinite(f.value(s))) continue;
    Result r = maximize_unconstrained(f, s, method, options);
    const bool better = !best || (r.converged && !best->converged) ||
                        (r.converged == best->converged && r.value > best->value);
    if (better) best = std::move(r);
  }
  if (!best) throw EstimationError("multistart: objective not finite at any start");
  return *std::move(best);
}

Vector numeric_gradient(const ScalarFn& f, const Vector& theta, double h) {
  Vector g(theta.size());
  Vector x = theta;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double xi = theta(i);
    x(i) = xi + h;
    const double up = x(i) - xi;
    const double fp = f(x);
    x(i) = xi - h;
    const double down = xi - x(i);
    const double fm = f(x);
    x(i) = xi;
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw EstimationError("numeric_gradient: non-finite value in the stencil");
    }
    g(i) = (fp - fm) / (up + down);
  }
  return g;
}

Matrix numeric_hessian(const ScalarFn& f, const Vector& theta, double h) {
  const Eigen::Index p = theta.size();
  Matrix hess(p, p);
  Vector x = theta;
  const double f0 = f(x);
  auto eval = [&](const Vector& at) {
    const double v = f(at);
    if (!std::isfinite(v)) throw EstimationError("numeric_hessian: non-finite value in the stencil");
    return v;
  };
  if (!std::isfinite(f0)) throw EstimationError("numeric_hessian: non-finite value in the stencil");
  for (Eigen::Index i = 0; i < p; ++i) {
    x(i) = theta(i) + h;
    const double fp = eval(x);
    x(i) = theta(i) - h;
    const double fm = eval(x);
    x(i) = theta(i);
    hess(i, i) = (fp - 2.0 * f0 + fm) / (h * h);
    for (Eigen::Index j = 0; j < i; ++j) {
      x(i) = theta(i) + h; x(j) = theta(j) + h;
      const double fpp = eval(x);
      x(j) = theta(j) - h;
      const double fpm = eval(x);
      x(i) = theta(i) - h;
      const double fmm = eval(x);
      x(j) = theta(j) + h;
      const double fmp = eval(x);
      x(i) = theta(i); x(j) = theta(j);
      hess(i, j) = hess(j, i) = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
    }
  }
  return 0.5 * (hess + hess.transpose());
}

Matrix numeric_jacobian_hessian(const GradientFn& grad, const Vector& theta, double h) {
  const Eigen::Index p = theta.size();
  Matrix jac(p, p);
  Vector x = theta;
  for (Eigen::Index i = 0; i < p; ++i) {
    x(i) = theta(i) + h;
    const Vector gp = grad(x);
    x(i) = theta(i) - h;
    const Vector gm = grad(x);
    x(i) = theta(i);
    if (!gp.allFinite() || !gm.allFinite()) {
      throw EstimationError("numeric Hessian: non-finite gradient in the stencil");
    }
    jac.col(i) = (gp - gm) / (2.0 * h);
  }
  return 0.5 * (jac + jac.transpose());
}

Vector project_simplex(const Vector& v) {
  if (!v.allFinite()) throw InvalidArgument("project_simplex: non-finite entry");
  const Eigen::Index p = v.size();
  if (p == 0) throw InvalidArgument("project_simplex: empty profile");
  // Sort-based algorithm (Held, Wolfe & Crowder; Duchi et al.).
  std::vector<double> u(v.data(), v.data() + p);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0, theta = 0.0;
  for (Eigen::Index k = 0; k < p; ++k) {
    cumsum += u[static_cast<std::size_t>(k)];
    const double t = (cumsum - 1.0) / static_cast<double>(k + 1);
    if (u[static_cast<std::size_t>(k)] - t > 0.0) theta = t;
  }
  Vector w = (v.array() - theta).max(0.0).matrix();
  const double total = w.sum();
  return w / total;
}

ConstraintSet simplex_constraints(Eigen::Index p) {
  ConstraintSet cs;
  cs.equalities.push_back({[](const Vector& x) { return x.sum() - 1.0; },
                           [p](const Vector&) { return Vector(Vector::Ones(p)); }});
  for (Eigen::Index k = 0; k < p; ++k) {
    cs.inequalities.push_back({[k](const Vector& x) { return x(k); },
                               [k, p](const Vector&) { return Vector(Vector::Unit(p, k)); }});
  }
  return cs;
}

}  // namespace mmchain::optim
