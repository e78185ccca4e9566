#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "mmchain/error.hpp"
#include "mmchain/optim.hpp"

using namespace mmchain;
using namespace mmchain::optim;

namespace {

// Negated Rosenbrock: maximum 0 at (1, 1).
Objective rosenbrock() {
  Objective f;
  f.value = [](const Vector& x) {
    return -(100.0 * std::pow(x(1) - x(0) * x(0), 2) + std::pow(1.0 - x(0), 2));
  };
  f.gradient = [](const Vector& x) {
    Vector g(2);
    g(0) = 400.0 * x(0) * (x(1) - x(0) * x(0)) + 2.0 * (1.0 - x(0));
    g(1) = -200.0 * (x(1) - x(0) * x(0));
    return g;
  };
  return f;
}

Objective concave_quadratic() {
  Objective f;
  f.value = [](const Vector& x) { return -(x(0) - 1.0) * (x(0) - 1.0) - 2.0 * (x(1) + 0.5) * (x(1) + 0.5); };
  return f;
}

}  // namespace

TEST(Unconstrained, BfgsSolvesRosenbrock) {
  const Result r = maximize_unconstrained(rosenbrock(), Vector::Constant(2, -1.2), Method::Bfgs);
  EXPECT_TRUE(r.converged) << r.message;
  EXPECT_NEAR(r.argmax(0), 1.0, 1e-5);
  EXPECT_NEAR(r.argmax(1), 1.0, 1e-5);
}

TEST(Unconstrained, NewtonSolvesRosenbrock) {
  const Result r = maximize_unconstrained(rosenbrock(), Vector::Constant(2, -1.2), Method::NewtonRaphson);
  EXPECT_TRUE(r.converged) << r.message;
  EXPECT_NEAR(r.argmax(0), 1.0, 1e-5);
}

TEST(Unconstrained, NelderMeadFindsQuadraticMaximum) {
  const Result r = maximize_unconstrained(concave_quadratic(), Vector::Zero(2), Method::NelderMead);
  EXPECT_NEAR(r.argmax(0), 1.0, 1e-4);
  EXPECT_NEAR(r.argmax(1), -0.5, 1e-4);
}

TEST(Unconstrained, HessianAttachedOnRequest) {
  Options o;
  o.compute_hessian = true;
  const Result r = maximize_unconstrained(concave_quadratic(), Vector::Zero(2), Method::Bfgs, o);
  ASSERT_TRUE(r.hessian.has_value());
  EXPECT_NEAR((*r.hessian)(0, 0), -2.0, 1e-5);
  EXPECT_NEAR((*r.hessian)(1, 1), -4.0, 1e-5);
  EXPECT_NEAR((*r.hessian)(0, 1), 0.0, 1e-5);
}

TEST(Unconstrained, MultistartKeepsBest) {
  Objective f;
  // Two local maxima; the one at x = 2 is higher.
  f.value = [](const Vector& x) { return std::exp(-(x(0) + 1) * (x(0) + 1)) + 2.0 * std::exp(-(x(0) - 2) * (x(0) - 2)); };
  const std::vector<Vector> starts{Vector::Constant(1, -1.0), Vector::Constant(1, 2.5)};
  const Result r = maximize_multistart(f, starts);
  EXPECT_NEAR(r.argmax(0), 2.0, 1e-3);
}

TEST(Methods, ParseAndName) {
  EXPECT_EQ(parse_method("BFGS"), Method::Bfgs);
  EXPECT_EQ(parse_method("nelder-mead"), Method::NelderMead);
  EXPECT_EQ(parse_method("newton"), Method::NewtonRaphson);
  EXPECT_THROW(parse_method("simplex"), InvalidArgument);
  EXPECT_EQ(parse_method(method_name(Method::NelderMead)), Method::NelderMead);
}

TEST(NumericDerivatives, GradientAndHessianOfCubic) {
  const ScalarFn f = [](const Vector& x) { return x(0) * x(0) * x(1) + std::sin(x(1)); };
  Vector x(2);
  x << 0.7, -0.3;
  const Vector g = numeric_gradient(f, x);
  EXPECT_NEAR(g(0), 2 * 0.7 * -0.3, 1e-8);
  EXPECT_NEAR(g(1), 0.49 + std::cos(-0.3), 1e-8);
  const Matrix h = numeric_hessian(f, x, 1e-4);
  EXPECT_NEAR(h(0, 0), -0.6, 1e-6);
  EXPECT_NEAR(h(0, 1), 1.4, 1e-6);
  EXPECT_NEAR(h(1, 1), -std::sin(-0.3), 1e-6);
  EXPECT_DOUBLE_EQ(h(0, 1), h(1, 0));
}

TEST(NumericDerivatives, NonFiniteStencilThrows) {
  const ScalarFn f = [](const Vector& x) { return std::log(x(0)); };
  EXPECT_THROW(numeric_gradient(f, Vector::Constant(1, 1e-7), 1e-5), EstimationError);
}

TEST(Simplex, ProjectionExamples) {
  EXPECT_TRUE(project_simplex(Eigen::Vector2d(1, 1)).isApprox(Eigen::Vector2d(0.5, 0.5)));
  EXPECT_TRUE(project_simplex(Eigen::Vector3d(0.2, 0.3, 0.5)).isApprox(Eigen::Vector3d(0.2, 0.3, 0.5)));
  EXPECT_TRUE(project_simplex(Eigen::Vector2d(3, -1)).isApprox(Eigen::Vector2d(1, 0)));
}

TEST(Simplex, ProjectionIsFeasibleAndIdempotent) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 2.0);
  for (int rep = 0; rep < 200; ++rep) {
    Vector v(4);
    for (auto& x : v) x = n(rng);
    const Vector p = project_simplex(v);
    EXPECT_NEAR(p.sum(), 1.0, 1e-12);
    EXPECT_GE(p.minCoeff(), 0.0);
    EXPECT_TRUE(project_simplex(p).isApprox(p, 1e-12));
  }
}

TEST(AugLag, MaximizesEntropyOnSimplex) {
  Objective f;
  f.value = [](const Vector& x) {
    double s = 0.0;
    for (double v : x) {
      if (v <= 0.0) return -std::numeric_limits<double>::infinity();
      s -= v * std::log(v);
    }
    return s;
  };
  f.gradient = [](const Vector& x) { return Vector((-(x.array().log()) - 1.0).matrix()); };
  Vector start(3);
  start << 0.7, 0.2, 0.1;
  const AugLagResult r = maximize_auglag(f, simplex_constraints(3), start);
  EXPECT_TRUE(r.converged) << r.message;
  for (Eigen::Index i = 0; i < 3; ++i) EXPECT_NEAR(r.argmax(i), 1.0 / 3.0, 1e-5);
}

TEST(AugLag, ActiveBoundConstraint) {
  // Unconstrained maximum at (1.5, -0.5) lies outside the simplex; the
  // constrained optimum is the vertex (1, 0).
  Objective f;
  f.value = [](const Vector& x) { return -(x(0) - 1.5) * (x(0) - 1.5) - (x(1) + 0.5) * (x(1) + 0.5); };
  f.gradient = [](const Vector& x) {
    return Vector(Eigen::Vector2d(-2 * (x(0) - 1.5), -2 * (x(1) + 0.5)));
  };
  const AugLagResult r = maximize_auglag(f, simplex_constraints(2), Eigen::Vector2d(0.5, 0.5));
  EXPECT_TRUE(r.converged) << r.message;
  EXPECT_NEAR(r.argmax(0), 1.0, 1e-6);
  EXPECT_NEAR(r.argmax(1), 0.0, 1e-6);
  EXPECT_GE(r.argmax(1), -1e-8);
  EXPECT_GT(r.inequality_multipliers(1), 0.0);
}

TEST(AugLag, RejectsInfeasibleStart) {
  EXPECT_THROW(maximize_auglag(concave_quadratic(), simplex_constraints(2), Eigen::Vector2d(0.9, 0.9)),
               InvalidArgument);
}

TEST(AugLag, GeneralEqualityConstraint) {
  // max -(x^2 + y^2) s.t. x + 2y = 2  ->  (0.4, 0.8).
  Objective f;
  f.value = [](const Vector& x) { return -x.squaredNorm(); };
  ConstraintSet cs;
  cs.equalities.push_back({[](const Vector& x) { return x(0) + 2 * x(1) - 2; }, {}});
  const AugLagResult r = maximize_auglag(f, cs, Eigen::Vector2d(0, 1));
  EXPECT_TRUE(r.converged) << r.message;
  EXPECT_NEAR(r.argmax(0), 0.4, 1e-5);
  EXPECT_NEAR(r.argmax(1), 0.8, 1e-5);
}
