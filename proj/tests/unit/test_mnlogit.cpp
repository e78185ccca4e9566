#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "mmchain/error.hpp"
#include "mmchain/mnlogit.hpp"
#include "mmchain/optim.hpp"

using namespace mmchain;

namespace {

Design intercept_only(const std::vector<int>& y, int m) {
  Design d;
  d.spec.lag_states = 1;
  d.spec.target_states = m;
  d.x = Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(y.size()), 1);
  d.y = Eigen::Map<const Eigen::VectorXi>(y.data(), static_cast<Eigen::Index>(y.size()));
  return d;
}

// Response drawn from a known logit with intercept, one lag indicator and a covariate.
Design simulated_design(const Eigen::MatrixXd& beta, std::size_t n, std::mt19937_64& rng) {
  const int m = static_cast<int>(beta.rows()) + 1;
  Design d;
  d.spec.lag_states = 2;
  d.spec.target_states = m;
  d.spec.covariates = 1;
  d.x.resize(static_cast<Eigen::Index>(n), 3);
  d.y.resize(static_cast<Eigen::Index>(n));
  std::normal_distribution<double> x01;
  std::bernoulli_distribution coin(0.4);
  for (Eigen::Index i = 0; i < d.x.rows(); ++i) {
    d.x.row(i) << 1.0, coin(rng) ? 1.0 : 0.0, x01(rng);
    Eigen::VectorXd score(m);
    score(0) = 0.0;
    score.tail(m - 1) = beta * d.x.row(i).transpose();
    Eigen::VectorXd p = (score.array() - score.maxCoeff()).exp();
    d.y(i) = testutil::draw(p / p.sum(), rng);
  }
  return d;
}

Eigen::VectorXd stack(const Eigen::MatrixXd& b) {
  Eigen::VectorXd v(b.size());
  for (Eigen::Index c = 0; c < b.rows(); ++c) v.segment(c * b.cols(), b.cols()) = b.row(c).transpose();
  return v;
}

}  // namespace

TEST(Design, ShapeAndReferenceCoding) {
  const Panel p = Panel::from_one_based({{1, 2, 1, 1, 2}, {2, 1, 1, 2, 2}});
  Eigen::MatrixXd xv(5, 1);
  xv << 0.1, 0.2, 0.3, 0.4, 0.5;
  const Design d = build_design(p, 0, 1, CovariateMatrix(xv, {"spread"}), 1);
  EXPECT_EQ(d.x.cols(), 3);
  EXPECT_EQ(d.x.rows(), 4);
  // Row for t = 1: lag S_0 = state 1 -> indicator zero, covariate from t - 1.
  EXPECT_EQ(d.x(0, 1), 0.0);
  EXPECT_EQ(d.x(0, 2), 0.1);
  EXPECT_EQ(d.x(1, 1), 1.0);
  EXPECT_EQ(d.y(0), 0);
  EXPECT_EQ(d.spec.column_names(), (std::vector<std::string>{"(Intercept)", "lag_state_2", "spread"}));
}

TEST(Design, CovariateLagAlignment) {
  const Panel p = Panel::from_one_based({{1, 2, 1, 1, 2}, {2, 1, 1, 2, 2}});
  Eigen::MatrixXd xv(5, 1);
  xv << 10, 11, 12, 13, 14;
  const CovariateMatrix cov(xv, {"x"});
  const Design same = build_design(p, 0, 1, cov, 0);
  EXPECT_EQ(same.x.rows(), 4);
  EXPECT_EQ(same.x(0, 2), 11.0);
  const Design two = build_design(p, 0, 1, cov, 2);
  EXPECT_EQ(two.x.rows(), 3);
  EXPECT_EQ(two.times.front(), 2u);
  EXPECT_EQ(two.x(0, 2), 10.0);
}

TEST(Design, RejectsMisalignedCovariates) {
  const Panel p = Panel::from_one_based({{1, 2, 1, 1, 2}, {2, 1, 1, 2, 2}});
  EXPECT_THROW(build_design(p, 0, 1, CovariateMatrix(Eigen::MatrixXd::Zero(4, 1), {"x"}), 1), DataError);
}

TEST(FitMnlogit, InterceptOnlyBinaryMatchesFrequency) {
  const std::vector<int> y{0, 1, 1, 0, 1, 1, 1, 0, 1, 1};
  const MnLogitModel m = fit_mnlogit(intercept_only(y, 2));
  EXPECT_TRUE(m.converged);
  EXPECT_NEAR(m.coefficients(0, 0), std::log(0.7 / 0.3), 1e-8);
  EXPECT_NEAR(predict_probs(m, Eigen::MatrixXd::Ones(1, 1))(0, 1), 0.7, 1e-8);
}

TEST(FitMnlogit, InterceptOnlyThreeStatesMatchesFrequencies) {
  std::vector<int> y;
  for (int i = 0; i < 20; ++i) y.push_back(0);
  for (int i = 0; i < 50; ++i) y.push_back(1);
  for (int i = 0; i < 30; ++i) y.push_back(2);
  const MnLogitModel m = fit_mnlogit(intercept_only(y, 3));
  const Eigen::MatrixXd p = predict_probs(m, Eigen::MatrixXd::Ones(1, 1));
  EXPECT_NEAR(p(0, 0), 0.2, 1e-8);
  EXPECT_NEAR(p(0, 1), 0.5, 1e-8);
  EXPECT_NEAR(p(0, 2), 0.3, 1e-8);
}

TEST(FitMnlogit, CoverageOfKnownCoefficients) {
  std::mt19937_64 rng(2024);
  Eigen::MatrixXd beta(2, 3);
  beta << -0.5, 1.0, 0.8, 0.3, -0.7, -0.4;
  int inside = 0, total = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const MnLogitModel m = fit_mnlogit(simulated_design(beta, 5000, rng));
    ASSERT_TRUE(m.converged);
    const Eigen::VectorXd est = stack(m.coefficients), truth = stack(beta);
    for (Eigen::Index i = 0; i < est.size(); ++i) {
      const double se = std::sqrt(m.covariance(i, i));
      inside += std::abs(est(i) - truth(i)) <= 3.0 * se;
      ++total;
    }
  }
  EXPECT_GE(static_cast<double>(inside) / total, 0.99);
}

TEST(Score, MatchesNumericGradient) {
  std::mt19937_64 rng(8);
  Eigen::MatrixXd beta(2, 3);
  beta << 0.2, -0.4, 0.6, -0.1, 0.5, -0.3;
  const Design d = simulated_design(beta, 400, rng);
  std::normal_distribution<double> n01;
  Eigen::VectorXd at(6);
  for (auto& v : at) v = 0.5 * n01(rng);
  const Eigen::VectorXd g = mnlogit_score(d.x, d.y, 3, at);
  const Eigen::VectorXd fd = optim::numeric_gradient(
      [&](const Eigen::VectorXd& b) { return mnlogit_loglik(d.x, d.y, 3, b); }, at, 1e-5);
  EXPECT_LT(testutil::max_rel_diff(g, fd), 1e-6);
}

TEST(Hessian, MatchesFiniteDifferenceOfScore) {
  std::mt19937_64 rng(9);
  Eigen::MatrixXd beta(2, 3);
  beta << 0.2, -0.4, 0.6, -0.1, 0.5, -0.3;
  const Design d = simulated_design(beta, 300, rng);
  const Eigen::VectorXd at = stack(beta);
  const Eigen::MatrixXd h = mnlogit_hessian(d.x, 3, at);
  const Eigen::MatrixXd fd = optim::numeric_jacobian_hessian(
      [&](const Eigen::VectorXd& b) { return mnlogit_score(d.x, d.y, 3, b); }, at, 1e-5);
  EXPECT_LT(testutil::max_rel_diff(h, fd), 1e-6);
}

TEST(Predict, ZeroCoefficientsAreUniformAndRowsSumToOne) {
  MnLogitModel m;
  m.spec.target_states = 3;
  m.coefficients = Eigen::MatrixXd::Zero(2, 3);
  Eigen::MatrixXd x(2, 3);
  x << 1, 0, 5.0, 1, 1, -2.0;
  const Eigen::MatrixXd p = predict_probs(m, x);
  EXPECT_TRUE(p.isApprox(Eigen::MatrixXd::Constant(2, 3, 1.0 / 3)));
  m.coefficients << 3, -1, 0.5, -2, 4, 0.25;
  const Eigen::MatrixXd q = predict_probs(m, x);
  for (Eigen::Index i = 0; i < 2; ++i) EXPECT_NEAR(q.row(i).sum(), 1.0, 1e-12);
  EXPECT_THROW(predict_probs(m, Eigen::MatrixXd::Ones(1, 2)), InvalidArgument);
}

TEST(Predict, TrainingAverageEqualsClassFrequencies) {
  std::mt19937_64 rng(10);
  Eigen::MatrixXd beta(2, 3);
  beta << 0.2, -0.4, 0.6, -0.1, 0.5, -0.3;
  const Design d = simulated_design(beta, 600, rng);
  const MnLogitModel m = fit_mnlogit(d);
  const Eigen::VectorXd avg = predict_probs(m, d.x).colwise().mean();
  for (int c = 0; c < 3; ++c) {
    EXPECT_NEAR(avg(c), static_cast<double>((d.y.array() == c).count()) / 600.0, 1e-8);
  }
}

TEST(FitMnlogit, PermutingNonReferenceStatesSwapsRows) {
  std::mt19937_64 rng(12);
  Eigen::MatrixXd beta(2, 3);
  beta << 0.2, -0.4, 0.6, -0.1, 0.5, -0.3;
  Design d = simulated_design(beta, 500, rng);
  const MnLogitModel a = fit_mnlogit(d);
  for (Eigen::Index i = 0; i < d.y.size(); ++i) d.y(i) = d.y(i) == 1 ? 2 : d.y(i) == 2 ? 1 : 0;
  const MnLogitModel b = fit_mnlogit(d);
  EXPECT_TRUE(a.coefficients.row(0).isApprox(b.coefficients.row(1), 1e-6));
  EXPECT_NEAR(a.loglik, b.loglik, 1e-8);
}

TEST(FitMnlogit, RankDeficiencyNamesColumns) {
  std::mt19937_64 rng(13);
  Eigen::MatrixXd beta(1, 3);
  beta << 0.1, 0.2, 0.3;
  Design d = simulated_design(beta, 200, rng);
  d.spec.covariate_names = {"spread"};
  d.x.col(2) = d.x.col(0) * 2.0;
  try {
    fit_mnlogit(d);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("collinear"), std::string::npos);
    EXPECT_TRUE(msg.find("spread") != std::string::npos || msg.find("(Intercept)") != std::string::npos);
  }
}

TEST(FitMnlogit, SeparationIsFlagged) {
  Design d;
  d.spec.lag_states = 1;
  d.spec.target_states = 2;
  d.spec.covariates = 1;
  d.x.resize(40, 2);
  d.y.resize(40);
  for (int i = 0; i < 40; ++i) {
    d.x.row(i) << 1.0, i - 19.5;
    d.y(i) = i >= 20;
  }
  const MnLogitModel m = fit_mnlogit(d);
  EXPECT_TRUE(m.separated);
  EXPECT_FALSE(m.warnings.empty());
}

TEST(FitMnlogit, UnobservedResponseStateIsAnError) {
  Design d = intercept_only({0, 0, 1, 0, 1}, 3);
  EXPECT_THROW(fit_mnlogit(d), DataError);
}
