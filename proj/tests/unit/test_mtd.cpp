#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "mmchain/error.hpp"
#include "mmchain/mixture.hpp"
#include "mmchain/mtd.hpp"

using namespace mmchain;

namespace {

// Two chains where chain 2 copies chain 1 with a one-step delay.
Panel lagged_copy(std::size_t n, std::mt19937_64& rng) {
  std::vector<int> a = testutil::iid_states(n, 3, rng);
  std::vector<int> b(n);
  b[0] = a[n - 1];
  for (std::size_t t = 1; t < n; ++t) b[t] = a[t - 1];
  return Panel({a, b}, {3, 3});
}

double brute_force_ll(const Panel& p, const Eigen::VectorXd& w, std::size_t j) {
  // Transition probabilities recounted from scratch, product taken in full.
  const std::size_t s = p.num_chains();
  double prod = 1.0;
  for (std::size_t t = 1; t < p.length(); ++t) {
    double mix = 0.0;
    for (std::size_t k = 0; k < s; ++k) {
      const int from = p.at(k, t - 1);
      double num = 0.0, den = 0.0;
      for (std::size_t u = 1; u < p.length(); ++u) {
        if (p.at(k, u - 1) != from) continue;
        den += 1.0;
        if (p.at(j, u) == p.at(j, t)) num += 1.0;
      }
      mix += w(static_cast<Eigen::Index>(k)) * num / den;
    }
    prod *= mix;
  }
  return std::log(prod);
}

}  // namespace

TEST(MtdLoglik, MatchesBruteForceProduct) {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 10; ++rep) {
    const Panel p({testutil::iid_states(9, 3, rng), testutil::iid_states(9, 2, rng)}, {3, 2});
    const auto grid = transition_grid(p);
    std::vector<Eigen::VectorXd> w;
    for (int j = 0; j < 2; ++j) {
      const double a = std::uniform_real_distribution<double>(0.05, 0.95)(rng);
      w.push_back(Eigen::Vector2d(a, 1 - a));
    }
    const Eigen::VectorXd ll = mtd_loglik(p, w, grid);
    for (std::size_t j = 0; j < 2; ++j) {
      const double oracle = brute_force_ll(p, w[j], j);
      EXPECT_NEAR(ll(static_cast<Eigen::Index>(j)), oracle, 1e-10 * std::abs(oracle));
    }
  }
}

TEST(MtdPredict, IsMixtureOfRows) {
  std::mt19937_64 rng(1);
  const Panel p({testutil::iid_states(50, 2, rng), testutil::iid_states(50, 3, rng)}, {2, 3});
  MtdModel m;
  m.transmats = transition_grid(p);
  m.weights = {Eigen::Vector2d(0.3, 0.7), Eigen::Vector2d(0.5, 0.5)};
  const std::vector<int> lagged{1, 2};
  const Eigen::VectorXd d = mtd_predict(m, 0, lagged);
  const Eigen::VectorXd e = 0.3 * m.transmats[0][0].probs.row(1).transpose() +
                            0.7 * m.transmats[0][1].probs.row(2).transpose();
  EXPECT_TRUE(d.isApprox(e));
  EXPECT_NEAR(d.sum(), 1.0, 1e-12);
}

TEST(Reallocation, TraceIsMonotoneAndStaysOnSimplex) {
  std::mt19937_64 rng(9);
  Eigen::MatrixXd q(200, 3);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (Eigen::Index t = 0; t < q.rows(); ++t) {
    for (Eigen::Index k = 0; k < 3; ++k) q(t, k) = u(rng);
  }
  const ReallocationResult r = reallocate_weights(q, Eigen::Vector3d::Constant(1.0 / 3), {});
  for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_GT(r.trace[i], r.trace[i - 1]);
  EXPECT_NEAR(r.weights.sum(), 1.0, 1e-12);
  EXPECT_GE(r.weights.minCoeff(), 0.0);
  EXPECT_GE(r.phases, 1);
}

TEST(Reallocation, ReachesTheConstrainedOptimum) {
  std::mt19937_64 rng(2);
  Eigen::MatrixXd q(300, 2);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (Eigen::Index t = 0; t < q.rows(); ++t) q.row(t) << u(rng), u(rng);
  MtdOptions o;
  o.delta_stop = 1e-7;
  const ReallocationResult r = reallocate_weights(q, Eigen::Vector2d(0.5, 0.5), o);
  // Grid search oracle on the segment.
  double best = -1e300, arg = 0;
  for (int i = 0; i <= 100000; ++i) {
    const double a = i / 100000.0;
    const double ll = mixture::loglik(Eigen::Vector2d(a, 1 - a), q);
    if (ll > best) {
      best = ll;
      arg = a;
    }
  }
  EXPECT_NEAR(r.weights(0), arg, 1e-4);
  EXPECT_GE(r.loglik, best - 1e-8);
}

TEST(Reallocation, UnconstrainedMayLeaveTheSimplexButKeepsTheSum) {
  // Component 1 dominates everywhere, so the unconstrained optimum lies past
  // the vertex as long as mixture probabilities stay positive.
  Eigen::MatrixXd q(100, 2);
  for (Eigen::Index t = 0; t < q.rows(); ++t) q.row(t) << 0.9, 0.6;
  MtdOptions o;
  o.constrained = false;
  const ReallocationResult r = reallocate_weights(q, Eigen::Vector2d(0.5, 0.5), o);
  EXPECT_NEAR(r.weights.sum(), 1.0, 1e-9);
  EXPECT_GT(r.weights(0), 1.0);
}

TEST(EstimateMtd, LaggedCopyGetsFullWeight) {
  std::mt19937_64 rng(21);
  const Panel p = lagged_copy(1000, rng);
  const MtdModel m = estimate_mtd(p);
  EXPECT_NEAR(m.weights[1](0), 1.0, 0.05);
  EXPECT_NEAR(m.weights[1].sum(), 1.0, 1e-12);
  ASSERT_EQ(m.report.equations.size(), 2u);
  EXPECT_NEAR(m.report.equations[1].loglik, m.loglik(1), 1e-12);
}

TEST(EstimateMtd, BeatsUniformAndVertices) {
  std::mt19937_64 rng(4);
  const Panel p({testutil::iid_states(300, 3, rng), testutil::iid_states(300, 2, rng),
                 testutil::iid_states(300, 3, rng)},
                {3, 2, 3});
  const MtdModel m = estimate_mtd(p);
  for (std::size_t j = 0; j < 3; ++j) {
    const Eigen::MatrixXd q = mtd_component_probs(p, m.transmats, j);
    const double ll = m.loglik(static_cast<Eigen::Index>(j));
    EXPECT_GE(ll, mixture::loglik(Eigen::Vector3d::Constant(1.0 / 3), q) - 1e-12);
    for (Eigen::Index k = 0; k < 3; ++k) EXPECT_GE(ll, mixture::loglik(Eigen::Vector3d::Unit(k), q) - 1e-12);
  }
}

TEST(EstimateMtd, IdenticalChainsAreFlat) {
  std::mt19937_64 rng(8);
  const std::vector<int> a = testutil::iid_states(200, 2, rng);
  const MtdModel m = estimate_mtd(Panel({a, a}, {2, 2}));
  bool flagged = false;
  for (const auto& w : m.report.equations[0].warnings) flagged |= w.find("flat") != std::string::npos;
  EXPECT_TRUE(flagged);
}

TEST(EstimateMtd, RejectsBadOptions) {
  std::mt19937_64 rng(8);
  const Panel p({testutil::iid_states(20, 2, rng), testutil::iid_states(20, 2, rng)}, {2, 2});
  MtdOptions o;
  o.delta_stop = 0.0;
  EXPECT_THROW(estimate_mtd(p, o), InvalidArgument);
  o.delta_stop = 1e-4;
  o.delta = 1.5;
  EXPECT_THROW(estimate_mtd(p, o), InvalidArgument);
}

TEST(MtdHessian, MatchesFiniteDifferences) {
  std::mt19937_64 rng(12);
  const Panel p({testutil::iid_states(80, 3, rng), testutil::iid_states(80, 3, rng)}, {3, 3});
  MtdModel m;
  m.transmats = transition_grid(p);
  m.weights = {Eigen::Vector2d(0.35, 0.65), Eigen::Vector2d(0.8, 0.2)};
  const auto hs = mtd_hessian(p, m);
  for (std::size_t j = 0; j < 2; ++j) {
    const Eigen::MatrixXd q = mtd_component_probs(p, m.transmats, j);
    const Eigen::MatrixXd fd =
        testutil::fd_hessian([&](const Eigen::VectorXd& w) { return mixture::loglik(w, q); }, m.weights[j], 1e-4);
    EXPECT_LT(testutil::max_rel_diff(hs[j], fd), 1e-5);
    EXPECT_TRUE(hs[j].isApprox(hs[j].transpose()));
  }
}

TEST(MinMax, LpBeatsGridAndVertices) {
  std::mt19937_64 rng(15);
  for (int rep = 0; rep < 5; ++rep) {
    const Panel p({testutil::iid_states(120, 3, rng), testutil::iid_states(120, 3, rng)}, {3, 3});
    const auto grid = transition_grid(p);
    const auto w = estimate_lambda_minmax(p);
    for (std::size_t j = 0; j < 2; ++j) {
      EXPECT_NEAR(w[j].sum(), 1.0, 1e-12);
      EXPECT_GE(w[j].minCoeff(), 0.0);
      const double r = minmax_residual(p, grid, j, w[j]);
      double best = 1e300;
      for (int i = 0; i <= 2000; ++i) {
        const double a = i / 2000.0;
        best = std::min(best, minmax_residual(p, grid, j, Eigen::Vector2d(a, 1 - a)));
      }
      EXPECT_LE(r, best + 1e-9);
    }
  }
}
