#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "mmchain/csv.hpp"
#include "mmchain/error.hpp"
#include "mmchain/panel.hpp"
#include "mmchain/transforms.hpp"

using namespace mmchain;

namespace {

Panel two_chain(std::vector<int> a, std::vector<int> b) {
  return Panel::from_one_based({std::move(a), std::move(b)});
}

}  // namespace

TEST(Encode, FirstAppearanceOrder) {
  const EncodedPanel e = encode_sequences({{"a", "b", "a"}});
  EXPECT_EQ(e.panel.states(0), 2);
  EXPECT_EQ(e.panel.at(0, 0), 0);
  EXPECT_EQ(e.panel.at(0, 1), 1);
  EXPECT_EQ(e.panel.at(0, 2), 0);
}

TEST(Encode, IdenticalColumnsEncodeIdentically) {
  const EncodedPanel e = encode_sequences({{"x", "y", "z", "y"}, {"x", "y", "z", "y"}});
  for (std::size_t t = 0; t < 4; ++t) EXPECT_EQ(e.panel.at(0, t), e.panel.at(1, t));
}

TEST(Encode, RejectsConstantColumn) {
  EXPECT_THROW(encode_sequences({{"x", "x", "x"}}), DataError);
}

TEST(Encode, RejectsRaggedColumns) {
  EXPECT_THROW(encode_sequences({{"a", "b", "a"}, {"a", "b"}}), DataError);
}

TEST(Encode, DecodeRoundTrips) {
  const std::vector<std::string> raw{"up", "flat", "down", "up", "up"};
  const EncodedPanel e = encode_sequences({raw, {"1", "2", "1", "2", "1"}});
  EXPECT_EQ(decode_sequence(e, 0), raw);
}

TEST(PanelInvariants, RejectsMissingState) {
  EXPECT_THROW(Panel({{0, 2, 0}}, {3}), DataError);
}

TEST(PanelInvariants, RejectsShortPanel) {
  EXPECT_THROW(Panel({{0}}, {1}), DataError);
}

TEST(PanelInvariants, RejectsOutOfRangeLabel) {
  EXPECT_THROW(Panel({{0, 1, 2}}, {2}), DataError);
}

TEST(CountTransitions, AlternatingChain) {
  const Panel p = two_chain({1, 2, 1, 2}, {1, 2, 1, 2});
  const FrequencyMatrix f = count_transitions(p, 0, 1);
  Eigen::Matrix2i expected;
  expected << 0, 2, 1, 0;
  EXPECT_EQ(f.counts, expected);
  EXPECT_EQ(f.total(), 3);
}

TEST(CountTransitions, SingleTransition) {
  // n = 2: the only pair is (S_k,1 = 1, S_j,2 = 1).
  const Panel p = two_chain({1, 2}, {2, 1});
  const FrequencyMatrix f = count_transitions(p, 0, 1);
  Eigen::Matrix2i expected;
  expected << 1, 0, 0, 0;
  EXPECT_EQ(f.counts, expected);
}

TEST(CountTransitions, DirectionMatters) {
  const Panel p = two_chain({1, 1, 2}, {2, 1, 1});
  const FrequencyMatrix kj = count_transitions(p, 0, 1);
  const FrequencyMatrix jk = count_transitions(p, 1, 0);
  // 0 -> 1: pairs (S0[t-1], S1[t]) = (1,1), (1,1); 1 -> 0: (2,1), (1,2).
  Eigen::Matrix2i a, b;
  a << 2, 0, 0, 0;
  b << 0, 1, 1, 0;
  EXPECT_EQ(kj.counts, a);
  EXPECT_EQ(jk.counts, b);
}

TEST(RowNormalize, Examples) {
  FrequencyMatrix f;
  f.counts.resize(2, 2);
  f.counts << 2, 2, 0, 4;
  Eigen::Matrix2d e;
  e << 0.5, 0.5, 0, 1;
  EXPECT_TRUE(row_normalize(f).probs.isApprox(e));

  f.counts << 0, 0, 1, 3;
  e << 0.5, 0.5, 0.25, 0.75;
  EXPECT_TRUE(row_normalize(f).probs.isApprox(e));

  f.counts << 5, 0, 0, 7;
  EXPECT_TRUE(row_normalize(f).probs.isApprox(Eigen::Matrix2d::Identity()));
}

TEST(RowNormalize, GridIsRowStochasticAndCountsSumToNMinusOne) {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> u3(0, 2), u2(0, 1);
  std::vector<int> a(60), b(60), c(60);
  for (int t = 0; t < 60; ++t) {
    a[static_cast<std::size_t>(t)] = t < 3 ? t : u3(rng);
    b[static_cast<std::size_t>(t)] = t < 2 ? t : u2(rng);
    c[static_cast<std::size_t>(t)] = t < 3 ? t : u3(rng);
  }
  const Panel p({a, b, c}, {3, 2, 3});
  const auto grid = transition_grid(p);
  for (std::size_t j = 0; j < 3; ++j) {
    for (std::size_t k = 0; k < 3; ++k) {
      EXPECT_EQ(count_transitions(p, k, j).total(), 59);
      const Eigen::MatrixXd& m = grid[j][k].probs;
      EXPECT_EQ(m.rows(), p.states(k));
      EXPECT_EQ(m.cols(), p.states(j));
      for (Eigen::Index i = 0; i < m.rows(); ++i) EXPECT_NEAR(m.row(i).sum(), 1.0, 1e-12);
    }
  }
}

TEST(EmpiricalDistribution, Examples) {
  const Panel p = two_chain({1, 2, 1, 2}, {1, 1, 1, 2});
  EXPECT_TRUE(empirical_distribution(p, 0).isApprox(Eigen::Vector2d(0.5, 0.5)));
  EXPECT_TRUE(empirical_distribution(p, 1).isApprox(Eigen::Vector2d(0.75, 0.25)));
  EXPECT_NEAR(empirical_distribution(p, 1).sum(), 1.0, 1e-15);
}

TEST(LogReturns, Examples) {
  EXPECT_EQ(log_returns(std::vector<double>{100, 100}), std::vector<double>{0.0});
  const auto r = log_returns(std::vector<double>{100, 100 * std::exp(0.01)});
  ASSERT_EQ(r.size(), 1u);
  EXPECT_NEAR(r[0], 1.0, 1e-12);
  for (double v : log_returns(std::vector<double>{5, 5, 5, 5})) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(log_returns(std::vector<double>{1, 0, 2}), DataError);
}

TEST(Quantile, Type7MatchesHandComputation) {
  const std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8};
  // h = (n - 1) p + 1 = 2.75 -> 2 + 0.75 * (3 - 2)
  EXPECT_DOUBLE_EQ(quantile_type7(v, 0.25), 2.75);
  EXPECT_DOUBLE_EQ(quantile_type7(v, 0.75), 6.25);
  EXPECT_DOUBLE_EQ(quantile_type7(v, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile_type7(v, 1.0), 8.0);
}

TEST(Discretize, EightPointExample) {
  const std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8};
  EXPECT_EQ(discretize_quantiles(v), (std::vector<int>{1, 1, 2, 2, 2, 2, 3, 3}));
}

TEST(Discretize, BoundaryTiesFollowTheCaseRule) {
  // q25 = 2 and q75 = 4 exactly: values equal to a bound fall in the outer state.
  const std::vector<double> v{1, 2, 3, 4, 5};
  EXPECT_EQ(discretize_quantiles(v), (std::vector<int>{1, 1, 2, 3, 3}));
}

TEST(Discretize, DegenerateSeriesIsRejected) {
  EXPECT_THROW(discretize_quantiles(std::vector<double>{3, 3, 3, 3, 3, 9}), DataError);
  EXPECT_THROW(discretize_quantiles(std::vector<double>{1, 2, 3}), DataError);
}

TEST(Discretize, LargeNormalSampleIsQuarterHalfQuarter) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n01;
  std::vector<double> v(100000);
  for (auto& x : v) x = n01(rng);
  const auto s = discretize_quantiles(v);
  std::array<double, 3> freq{};
  for (int st : s) freq[static_cast<std::size_t>(st - 1)] += 1.0 / static_cast<double>(s.size());
  EXPECT_NEAR(freq[0], 0.25, 0.005);
  EXPECT_NEAR(freq[1], 0.50, 0.005);
  EXPECT_NEAR(freq[2], 0.25, 0.005);
}

TEST(MovingAverage, Examples) {
  EXPECT_EQ(moving_average(std::vector<double>{1, 2, 3, 4, 5}, 5), std::vector<double>{3.0});
  const std::vector<double> c(9, 2.5);
  for (double v : moving_average(c, 5)) EXPECT_DOUBLE_EQ(v, 2.5);
  const std::vector<double> id{4, -1, 7};
  EXPECT_EQ(moving_average(id, 1), id);
  EXPECT_THROW(moving_average(id, 4), InvalidArgument);
  EXPECT_EQ(moving_average(std::vector<double>{1, 2, 3, 4, 5, 6}, 2), (std::vector<double>{1.5, 2.5, 3.5, 4.5, 5.5}));
}

TEST(Csv, ParsesQuotesAndHeader) {
  std::istringstream in("\xEF\xBB\xBF" "a,\"b,c\"\r\n1,\"x \"\"q\"\"\"\r\n2,y\n");
  const csv::Table t = csv::parse(in, true);
  ASSERT_EQ(t.header.size(), 2u);
  EXPECT_EQ(t.header[1], "b,c");
  EXPECT_EQ(t.rows[0][1], "x \"q\"");
  EXPECT_EQ(t.rows.size(), 2u);
}

TEST(Csv, RejectsEmptyCellsAndRaggedRows) {
  std::istringstream a("1,2\n3,\n");
  EXPECT_THROW(csv::parse(a, false), DataError);
  std::istringstream b("1,2\n3\n");
  EXPECT_THROW(csv::parse(b, false), DataError);
}

TEST(Csv, IntegerLabelsKeepNumericOrder) {
  std::istringstream in("s1,s2\n3,1\n1,2\n2,1\n3,2\n");
  const EncodedPanel e = csv::panel_from_table(csv::parse(in, true), false);
  EXPECT_EQ(e.panel.at(0, 0), 2);
  EXPECT_EQ(e.panel.at(0, 1), 0);
  EXPECT_EQ(e.labels[0][0], "1");
}

TEST(Csv, TimeIndexColumnIsSplitOff) {
  std::istringstream in("date,s1,s2\n2020-01-01,1,2\n2020-01-02,2,1\n2020-01-03,1,1\n");
  const EncodedPanel e = csv::panel_from_table(csv::parse(in, true), true);
  EXPECT_EQ(e.panel.num_chains(), 2u);
  EXPECT_EQ(e.panel.time_index().at(2), "2020-01-03");
}

TEST(Csv, CovariatesMustBeNumeric) {
  std::istringstream ok("spread\n0.5\n-1.25\n");
  const CovariateMatrix c = csv::covariates_from_table(csv::parse(ok, true));
  EXPECT_EQ(c.names().at(0), "spread");
  EXPECT_DOUBLE_EQ(c.values()(1, 0), -1.25);
  std::istringstream bad("spread\n0.5\nabc\n");
  EXPECT_THROW(csv::covariates_from_table(csv::parse(bad, true)), DataError);
}
