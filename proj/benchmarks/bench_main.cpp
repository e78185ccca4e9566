#include <random>

#include <benchmark/benchmark.h>

#include "mmchain/gmmc.hpp"
#include "mmchain/mnlogit.hpp"
#include "mmchain/optim.hpp"
#include "mmchain/simulation.hpp"

using namespace mmchain;

namespace {

struct Inputs {
  Panel panel;
  CovariateMatrix cov;
};

Inputs make_inputs(std::size_t n, int m) {
  sim::Rng rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::normal_distribution<double> nx(2.0, 5.0);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), 1);
  for (auto& v : x.reshaped()) v = nx(rng);
  std::vector<std::vector<int>> cols;
  for (int c = 0; c < 2; ++c) {
    sim::LogitGenerator g{Eigen::MatrixXd::NullaryExpr(m, m, [&] { return u(rng); }),
                          Eigen::MatrixXd::NullaryExpr(m, 1, [&] { return 0.2 * u(rng); })};
    auto s = sim::simulate_nonhomog_chain(g, x, n, 0, rng);
    for (int k = 0; k < m; ++k) s[static_cast<std::size_t>(k)] = k;
    cols.push_back(std::move(s));
  }
  return {Panel(cols, std::vector<int>(2, m)), CovariateMatrix(x, {"x"})};
}

void BM_MnLogitFit(benchmark::State& state) {
  const Inputs in = make_inputs(static_cast<std::size_t>(state.range(0)), 3);
  const Design d = build_design(in.panel, 0, 0, in.cov, 1);
  for (auto _ : state) benchmark::DoNotOptimize(fit_mnlogit(d));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MnLogitFit)->Arg(500)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_GmmcEstimate(benchmark::State& state) {
  const Inputs in = make_inputs(static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(estimate_gmmc(in.panel, in.cov));
}
BENCHMARK(BM_GmmcEstimate)->Arg(500)->Arg(2581)->Unit(benchmark::kMillisecond);

void BM_AugLagSimplex(benchmark::State& state) {
  const Inputs in = make_inputs(2000, 3);
  const ProbStage st = build_prob_tensor(in.panel, in.cov, 1, {0});
  const Eigen::MatrixXd& q = st.q[0];
  GmmcOptions opt;
  opt.equations = {0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_gmmc(st, in.panel, {"x"}, std::nullopt, opt));
  }
  state.counters["rows"] = static_cast<double>(q.rows());
}
BENCHMARK(BM_AugLagSimplex)->Unit(benchmark::kMicrosecond);

void BM_SimulationReplication(benchmark::State& state) {
  sim::SimConfig c;
  c.part = state.range(0) == 1 ? sim::Part::One : sim::Part::Two;
  c.n_obs = 500;
  const sim::SimReport study = sim::prepare_study(c);
  std::size_t rep = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sim::run_replication(c, study, rep++));
}
BENCHMARK(BM_SimulationReplication)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
