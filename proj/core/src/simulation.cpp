#include "mmchain/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "mmchain/error.hpp"
#include "mmchain/gmmc.hpp"
#include "mmchain/panel.hpp"

namespace mmchain::sim {
namespace {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

constexpr std::size_t kKeptFailureMessages = 5;

std::string format_value(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Matrix draw_covariate(std::size_t n, Rng& rng) {
  std::normal_distribution<double> normal(2.0, 5.0);
  Matrix x(static_cast<Eigen::Index>(n), 1);
  for (Eigen::Index t = 0; t < x.rows(); ++t) x(t, 0) = normal(rng);
  return x;
}

// Two-state generator with P(state 2 | lag 1) = logistic(-a + b (x - 2)) and
// P(state 2 | lag 2) = logistic(a + b (x - 2)).
LogitGenerator two_state_generator(double a, double b) {
  LogitGenerator g;
  g.lag_effects = Matrix::Zero(2, 2);
  g.lag_effects(0, 1) = -a - 2.0 * b;
  g.lag_effects(1, 1) = a - 2.0 * b;
  g.slopes = Matrix::Zero(2, 1);
  g.slopes(1, 0) = b;
  return g;
}

Panel make_panel(std::vector<int> c1, std::vector<int> c2, int states) {
  return Panel({std::move(c1), std::move(c2)}, {states, states});
}

GmmcOptions fit_options(const SimConfig& config) {
  GmmcOptions o;
  o.x_lag = 1;
  o.equations = {0};
  o.variance = config.variance;
  return o;
}

RepOutcome fit_equation_one(const Panel& panel, const Matrix& x, const SimConfig& config) {
  RepOutcome out;
  const GmmcFit fit = estimate_gmmc(panel, CovariateMatrix(x, {"x"}), std::nullopt, fit_options(config));
  const GmmcEquation& eq = fit.equations.front();
  if (!eq.converged) {
    out.error = "estimation did not converge";
    return out;
  }
  const EquationReport& rep = fit.report.equations.front();
  out.estimate = eq.weights;
  out.std_error.resize(eq.weights.size());
  for (std::size_t k = 0; k < rep.rows.size(); ++k) {
    if (!rep.rows[k].has_std_error()) {
      out.error = "standard errors unavailable";
      return out;
    }
    out.std_error(static_cast<Eigen::Index>(k)) = rep.rows[k].std_error;
  }
  out.ok = true;
  return out;
}

std::vector<HypothesisRate> hypotheses_for(const SimConfig& config) {
  std::vector<HypothesisRate> h;
  auto add = [&](const char* kind, std::size_t k, double null_value) {
    HypothesisRate r;
    r.kind = kind;
    r.parameter = k;
    r.null_value = null_value;
    r.label = "H0: lambda1" + std::to_string(k + 1) + " = " + format_value(null_value);
    h.push_back(r);
  };
  if (config.part == Part::One) {
    add("power", 0, 0.0);
    add("power", 1, 1.0);
    add("dimension", 0, 1.0);
    add("dimension", 1, 0.0);
  } else {
    for (std::size_t k = 0; k < 2; ++k) {
      add("dimension", k, config.lambda_true(static_cast<Eigen::Index>(k)));
      add("power", k, 0.0);
    }
  }
  return h;
}

}  // namespace

int draw_state(const Vector& probs, Rng& rng) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng) * probs.sum();
  double acc = 0.0;
  for (Eigen::Index c = 0; c < probs.size(); ++c) {
    acc += probs(c);
    if (u < acc) return static_cast<int>(c);
  }
  // Rounding left u at the top; take the last state with positive mass.
  for (Eigen::Index c = probs.size() - 1; c >= 0; --c) {
    if (probs(c) > 0.0) return static_cast<int>(c);
  }
  throw InvalidArgument("draw_state: probabilities sum to zero");
}

std::vector<int> simulate_homog_chain(const Matrix& transition, std::size_t n, int init_state,
                                      Rng& rng) {
  if (transition.rows() != transition.cols()) throw InvalidArgument("transition matrix must be square");
  if (init_state < 0 || init_state >= transition.rows()) throw InvalidArgument("initial state out of range");
  for (Eigen::Index i = 0; i < transition.rows(); ++i) {
    if ((transition.row(i).array() < 0.0).any() || std::abs(transition.row(i).sum() - 1.0) > 1e-9) {
      throw InvalidArgument("transition matrix rows must be probability distributions");
    }
  }
  std::vector<int> s(n);
  if (n == 0) return s;
  s[0] = init_state;
  for (std::size_t t = 1; t < n; ++t) s[t] = draw_state(transition.row(s[t - 1]).transpose(), rng);
  return s;
}

Vector LogitGenerator::distribution(int lag_state, const Vector& x) const {
  Vector score = lag_effects.row(lag_state).transpose() + slopes * x;
  score.array() -= score.maxCoeff();
  Vector p = score.array().exp();
  return p / p.sum();
}

std::vector<int> simulate_nonhomog_chain(const LogitGenerator& generator, const Matrix& x,
                                         std::size_t n, int init_state, Rng& rng) {
  if (static_cast<std::size_t>(x.rows()) < n) throw InvalidArgument("covariate series shorter than n");
  if (x.cols() != generator.slopes.cols()) throw InvalidArgument("covariate width does not match generator");
  if (init_state < 0 || init_state >= generator.states()) throw InvalidArgument("initial state out of range");
  std::vector<int> s(n);
  if (n == 0) return s;
  s[0] = init_state;
  for (std::size_t t = 1; t < n; ++t) {
    const Vector xt = x.row(static_cast<Eigen::Index>(t) - 1).transpose();
    s[t] = draw_state(generator.distribution(s[t - 1], xt), rng);
  }
  return s;
}

Matrix random_transition_matrix(int states, Rng& rng) {
  std::exponential_distribution<double> expo(1.0);
  Matrix p(states, states);
  for (int i = 0; i < states; ++i) {
    for (int c = 0; c < states; ++c) p(i, c) = expo(rng);
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

Rng make_rng(std::uint64_t seed, std::int64_t rep) {
  const auto r = static_cast<std::uint64_t>(rep + 1);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(r >> 32)};
  return Rng(seq);
}

void validate(const SimConfig& c) {
  if (c.part != Part::One && c.part != Part::Two) throw InvalidArgument("part must be 1 or 2");
  if (c.n_obs < 20) throw InvalidArgument("n_obs must be at least 20");
  if (c.n_reps < 1) throw InvalidArgument("n_reps must be at least 1");
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
  if (c.part == Part::One && c.states != 2 && c.states != 3) {
    throw InvalidArgument("part 1 supports 2 or 3 states");
  }
  if (c.part == Part::Two) {
    if (c.states != 2) throw InvalidArgument("part 2 uses two states");
    if (c.lambda_true.size() != 2 || (c.lambda_true.array() < 0.0).any() ||
        std::abs(c.lambda_true.sum() - 1.0) > 1e-9) {
      throw InvalidArgument("lambda must be two non-negative weights summing to 1");
    }
  }
  if (!(c.max_failure_rate >= 0.0 && c.max_failure_rate < 1.0)) {
    throw InvalidArgument("max_failure_rate must lie in [0, 1)");
  }
}

SimReport prepare_study(const SimConfig& config) {
  validate(config);
  SimReport study;
  study.config = config;
  study.config.threads = std::max(1u, config.threads);
  Rng rng = make_rng(config.seed, -1);
  const int m = config.states;
  if (config.part == Part::One) {
    LogitGenerator g;
    g.lag_effects.resize(m, m);
    for (int i = 0; i < m; ++i) {
      for (int c = 0; c < m; ++c) g.lag_effects(i, c) = uniform(rng, -1.0, 1.0);
      g.lag_effects(i, i) += config.persistence;
    }
    g.slopes.resize(m, 1);
    for (int c = 0; c < m; ++c) g.slopes(c, 0) = uniform(rng, -1.0, 1.0);
    study.generators.push_back(g);
    study.homogeneous_matrix = random_transition_matrix(m, rng);
    study.homogeneous_chain = simulate_homog_chain(study.homogeneous_matrix, config.n_obs, 0, rng);
  } else {
    // generators[2 j + k]: component of equation j driven by chain k. The own
    // chain is persistent (probabilities near 0 and 1), the other moderate.
    for (int j = 0; j < 2; ++j) {
      for (int k = 0; k < 2; ++k) {
        if (j == k) {
          const double a = uniform(rng, 3.0, 4.5);
          const double b = uniform(rng, -0.1, 0.1);
          study.generators.push_back(two_state_generator(a, b));
        } else {
          const double a = uniform(rng, -0.5, 0.5);
          const double b = uniform(rng, -0.06, 0.06);
          study.generators.push_back(two_state_generator(a, b));
        }
      }
    }
  }
  study.hypotheses = hypotheses_for(config);
  return study;
}

RepOutcome run_replication(const SimConfig& config, const SimReport& study, std::size_t rep) {
  Rng rng = make_rng(config.seed, static_cast<std::int64_t>(rep));
  const std::size_t n = config.n_obs;
  const Matrix x = draw_covariate(n, rng);
  if (config.part == Part::One) {
    std::vector<int> c1 = simulate_nonhomog_chain(study.generators.front(), x, n, 0, rng);
    return fit_equation_one(make_panel(std::move(c1), study.homogeneous_chain, config.states), x,
                            config);
  }
  const Vector& lambda = config.lambda_true;
  std::vector<int> c1(n), c2(n);
  c1[0] = 0;
  c2[0] = 0;
  for (std::size_t t = 1; t < n; ++t) {
    const Vector xt = x.row(static_cast<Eigen::Index>(t) - 1).transpose();
    const int lag[2] = {c1[t - 1], c2[t - 1]};
    Vector p[2];
    for (int j = 0; j < 2; ++j) {
      // Own chain carries lambda(0), the other chain lambda(1).
      p[j] = lambda(0) * study.generators[static_cast<std::size_t>(2 * j + j)].distribution(lag[j], xt) +
             lambda(1) * study.generators[static_cast<std::size_t>(2 * j + (1 - j))].distribution(lag[1 - j], xt);
    }
    c1[t] = draw_state(p[0], rng);
    c2[t] = draw_state(p[1], rng);
  }
  return fit_equation_one(make_panel(std::move(c1), std::move(c2), 2), x, config);
}

SimReport run(const SimConfig& config) {
  SimReport report = prepare_study(config);
  const std::size_t reps = config.n_reps;
  std::vector<RepOutcome> outcomes(reps);
  auto work = [&](std::size_t rep) {
    try {
      outcomes[rep] = run_replication(config, report, rep);
    } catch (const std::exception& e) {
      outcomes[rep].ok = false;
      outcomes[rep].error = e.what();
    }
  };
  const unsigned threads = std::min<std::size_t>(report.config.threads, reps);
  if (threads <= 1) {
    for (std::size_t r = 0; r < reps; ++r) work(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) {
      pool.emplace_back([&] {
        for (std::size_t r = next++; r < reps; r = next++) work(r);
      });
    }
    for (auto& th : pool) th.join();
  }

  // Aggregate in replication order so serial and parallel runs agree exactly.
  const Eigen::Index p = 2;
  report.mean_estimate = Vector::Zero(p);
  Vector abs_err = Vector::Zero(p);
  for (std::size_t r = 0; r < reps; ++r) {
    const RepOutcome& o = outcomes[r];
    if (!o.ok) {
      ++report.failed_reps;
      if (report.failure_messages.size() < kKeptFailureMessages) {
        report.failure_messages.push_back("replication " + std::to_string(r + 1) + ": " + o.error);
      }
      continue;
    }
    ++report.successful_reps;
    report.mean_estimate += o.estimate;
    if (config.part == Part::Two) abs_err += (o.estimate - config.lambda_true).cwiseAbs();
    for (auto& h : report.hypotheses) {
      const auto k = static_cast<Eigen::Index>(h.parameter);
      const WaldResult w = wald_test(o.estimate(k), o.std_error(k), h.null_value);
      if (w.p_value < config.alpha) ++h.rejections;
    }
  }
  if (report.successful_reps == 0 ||
      static_cast<double>(report.failed_reps) > config.max_failure_rate * static_cast<double>(reps)) {
    std::string msg = "simulation aborted: " + std::to_string(report.failed_reps) + " of " +
                      std::to_string(reps) + " replications failed";
    if (!report.failure_messages.empty()) msg += " (" + report.failure_messages.front() + ")";
    throw EstimationError(msg);
  }
  const auto ok = static_cast<double>(report.successful_reps);
  report.mean_estimate /= ok;
  if (config.part == Part::Two) report.mean_abs_error = abs_err / ok;
  for (auto& h : report.hypotheses) h.rate = static_cast<double>(h.rejections) / ok;
  return report;
}

SimReport run_part1(const SimConfig& config) {
  SimConfig c = config;
  c.part = Part::One;
  return run(c);
}

SimReport run_part2(const SimConfig& config) {
  SimConfig c = config;
  c.part = Part::Two;
  return run(c);
}

}  // namespace mmchain::sim
