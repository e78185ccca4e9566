#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mmchain/inference.hpp"

namespace mmchain::sim {

using Rng = std::mt19937_64;

/// Homogeneous chain with zero-based states; S_0 = init_state.
std::vector<int> simulate_homog_chain(const Eigen::MatrixXd& transition, std::size_t n,
                                      int init_state, Rng& rng);

/// Softmax generator: the score of target state c after lag state i with
/// covariate row x is lag_effects(i, c) + slopes.row(c) . x.
struct LogitGenerator {
  Eigen::MatrixXd lag_effects;  // m x m
  Eigen::MatrixXd slopes;       // m x d

  int states() const { return static_cast<int>(lag_effects.rows()); }
  Eigen::VectorXd distribution(int lag_state, const Eigen::VectorXd& x) const;
};

/// S_t is drawn from generator(S_{t-1}, x row t-1). `x` needs n rows.
std::vector<int> simulate_nonhomog_chain(const LogitGenerator& generator, const Eigen::MatrixXd& x,
                                         std::size_t n, int init_state, Rng& rng);

/// Draws an index from a probability vector.
int draw_state(const Eigen::VectorXd& probs, Rng& rng);

/// Rows drawn independently from a flat Dirichlet.
Eigen::MatrixXd random_transition_matrix(int states, Rng& rng);

/// Stream for replication `rep` (rep = -1 is the study-level stream).
Rng make_rng(std::uint64_t seed, std::int64_t rep);

enum class Part { One = 1, Two = 2 };

struct SimConfig {
  Part part = Part::One;
  int states = 2;
  std::size_t n_obs = 100;
  std::size_t n_reps = 1000;
  std::uint64_t seed = 42;
  double alpha = 0.05;
  /// Part two: true weights of equation 1 (persistent component first).
  Eigen::VectorXd lambda_true = Eigen::Vector2d(0.8, 0.2);
  /// Part one: own-state bonus added to the generator's lag effects.
  double persistence = 1.0;
  unsigned threads = 1;
  VarianceMethod variance = VarianceMethod::Observed;
  /// The study aborts when more than this share of replications fails.
  double max_failure_rate = 0.05;
};

/// Throws InvalidArgument for an invalid configuration.
void validate(const SimConfig& config);

struct HypothesisRate {
  std::string label;     // e.g. "H0: lambda11 = 0"
  std::string kind;      // "power" or "dimension"
  std::size_t parameter = 0;  // zero-based weight index in equation 1
  double null_value = 0.0;
  std::size_t rejections = 0;
  double rate = 0.0;
};

struct RepOutcome {
  bool ok = false;
  std::string error;
  Eigen::VectorXd estimate;
  Eigen::VectorXd std_error;
};

struct SimReport {
  SimConfig config;
  std::vector<HypothesisRate> hypotheses;
  std::size_t successful_reps = 0;
  std::size_t failed_reps = 0;
  std::vector<std::string> failure_messages;  // first few, in replication order
  Eigen::VectorXd mean_estimate;
  Eigen::VectorXd mean_abs_error;  // part two only
  /// Study-level generator draws, recorded for reproducibility.
  std::vector<LogitGenerator> generators;
  Eigen::MatrixXd homogeneous_matrix;  // part one only
  /// Part one: the homogeneous chain, simulated once per study.
  std::vector<int> homogeneous_chain;
};

/// Study-level draws (generators, homogeneous chain) without replications.
SimReport prepare_study(const SimConfig& config);

/// Test power and dimension of the Wald tests when a non-homogeneous chain
/// is mixed with an unrelated homogeneous one.
SimReport run_part1(const SimConfig& config);

/// Recovery of assigned weights when both components are non-homogeneous.
SimReport run_part2(const SimConfig& config);

SimReport run(const SimConfig& config);

/// One replication, exposed for tests and benchmarks.
RepOutcome run_replication(const SimConfig& config, const SimReport& study, std::size_t rep);

}  // namespace mmchain::sim
