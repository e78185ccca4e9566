#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mmchain {

/// s aligned categorical sequences of common length n.
///
/// States are stored zero-based (0..m_j-1). File formats and printed
/// reports use one-based labels; convert at the boundary with
/// from_one_based() / the CSV helpers.
///
/// Invariants: n >= 2, every code of column j lies in [0, m_j), and every
/// state of column j is observed at least once.
class Panel {
 public:
  Panel(std::vector<std::vector<int>> columns, std::vector<int> alphabet_sizes,
        std::vector<std::string> time_index = {});

  /// Builds a panel from one-based labels; m_j is the largest label seen.
  static Panel from_one_based(const std::vector<std::vector<int>>& columns);

  std::size_t num_chains() const { return columns_.size(); }
  std::size_t length() const { return columns_.front().size(); }
  int states(std::size_t chain) const { return alphabet_sizes_[chain]; }
  const std::vector<int>& alphabet_sizes() const { return alphabet_sizes_; }

  int at(std::size_t chain, std::size_t t) const { return columns_[chain][t]; }
  std::span<const int> column(std::size_t chain) const { return columns_[chain]; }

  const std::vector<std::string>& time_index() const { return time_index_; }

 private:
  std::vector<std::vector<int>> columns_;
  std::vector<int> alphabet_sizes_;
  std::vector<std::string> time_index_;
};

/// n x d matrix of real-valued exogenous covariates.
class CovariateMatrix {
 public:
  CovariateMatrix() = default;
  CovariateMatrix(Eigen::MatrixXd values, std::vector<std::string> names);

  Eigen::Index rows() const { return values_.rows(); }
  Eigen::Index cols() const { return values_.cols(); }
  const Eigen::MatrixXd& values() const { return values_; }
  const std::vector<std::string>& names() const { return names_; }
  bool empty() const { return values_.cols() == 0; }

 private:
  Eigen::MatrixXd values_;
  std::vector<std::string> names_;
};

struct EncodedPanel {
  Panel panel;
  /// labels[j][c] is the original label encoded as state c of column j.
  std::vector<std::vector<std::string>> labels;
};

/// Maps arbitrary labels to states in first-appearance order. Rejects
/// ragged input and constant columns.
EncodedPanel encode_sequences(const std::vector<std::vector<std::string>>& raw);

/// Inverse of encode_sequences for a single column.
std::vector<std::string> decode_sequence(const EncodedPanel& encoded,
                                         std::size_t chain);

/// Transition counts from chain `from_chain` at t-1 to chain `to_chain` at t.
/// counts(i1, i0): rows index the source state, columns the destination.
struct FrequencyMatrix {
  Eigen::MatrixXi counts;
  std::size_t from_chain = 0;
  std::size_t to_chain = 0;

  long total() const { return counts.cast<long>().sum(); }
};

/// Row-stochastic matrix; probs(i1, i0) = P(to = i0 | from = i1).
struct TransitionMatrix {
  Eigen::MatrixXd probs;
  std::size_t from_chain = 0;
  std::size_t to_chain = 0;

  double operator()(Eigen::Index from_state, Eigen::Index to_state) const {
    return probs(from_state, to_state);
  }
};

FrequencyMatrix count_transitions(const Panel& panel, std::size_t from_chain,
                                  std::size_t to_chain);

/// Zero-count rows become uniform rows 1/m.
TransitionMatrix row_normalize(const FrequencyMatrix& freq);

/// Empirical transition matrix for every (equation j, source k) pair,
/// indexed [j][k].
std::vector<std::vector<TransitionMatrix>> transition_grid(const Panel& panel);

/// Relative state frequencies of one chain over t = 1..n.
Eigen::VectorXd empirical_distribution(const Panel& panel, std::size_t chain);

}  // namespace mmchain
