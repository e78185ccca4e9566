#include "mmchain/panel.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

#include "mmchain/error.hpp"

namespace mmchain {

Panel::Panel(std::vector<std::vector<int>> columns,
             std::vector<int> alphabet_sizes,
             std::vector<std::string> time_index)
    : columns_(std::move(columns)),
      alphabet_sizes_(std::move(alphabet_sizes)),
      time_index_(std::move(time_index)) {
  if (columns_.empty()) throw DataError("panel has no sequences");
  if (alphabet_sizes_.size() != columns_.size()) {
    throw DataError("panel: one alphabet size per sequence is required");
  }
  const std::size_t n = columns_.front().size();
  if (n < 2) throw DataError("panel: sequences need at least 2 observations");
  if (!time_index_.empty() && time_index_.size() != n) {
    throw DataError("panel: time index length differs from sequence length");
  }
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    const auto& col = columns_[j];
    if (col.size() != n) {
      throw DataError("panel: sequence " + std::to_string(j + 1) +
                      " has length " + std::to_string(col.size()) +
                      ", expected " + std::to_string(n));
    }
    const int m = alphabet_sizes_[j];
    if (m < 1) throw DataError("panel: alphabet sizes must be positive");
    std::vector<bool> seen(static_cast<std::size_t>(m), false);
    for (int s : col) {
      if (s < 0 || s >= m) {
        throw DataError("panel: sequence " + std::to_string(j + 1) +
                        " has label " + std::to_string(s + 1) +
                        " outside 1.." + std::to_string(m));
      }
      seen[static_cast<std::size_t>(s)] = true;
    }
    for (int s = 0; s < m; ++s) {
      if (!seen[static_cast<std::size_t>(s)]) {
        throw DataError("panel: state " + std::to_string(s + 1) +
                        " never occurs in sequence " + std::to_string(j + 1));
      }
    }
  }
}

Panel Panel::from_one_based(const std::vector<std::vector<int>>& columns) {
  std::vector<std::vector<int>> zero_based;
  std::vector<int> sizes;
  zero_based.reserve(columns.size());
  for (const auto& col : columns) {
    std::vector<int> z(col.size());
    int m = 0;
    for (std::size_t t = 0; t < col.size(); ++t) {
      if (col[t] < 1) throw DataError("panel: labels must be >= 1");
      z[t] = col[t] - 1;
      m = std::max(m, col[t]);
    }
    zero_based.push_back(std::move(z));
    sizes.push_back(m);
  }
  return Panel(std::move(zero_based), std::move(sizes));
}

CovariateMatrix::CovariateMatrix(Eigen::MatrixXd values,
                                 std::vector<std::string> names)
    : values_(std::move(values)), names_(std::move(names)) {
  if (names_.empty()) {
    for (Eigen::Index c = 0; c < values_.cols(); ++c) {
      names_.push_back("x" + std::to_string(c + 1));
    }
  }
  if (static_cast<Eigen::Index>(names_.size()) != values_.cols()) {
    throw DataError("covariates: one name per column is required");
  }
  if (!values_.allFinite()) throw DataError("covariates: non-finite entry");
}

EncodedPanel encode_sequences(
    const std::vector<std::vector<std::string>>& raw) {
  if (raw.empty()) throw DataError("encode: no sequences");
  const std::size_t n = raw.front().size();
  std::vector<std::vector<int>> codes;
  std::vector<std::vector<std::string>> labels;
  std::vector<int> sizes;
  for (std::size_t j = 0; j < raw.size(); ++j) {
    if (raw[j].size() != n) {
      throw DataError("encode: ragged columns (column " +
                      std::to_string(j + 1) + " has length " +
                      std::to_string(raw[j].size()) + ", expected " +
                      std::to_string(n) + ")");
    }
    std::unordered_map<std::string, int> index;
    std::vector<std::string> order;
    std::vector<int> col;
    col.reserve(n);
    for (const auto& label : raw[j]) {
      auto [it, inserted] =
          index.try_emplace(label, static_cast<int>(order.size()));
      if (inserted) order.push_back(label);
      col.push_back(it->second);
    }
    if (order.size() < 2) {
      throw DataError("encode: column " + std::to_string(j + 1) +
                      " is constant; no transition structure");
    }
    sizes.push_back(static_cast<int>(order.size()));
    codes.push_back(std::move(col));
    labels.push_back(std::move(order));
  }
  return {Panel(std::move(codes), std::move(sizes)), std::move(labels)};
}

std::vector<std::string> decode_sequence(const EncodedPanel& encoded,
                                         std::size_t chain) {
  const auto col = encoded.panel.column(chain);
  std::vector<std::string> out;
  out.reserve(col.size());
  for (int s : col) out.push_back(encoded.labels[chain][static_cast<std::size_t>(s)]);
  return out;
}

FrequencyMatrix count_transitions(const Panel& panel, std::size_t from_chain,
                                  std::size_t to_chain) {
  if (from_chain >= panel.num_chains() || to_chain >= panel.num_chains()) {
    throw InvalidArgument("count_transitions: chain index out of range");
  }
  FrequencyMatrix freq;
  freq.from_chain = from_chain;
  freq.to_chain = to_chain;
  freq.counts = Eigen::MatrixXi::Zero(panel.states(from_chain),
                                      panel.states(to_chain));
  for (std::size_t t = 1; t < panel.length(); ++t) {
    ++freq.counts(panel.at(from_chain, t - 1), panel.at(to_chain, t));
  }
  return freq;
}

TransitionMatrix row_normalize(const FrequencyMatrix& freq) {
  TransitionMatrix tm;
  tm.from_chain = freq.from_chain;
  tm.to_chain = freq.to_chain;
  const Eigen::Index m = freq.counts.cols();
  tm.probs.resize(freq.counts.rows(), m);
  for (Eigen::Index r = 0; r < freq.counts.rows(); ++r) {
    const double total = freq.counts.row(r).cast<double>().sum();
    if (total == 0.0) {
      tm.probs.row(r).setConstant(1.0 / static_cast<double>(m));
    } else {
      tm.probs.row(r) = freq.counts.row(r).cast<double>() / total;
    }
  }
  return tm;
}

std::vector<std::vector<TransitionMatrix>> transition_grid(const Panel& panel) {
  const std::size_t s = panel.num_chains();
  std::vector<std::vector<TransitionMatrix>> grid(s);
  for (std::size_t j = 0; j < s; ++j) {
    grid[j].reserve(s);
    for (std::size_t k = 0; k < s; ++k) {
      grid[j].push_back(row_normalize(count_transitions(panel, k, j)));
    }
  }
  return grid;
}

Eigen::VectorXd empirical_distribution(const Panel& panel, std::size_t chain) {
  if (chain >= panel.num_chains()) {
    throw InvalidArgument("empirical_distribution: chain index out of range");
  }
  Eigen::VectorXd dist = Eigen::VectorXd::Zero(panel.states(chain));
  for (int s : panel.column(chain)) dist(s) += 1.0;
  return dist / static_cast<double>(panel.length());
}

}  // namespace mmchain
