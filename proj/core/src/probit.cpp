#include "mmchain/probit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <string>

#include "mmchain/error.hpp"
#include "mmchain/stats.hpp"

namespace mmchain {
namespace {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

double log_normal_pdf(double x) {
  return -0.5 * x * x - 0.5 * std::log(2.0 * std::numbers::pi);
}

// Design of one conditioning pattern: row c = (1, P^(j1)(c|i_1), ..., P^(js)(c|i_s)).
Matrix pattern_design(const std::vector<TransitionMatrix>& row, std::span<const int> lagged) {
  const Eigen::Index m = row.front().probs.cols();
  const auto s = static_cast<Eigen::Index>(row.size());
  Matrix z(m, s + 1);
  z.col(0).setOnes();
  for (Eigen::Index k = 0; k < s; ++k) {
    const auto& tm = row[static_cast<std::size_t>(k)].probs;
    const int state = lagged[static_cast<std::size_t>(k)];
    if (state < 0 || state >= tm.rows()) throw InvalidArgument("probit: invalid lagged state");
    z.col(k + 1) = tm.row(state).transpose();
  }
  return z;
}

// log P(target) and its gradient in eta for one pattern.
double pattern_logprob(const Matrix& z, const Vector& eta, int target, Vector* grad) {
  const Vector a = z * eta;
  const Eigen::Index m = a.size();
  Vector logphi(m);
  for (Eigen::Index c = 0; c < m; ++c) logphi(c) = log_normal_cdf(a(c));
  const double mx = logphi.maxCoeff();
  const double lse = mx + std::log((logphi.array() - mx).exp().sum());
  if (grad) {
    // d/d eta log Phi(a_c) = (phi / Phi)(a_c) * z_c
    Vector weights = (logphi.array() - lse).exp().matrix();
    Vector mills(m);
    for (Eigen::Index c = 0; c < m; ++c) mills(c) = std::exp(log_normal_pdf(a(c)) - logphi(c));
    *grad = mills(target) * z.row(target).transpose() -
            z.transpose() * (weights.array() * mills.array()).matrix();
  }
  return logphi(target) - lse;
}

struct PatternCounts {
  std::vector<std::vector<int>> lagged;
  std::vector<int> target;
  std::vector<double> count;
};

PatternCounts count_patterns(const Panel& panel, std::size_t j) {
  std::map<std::vector<int>, long> counts;
  const std::size_t s = panel.num_chains();
  std::vector<int> key(s + 1);
  for (std::size_t t = 1; t < panel.length(); ++t) {
    for (std::size_t k = 0; k < s; ++k) key[k] = panel.at(k, t - 1);
    key[s] = panel.at(j, t);
    ++counts[key];
  }
  PatternCounts pc;
  for (const auto& [k, n] : counts) {
    pc.lagged.emplace_back(k.begin(), k.end() - 1);
    pc.target.push_back(k.back());
    pc.count.push_back(static_cast<double>(n));
  }
  return pc;
}

void check_model(const ProbitModel& model, std::size_t j, std::span<const int> lagged) {
  if (j >= model.etas.size()) throw InvalidArgument("probit: equation out of range");
  if (lagged.size() != model.transmats[j].size()) {
    throw InvalidArgument("probit: one lagged state per chain is required");
  }
}

}  // namespace

double probit_prob(const ProbitModel& model, std::size_t j, std::span<const int> lagged, int target) {
  const Vector dist = probit_distribution(model, j, lagged);
  if (target < 0 || target >= dist.size()) throw InvalidArgument("probit: invalid target state");
  return dist(target);
}

Vector probit_distribution(const ProbitModel& model, std::size_t j, std::span<const int> lagged) {
  check_model(model, j, lagged);
  const Matrix z = pattern_design(model.transmats[j], lagged);
  Vector out(z.rows());
  for (Eigen::Index c = 0; c < z.rows(); ++c) {
    out(c) = std::exp(pattern_logprob(z, model.etas[j], static_cast<int>(c), nullptr));
  }
  return out;
}

Vector probit_loglik(const Panel& panel, const ProbitModel& model) {
  const std::size_t s = panel.num_chains();
  Vector ll(static_cast<Eigen::Index>(s));
  for (std::size_t j = 0; j < s; ++j) {
    const PatternCounts pc = count_patterns(panel, j);
    double sum = 0.0;
    for (std::size_t p = 0; p < pc.count.size(); ++p) {
      const Matrix z = pattern_design(model.transmats[j], pc.lagged[p]);
      sum += pc.count[p] * pattern_logprob(z, model.etas[j], pc.target[p], nullptr);
    }
    ll(static_cast<Eigen::Index>(j)) = sum;
  }
  return ll;
}

ProbitModel estimate_mtd_probit(const Panel& panel, const Vector& initial,
                                const ProbitOptions& options) {
  return estimate_mtd_probit_with(panel, transition_grid(panel), initial, options);
}

ProbitModel estimate_mtd_probit_with(const Panel& panel,
                                     std::vector<std::vector<TransitionMatrix>> transmats,
                                     const Vector& initial, const ProbitOptions& options) {
  const std::size_t s = panel.num_chains();
  const auto ss = static_cast<Eigen::Index>(s);
  if (initial.size() != ss + 1) {
    throw InvalidArgument("probit: initial values need s + 1 = " + std::to_string(s + 1) +
                          " entries, got " + std::to_string(initial.size()));
  }
  if (!initial.allFinite()) throw InvalidArgument("probit: initial values must be finite");
  if (transmats.size() != s) throw InvalidArgument("probit: transition grid must be s x s");

  ProbitModel model;
  model.transmats = std::move(transmats);
  model.fix_intercept = options.fix_intercept;
  model.loglik.resize(ss);
  const Eigen::Index offset = options.fix_intercept ? 1 : 0;

  for (std::size_t j = 0; j < s; ++j) {
    const PatternCounts pc = count_patterns(panel, j);
    std::vector<Matrix> designs;
    for (const auto& lagged : pc.lagged) designs.push_back(pattern_design(model.transmats[j], lagged));

    auto expand = [&](const Vector& theta) {
      Vector eta = Vector::Zero(ss + 1);
      eta.tail(ss + 1 - offset) = theta;
      return eta;
    };
    optim::Objective obj;
    obj.value = [&](const Vector& theta) {
      const Vector eta = expand(theta);
      double sum = 0.0;
      for (std::size_t p = 0; p < designs.size(); ++p) {
        sum += pc.count[p] * pattern_logprob(designs[p], eta, pc.target[p], nullptr);
      }
      return sum;
    };
    obj.gradient = [&](const Vector& theta) {
      const Vector eta = expand(theta);
      Vector total = Vector::Zero(ss + 1);
      Vector g;
      for (std::size_t p = 0; p < designs.size(); ++p) {
        pattern_logprob(designs[p], eta, pc.target[p], &g);
        total += pc.count[p] * g;
      }
      return Vector(total.tail(ss + 1 - offset));
    };

    optim::Options opt = options.optimizer;
    opt.compute_hessian = true;
    const Vector start = initial.tail(ss + 1 - offset);
    optim::Result r = optim::maximize_unconstrained(obj, start, options.method, opt);
    if (!options.fix_intercept) {
      // The free intercept can drift into the lower tail of Phi, where the
      // likelihood flattens into a plateau. Restart from the fit with the
      // intercept held at zero and keep the better of the two.
      optim::Objective pinned;
      pinned.value = [&](const Vector& slopes) {
        Vector theta(ss + 1);
        theta << 0.0, slopes;
        return obj.value(theta);
      };
      pinned.gradient = [&](const Vector& slopes) { return Vector(obj.gradient((Vector(ss + 1) << 0.0, slopes).finished()).tail(ss)); };
      optim::Options quiet = opt;
      quiet.compute_hessian = false;
      const optim::Result p = optim::maximize_unconstrained(pinned, initial.tail(ss), options.method, quiet);
      Vector second(ss + 1);
      second << 0.0, p.argmax;
      optim::Result alt = optim::maximize_unconstrained(obj, second, options.method, opt);
      if (alt.value > r.value) r = std::move(alt);
    }

    model.etas.push_back(expand(r.argmax));
    model.loglik(static_cast<Eigen::Index>(j)) = r.value;
    model.hessians.push_back(*r.hessian);
    model.converged.push_back(r.converged);

    std::vector<std::string> names;
    for (Eigen::Index k = offset; k <= ss; ++k) names.push_back("eta" + std::to_string(k));
    EquationReport rep = make_equation_report(j + 1, names, r.argmax, *r.hessian, r.value,
                                              options.variance);
    if (!r.converged) {
      rep.warnings.push_back("optimizer did not converge (" + std::string(optim::method_name(options.method)) +
                             "): " + r.message);
    }
    if (!options.fix_intercept && r.argmax(0) < -30.0) {
      rep.warnings.push_back(
          "intercept is diverging to -infinity: the likelihood is approaching its logit limit and "
          "has no finite maximizer; consider --fix-intercept");
    }
    model.report.equations.push_back(std::move(rep));
  }
  return model;
}

}  // namespace mmchain
