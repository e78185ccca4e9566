// mmchain: estimate, simulate and inspect multivariate Markov chain mixtures.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mmchain/csv.hpp"
#include "mmchain/error.hpp"
#include "mmchain/gmmc.hpp"
#include "mmchain/inference.hpp"
#include "mmchain/mtd.hpp"
#include "mmchain/probit.hpp"
#include "mmchain/serialize.hpp"
#include "mmchain/simulation.hpp"
#include "mmchain/transforms.hpp"

namespace {

using namespace mmchain;

enum Exit { kOk = 0, kNotConverged = 1, kUsage = 2, kData = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(std::string(what) + ": '" + item + "' is not a number");
    }
  }
  if (out.empty()) throw UsageError(std::string(what) + ": expected a comma-separated list");
  return out;
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void print_warnings(const FitReport& report) {
  for (const auto& eq : report.equations) {
    for (const auto& w : eq.warnings) {
      std::cerr << "warning: equation " << eq.equation << ": " << w << "\n";
    }
  }
}

// ---------------------------------------------------------------- estimate

struct EstimateArgs {
  std::string model;
  std::string y;
  std::string x;
  int x_lag = 1;
  std::string initial;
  double delta = 0.1;
  double delta_stop = 1e-4;
  bool constrained = true;
  bool minmax = false;
  std::string nummethod = "bfgs";
  bool fix_intercept = false;
  bool header = false;
  bool time_index = false;
  std::string json;
  std::string save_fit;
  std::string smoothed;
  std::size_t smooth_equation = 1;
  std::size_t smooth_source = 1;
  std::size_t window = 5;
  std::string variance = "observed";
};

int run_estimate(const EstimateArgs& a) {
  const VarianceMethod variance = parse_variance_method(a.variance);
  if (a.model == "gmmc" && a.x.empty()) throw UsageError("--x is required for --model gmmc");
  if (a.model != "gmmc" && !a.x.empty()) throw UsageError("--x is only used by --model gmmc");
  if (!a.save_fit.empty() && a.model != "gmmc") throw UsageError("--save-fit needs --model gmmc");
  if (!a.smoothed.empty() && a.model != "gmmc") throw UsageError("--smoothed needs --model gmmc");

  const EncodedPanel enc = csv::read_panel(a.y, {a.header, a.time_index});
  const Panel& panel = enc.panel;
  FitReport report;
  bool converged = true;

  if (a.model == "mtd") {
    MtdOptions o;
    o.delta = a.delta;
    o.delta_stop = a.delta_stop;
    o.constrained = a.constrained;
    o.variance = variance;
    const MtdModel m = estimate_mtd(panel, o);
    report = m.report;
    std::cout << format_report(report);
    if (a.minmax) {
      const auto w = estimate_lambda_minmax(panel);
      for (std::size_t j = 0; j < w.size(); ++j) {
        std::cout << "min-max weights, equation " << j + 1 << ":";
        for (Eigen::Index k = 0; k < w[j].size(); ++k) std::cout << " " << io::format_double(w[j](k));
        std::cout << "\n";
      }
    }
  } else if (a.model == "mtd-probit") {
    const std::size_t s = panel.num_chains();
    Eigen::VectorXd init = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(s + 1));
    if (!a.initial.empty()) init = to_vector(parse_list(a.initial, "--initial"));
    if (init.size() != static_cast<Eigen::Index>(s + 1)) {
      throw UsageError("--initial needs " + std::to_string(s + 1) + " values for mtd-probit");
    }
    ProbitOptions o;
    o.method = optim::parse_method(a.nummethod);
    o.fix_intercept = a.fix_intercept;
    o.variance = variance;
    const ProbitModel m = estimate_mtd_probit(panel, init, o);
    report = m.report;
    for (bool c : m.converged) converged = converged && c;
    std::cout << format_report(report);
  } else if (a.model == "gmmc") {
    const CovariateMatrix cov = csv::read_covariates(a.x);
    std::optional<Eigen::VectorXd> init;
    if (!a.initial.empty()) {
      init = to_vector(parse_list(a.initial, "--initial"));
      if (init->size() != static_cast<Eigen::Index>(panel.num_chains())) {
        throw UsageError("--initial needs one value per chain");
      }
    }
    GmmcOptions o;
    o.x_lag = a.x_lag;
    o.variance = variance;
    const GmmcFit fit = estimate_gmmc(panel, cov, init, o);
    report = fit.report;
    converged = fit.converged();
    std::cout << format_report(report);
    if (!a.save_fit.empty()) write_text(a.save_fit, io::gmmc_fit_to_json(fit));
    if (!a.smoothed.empty()) {
      if (a.smooth_equation < 1 || a.smooth_equation > panel.num_chains() || a.smooth_source < 1 ||
          a.smooth_source > panel.num_chains()) {
        throw UsageError("--smooth-equation and --smooth-source must name existing chains");
      }
      const Eigen::MatrixXd path = smoothed_conditional_probs(
          fit, panel, cov, a.smooth_equation - 1, a.smooth_source - 1, a.window);
      std::string out;
      for (Eigen::Index c = 0; c < path.cols(); ++c) {
        out += (c ? ",state_" : "state_") + std::to_string(c + 1);
      }
      out += "\n";
      for (Eigen::Index r = 0; r < path.rows(); ++r) {
        for (Eigen::Index c = 0; c < path.cols(); ++c) {
          out += (c ? "," : "") + io::format_double(path(r, c));
        }
        out += "\n";
      }
      write_text(a.smoothed, out);
    }
  } else {
    throw UsageError("unknown model '" + a.model + "'");
  }

  print_warnings(report);
  if (!a.json.empty()) write_text(a.json, io::fit_report_to_json(report, a.model));
  if (!converged) {
    std::cerr << "error: estimation did not converge\n";
    return kNotConverged;
  }
  return kOk;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  int part = 1;
  int states = 2;
  std::size_t n = 100;
  std::size_t reps = 1000;
  std::uint64_t seed = 42;
  double alpha = 0.05;
  std::string lambda = "0.8,0.2";
  double persistence = 1.0;
  unsigned threads = 1;
  std::string json;
  std::string csv;
  std::string variance = "observed";
};

int run_simulate(const SimulateArgs& a) {
  sim::SimConfig c;
  c.part = a.part == 1 ? sim::Part::One : sim::Part::Two;
  if (a.part != 1 && a.part != 2) throw UsageError("--part must be 1 or 2");
  c.states = a.states;
  c.n_obs = a.n;
  c.n_reps = a.reps;
  c.seed = a.seed;
  c.alpha = a.alpha;
  c.lambda_true = to_vector(parse_list(a.lambda, "--lambda"));
  c.persistence = a.persistence;
  c.threads = a.threads;
  c.variance = parse_variance_method(a.variance);
  sim::validate(c);

  const sim::SimReport r = sim::run(c);
  std::printf("%-22s %-10s %8s %10s\n", "hypothesis", "kind", "n_obs", "rate");
  for (const auto& h : r.hypotheses) {
    std::printf("%-22s %-10s %8zu %10.4f\n", h.label.c_str(), h.kind.c_str(), c.n_obs, h.rate);
  }
  std::printf("successful replications: %zu, failed: %zu\n", r.successful_reps, r.failed_reps);
  if (c.part == sim::Part::Two) {
    std::printf("mean |lambda_hat - lambda|: %.6f %.6f\n", r.mean_abs_error(0), r.mean_abs_error(1));
  }
  if (!a.json.empty()) write_text(a.json, io::sim_report_to_json(r));
  if (!a.csv.empty()) write_text(a.csv, io::sim_report_to_csv(r));
  return kOk;
}

// ---------------------------------------------------------------- transmat

struct TransmatArgs {
  std::string fit;
  std::string x;
  std::size_t equation = 1;
  std::string output = "-";
};

int run_transmat(const TransmatArgs& a) {
  const GmmcFit fit = io::gmmc_fit_from_json(read_text(a.fit));
  const Eigen::VectorXd x = to_vector(parse_list(a.x, "--x"));
  if (x.size() != static_cast<Eigen::Index>(fit.covariate_names.size())) {
    throw UsageError("--x needs " + std::to_string(fit.covariate_names.size()) +
                     " value(s) for this fit");
  }
  if (a.equation < 1 || a.equation > fit.alphabet_sizes.size()) {
    throw UsageError("--equation out of range");
  }
  const Eigen::MatrixXd t = conditional_transition_matrix(fit, a.equation - 1, x);
  write_text(a.output, io::edges_to_csv(transition_edges(t)));
  return kOk;
}

// ---------------------------------------------------------------- discretize

struct DiscretizeArgs {
  std::string input;
  std::string column;
  bool header = true;
  bool returns = false;
  double lower = 0.25;
  double upper = 0.75;
  std::string output = "-";
};

int run_discretize(const DiscretizeArgs& a) {
  if (!(a.lower < a.upper)) throw UsageError("--lower must be below --upper");
  const csv::Table table = csv::read_file(a.input, a.header);
  std::size_t col = table.header.size();
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (table.header[i] == a.column) col = i;
  }
  if (col == table.header.size()) {
    try {
      const std::size_t idx = std::stoul(a.column);
      if (idx >= 1 && idx <= table.header.size()) col = idx - 1;
    } catch (const std::exception&) {
    }
  }
  if (col == table.header.size()) throw UsageError("column '" + a.column + "' not found in " + a.input);

  std::vector<double> values;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const std::string& cell = table.rows[r][col];
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(cell, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != cell.size() || used == 0) {
      throw DataError(a.input + ": row " + std::to_string(r + 1) + ": '" + cell + "' is not numeric");
    }
    values.push_back(v);
  }
  if (std::set<double>(values.begin(), values.end()).size() <= 3) {
    throw DataError("column '" + table.header[col] +
                    "' has at most three distinct values; it already looks discretized");
  }
  if (a.returns) values = log_returns(values);
  const std::vector<int> states = discretize_quantiles(values, a.lower, a.upper);
  std::string out = csv::quote_if_needed(table.header[col]) + "\n";
  for (int s : states) out += std::to_string(s) + "\n";
  write_text(a.output, out);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multivariate Markov chain mixture models: estimation, simulation, transition networks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "mmchain 0.3.0");

  EstimateArgs est;
  auto* e = app.add_subcommand("estimate", "Fit a model to a panel of categorical sequences");
  e->add_option("--model", est.model, "mtd, mtd-probit or gmmc")
      ->required()
      ->check(CLI::IsMember({"mtd", "mtd-probit", "gmmc"}));
  e->add_option("--y", est.y, "Panel CSV, one column per sequence")->required();
  e->add_option("--x", est.x, "Covariate CSV with a header row (gmmc)");
  e->add_option("--x-lag", est.x_lag, "Covariate row t - L enters the row for time t")
      ->check(CLI::NonNegativeNumber);
  e->add_option("--initial", est.initial, "Comma-separated starting values");
  e->add_option("--delta", est.delta, "Initial reallocation step (mtd)");
  e->add_option("--delta-stop", est.delta_stop, "Stop once the step falls below this (mtd)");
  e->add_option("--constrained", est.constrained, "Keep weights non-negative (mtd)");
  e->add_flag("--minmax", est.minmax, "Also print the min-max weight estimates (mtd)");
  e->add_option("--nummethod", est.nummethod, "Optimizer for mtd-probit: bfgs, newton, nelder-mead");
  e->add_flag("--fix-intercept", est.fix_intercept, "Hold eta_0 at zero (mtd-probit)");
  e->add_flag("--header", est.header, "The panel CSV has a header row");
  e->add_flag("--time-index", est.time_index, "The first panel column is a time label");
  e->add_option("--json", est.json, "Write the fit report as JSON ('-' for stdout)");
  e->add_option("--save-fit", est.save_fit, "Write the full gmmc fit as JSON");
  e->add_option("--smoothed", est.smoothed, "Write moving-average fitted probability paths (gmmc)");
  e->add_option("--smooth-equation", est.smooth_equation, "Equation for --smoothed (one-based)");
  e->add_option("--smooth-source", est.smooth_source, "Source chain for --smoothed (one-based)");
  e->add_option("--window", est.window, "Moving-average window for --smoothed");
  e->add_option("--variance", est.variance, "observed or simplex-tangent");

  SimulateArgs simargs;
  auto* s = app.add_subcommand("simulate", "Monte Carlo study of Wald test power and dimension");
  s->add_option("--part", simargs.part, "1: non-homogeneous vs homogeneous chain; 2: weight recovery");
  s->add_option("--states", simargs.states, "Number of states");
  s->add_option("--n", simargs.n, "Observations per replication");
  s->add_option("--reps", simargs.reps, "Replications");
  s->add_option("--seed", simargs.seed, "Random seed")->envname("MMCHAIN_SEED");
  s->add_option("--alpha", simargs.alpha, "Significance level");
  s->add_option("--lambda", simargs.lambda, "True weights of equation 1 (part 2)");
  s->add_option("--persistence", simargs.persistence, "Own-state bonus of the part 1 generator");
  s->add_option("--threads", simargs.threads, "Worker threads")->check(CLI::PositiveNumber);
  s->add_option("--json", simargs.json, "Write the report as JSON");
  s->add_option("--csv", simargs.csv, "Write hypothesis,kind,n_obs,rejection_rate rows");
  s->add_option("--variance", simargs.variance, "observed or simplex-tangent");

  TransmatArgs tm;
  auto* t = app.add_subcommand("transmat", "Transition matrix of a saved gmmc fit at given covariates");
  t->add_option("--fit", tm.fit, "Fit JSON written by estimate --save-fit")->required();
  t->add_option("--x", tm.x, "Covariate values, comma-separated")->required();
  t->add_option("--equation", tm.equation, "Equation (one-based)");
  t->add_option("--output", tm.output, "Edge-list CSV path ('-' for stdout)");

  DiscretizeArgs dz;
  auto* d = app.add_subcommand("discretize", "Three-state quantile discretization of a numeric column");
  d->add_option("--input", dz.input, "Input CSV")->required();
  d->add_option("--column", dz.column, "Column name or one-based index")->required();
  d->add_flag("--no-header{false}", dz.header, "The input has no header row");
  d->add_flag("--returns", dz.returns, "Apply 100 * log returns first");
  d->add_option("--lower", dz.lower, "Lower quantile");
  d->add_option("--upper", dz.upper, "Upper quantile");
  d->add_option("--output", dz.output, "Output CSV path ('-' for stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*e) return run_estimate(est);
    if (*s) return run_simulate(simargs);
    if (*t) return run_transmat(tm);
    if (*d) return run_discretize(dz);
  } catch (const UsageError& err) {
    std::cerr << "usage error: " << err.what() << "\n";
    return kUsage;
  } catch (const InvalidArgument& err) {
    std::cerr << "usage error: " << err.what() << "\n";
    return kUsage;
  } catch (const DataError& err) {
    std::cerr << "data error: " << err.what() << "\n";
    return kData;
  } catch (const EstimationError& err) {
    std::cerr << "estimation error: " << err.what() << "\n";
    return kNotConverged;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kData;
  }
  return kUsage;
}
