#include "mmchain/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

#include <nlohmann/json.hpp>

#include "mmchain/error.hpp"

namespace mmchain::io {
namespace {

using nlohmann::json;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

json vector_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(std::isfinite(v(i)) ? json(v(i)) : json());
  return a;
}

json matrix_json(const Matrix& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vector_json(m.row(i).transpose()));
  return a;
}

double number(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

Vector vector_from(const json& a) {
  Vector v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(a[i]);
  return v;
}

Matrix matrix_from(const json& a) {
  if (a.empty()) return Matrix();
  Matrix m(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(a[0].size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != static_cast<std::size_t>(m.cols())) throw DataError("ragged matrix in fit document");
    for (std::size_t c = 0; c < a[i].size(); ++c) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = number(a[i][c]);
    }
  }
  return m;
}

json equation_report_json(const EquationReport& e) {
  json rows = json::array();
  for (const auto& r : e.rows) {
    const bool se = r.has_std_error();
    rows.push_back({{"name", r.name},
                    {"estimate", r.estimate},
                    {"std_error", se ? json(r.std_error) : json()},
                    {"z", se ? json(r.z) : json()},
                    {"p_value", se ? json(r.p_value) : json()},
                    {"stars", se ? significance_stars(r.p_value) : ""}});
  }
  return {{"equation", e.equation}, {"loglik", e.loglik}, {"parameters", rows}, {"warnings", e.warnings}};
}

EquationReport equation_report_from(const json& j) {
  EquationReport e;
  e.equation = j.at("equation").get<std::size_t>();
  e.loglik = j.at("loglik").get<double>();
  for (const auto& r : j.at("parameters")) {
    ParameterRow row;
    row.name = r.at("name").get<std::string>();
    row.estimate = r.at("estimate").get<double>();
    row.std_error = number(r.at("std_error"));
    row.z = number(r.at("z"));
    row.p_value = number(r.at("p_value"));
    e.rows.push_back(row);
  }
  e.warnings = j.at("warnings").get<std::vector<std::string>>();
  return e;
}

json generator_json(const sim::LogitGenerator& g) {
  return {{"lag_effects", matrix_json(g.lag_effects)}, {"slopes", matrix_json(g.slopes)}};
}

}  // namespace

std::string format_double(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "NA" : (v > 0 ? "Inf" : "-Inf");
  char buf[32];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

std::string gmmc_fit_to_json(const GmmcFit& fit) {
  json eqs = json::array();
  for (std::size_t e = 0; e < fit.equations.size(); ++e) {
    const GmmcEquation& eq = fit.equations[e];
    json subs = json::array();
    for (const auto& m : eq.submodels) {
      subs.push_back({{"lag_states", m.spec.lag_states},
                      {"target_states", m.spec.target_states},
                      {"covariates", m.spec.covariates},
                      {"coefficients", matrix_json(m.coefficients)},
                      {"loglik", m.loglik},
                      {"converged", m.converged},
                      {"separated", m.separated}});
    }
    eqs.push_back({{"equation", eq.index + 1},
                   {"weights", vector_json(eq.weights)},
                   {"loglik", eq.loglik},
                   {"hessian", matrix_json(eq.hessian)},
                   {"converged", eq.converged},
                   {"submodels", subs},
                   {"report", equation_report_json(fit.report.equations.at(e))}});
  }
  json doc = {{"format", "mmchain-gmmc-fit"},
              {"version", kFitFormatVersion},
              {"x_lag", fit.x_lag},
              {"alphabet_sizes", fit.alphabet_sizes},
              {"covariate_names", fit.covariate_names},
              {"variance", std::string(variance_method_name(fit.variance))},
              {"equations", eqs}};
  return doc.dump(2) + "\n";
}

GmmcFit gmmc_fit_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("fit document is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != "mmchain-gmmc-fit") {
      throw DataError("not a GMMC fit document");
    }
    const int version = doc.at("version").get<int>();
    if (version != kFitFormatVersion) {
      throw DataError("unsupported fit document version " + std::to_string(version));
    }
    GmmcFit fit;
    fit.x_lag = doc.at("x_lag").get<int>();
    fit.alphabet_sizes = doc.at("alphabet_sizes").get<std::vector<int>>();
    fit.covariate_names = doc.at("covariate_names").get<std::vector<std::string>>();
    fit.variance = parse_variance_method(doc.at("variance").get<std::string>());
    const std::size_t s = fit.alphabet_sizes.size();
    for (const auto& e : doc.at("equations")) {
      GmmcEquation eq;
      const auto idx = e.at("equation").get<std::size_t>();
      if (idx < 1 || idx > s) throw DataError("equation index out of range in fit document");
      eq.index = idx - 1;
      eq.weights = vector_from(e.at("weights"));
      eq.loglik = e.at("loglik").get<double>();
      eq.hessian = matrix_from(e.at("hessian"));
      eq.converged = e.at("converged").get<bool>();
      if (e.at("submodels").size() != s || static_cast<std::size_t>(eq.weights.size()) != s) {
        throw DataError("fit document needs one weight and one submodel per chain");
      }
      for (std::size_t k = 0; k < s; ++k) {
        const auto& sm = e.at("submodels")[k];
        MnLogitModel m;
        m.spec.lag_states = sm.at("lag_states").get<int>();
        m.spec.target_states = sm.at("target_states").get<int>();
        m.spec.covariates = sm.at("covariates").get<int>();
        m.spec.x_lag = fit.x_lag;
        m.spec.covariate_names = fit.covariate_names;
        m.coefficients = matrix_from(sm.at("coefficients"));
        m.loglik = sm.at("loglik").get<double>();
        m.converged = sm.at("converged").get<bool>();
        m.separated = sm.at("separated").get<bool>();
        if (m.spec.lag_states != fit.alphabet_sizes[k] ||
            m.spec.target_states != fit.alphabet_sizes[eq.index] ||
            m.coefficients.rows() != m.spec.target_states - 1 ||
            m.coefficients.cols() != m.spec.columns() || !m.coefficients.allFinite()) {
          throw DataError("inconsistent submodel in fit document");
        }
        eq.submodels.push_back(std::move(m));
      }
      fit.report.equations.push_back(equation_report_from(e.at("report")));
      fit.equations.push_back(std::move(eq));
    }
    return fit;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed fit document: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw DataError(std::string("malformed fit document: ") + e.what());
  }
}

std::string fit_report_to_json(const FitReport& report, std::string_view model) {
  json eqs = json::array();
  for (const auto& e : report.equations) eqs.push_back(equation_report_json(e));
  json doc = {{"model", std::string(model)}, {"equations", eqs}};
  return doc.dump(2) + "\n";
}

std::string sim_report_to_json(const sim::SimReport& r) {
  const sim::SimConfig& c = r.config;
  json hyp = json::array();
  for (const auto& h : r.hypotheses) {
    hyp.push_back({{"label", h.label},
                   {"kind", h.kind},
                   {"parameter", "lambda1" + std::to_string(h.parameter + 1)},
                   {"null_value", h.null_value},
                   {"rejections", h.rejections},
                   {"rejection_rate", h.rate}});
  }
  json gens = json::array();
  for (const auto& g : r.generators) gens.push_back(generator_json(g));
  json config = {{"part", static_cast<int>(c.part)},
                 {"states", c.states},
                 {"n_obs", c.n_obs},
                 {"n_reps", c.n_reps},
                 {"seed", c.seed},
                 {"alpha", c.alpha},
                 {"variance", std::string(variance_method_name(c.variance))}};
  if (c.part == sim::Part::One) {
    config["persistence"] = c.persistence;
  } else {
    config["lambda_true"] = vector_json(c.lambda_true);
  }
  json doc = {{"config", config},
              {"successful_reps", r.successful_reps},
              {"failed_reps", r.failed_reps},
              {"failure_messages", r.failure_messages},
              {"hypotheses", hyp},
              {"mean_estimate", vector_json(r.mean_estimate)},
              {"generators", gens}};
  if (c.part == sim::Part::One) {
    doc["homogeneous_matrix"] = matrix_json(r.homogeneous_matrix);
  } else {
    doc["mean_abs_error"] = vector_json(r.mean_abs_error);
  }
  return doc.dump(2) + "\n";
}

std::string sim_report_to_csv(const sim::SimReport& r) {
  std::string out = "hypothesis,kind,n_obs,rejection_rate\n";
  for (const auto& h : r.hypotheses) {
    out += "\"" + h.label + "\"," + h.kind + "," + std::to_string(r.config.n_obs) + "," +
           format_double(h.rate) + "\n";
  }
  return out;
}

std::string edges_to_csv(const std::vector<Edge>& edges) {
  std::string out = "source_state,dest_state,probability\n";
  for (const auto& e : edges) {
    out += std::to_string(e.source) + "," + std::to_string(e.dest) + "," + format_double(e.probability) + "\n";
  }
  return out;
}

}  // namespace mmchain::io
