#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "mmchain/gmmc.hpp"
#include "mmchain/inference.hpp"
#include "mmchain/simulation.hpp"

namespace mmchain::io {

inline constexpr int kFitFormatVersion = 1;

/// Versioned JSON document with weights, logit submodels, design specs,
/// standard errors and log-likelihoods.
std::string gmmc_fit_to_json(const GmmcFit& fit);

/// Throws DataError for malformed documents or an unsupported version.
GmmcFit gmmc_fit_from_json(std::string_view text);

std::string fit_report_to_json(const FitReport& report, std::string_view model);

std::string sim_report_to_json(const sim::SimReport& report);

/// Header "hypothesis,kind,n_obs,rejection_rate" and one row per hypothesis.
std::string sim_report_to_csv(const sim::SimReport& report);

/// Header "source_state,dest_state,probability".
std::string edges_to_csv(const std::vector<Edge>& edges);

/// Shortest round-trip decimal for a double.
std::string format_double(double v);

}  // namespace mmchain::io
