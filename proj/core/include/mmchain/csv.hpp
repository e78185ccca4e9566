#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mmchain/panel.hpp"

namespace mmchain::csv {

/// A parsed comma-separated table; every row has header.size() cells.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Parses UTF-8 CSV with optional double-quoted cells. When has_header is
/// false, columns are named V1..Vk. Empty cells are rejected.
Table parse(std::istream& in, bool has_header);
Table read_file(const std::string& path, bool has_header);

struct PanelOptions {
  bool has_header = false;
  /// First column holds time labels rather than a sequence.
  bool time_index = false;
};

/// Wide-format panel: one column per sequence. Columns whose cells are all
/// positive integers keep their numeric order (distinct values sorted
/// ascending, compacted to 1..m); any other column is encoded in
/// first-appearance order.
EncodedPanel read_panel(const std::string& path, const PanelOptions& options);
EncodedPanel panel_from_table(const Table& table, bool time_index);

/// Covariates need a header row; every cell must parse as a finite real.
CovariateMatrix read_covariates(const std::string& path);
CovariateMatrix covariates_from_table(const Table& table);

std::string quote_if_needed(const std::string& cell);

}  // namespace mmchain::csv
