#include "mmchain/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>

#include "mmchain/error.hpp"

namespace mmchain::csv {
namespace {

std::vector<std::string> split_line(const std::string& line, std::size_t lineno) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  if (quoted) throw DataError("csv line " + std::to_string(lineno) + ": unterminated quote");
  cells.push_back(std::move(cell));
  for (auto& s : cells) {
    const auto first = s.find_first_not_of(" \t");
    const auto last = s.find_last_not_of(" \t");
    s = first == std::string::npos ? std::string() : s.substr(first, last - first + 1);
  }
  return cells;
}

bool parse_positive_int(const std::string& s, long& out) {
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end && out >= 1;
}

}  // namespace

Table parse(std::istream& in, bool has_header) {
  Table table;
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (first && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
      line.erase(0, 3);
    }
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    auto cells = split_line(line, lineno);
    if (first) {
      first = false;
      if (has_header) {
        table.header = std::move(cells);
        continue;
      }
      for (std::size_t c = 0; c < cells.size(); ++c) {
        table.header.push_back("V" + std::to_string(c + 1));
      }
    }
    if (cells.size() != table.header.size()) {
      throw DataError("csv line " + std::to_string(lineno) + ": expected " +
                      std::to_string(table.header.size()) + " cells, found " +
                      std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (cells[c].empty()) {
        throw DataError("csv line " + std::to_string(lineno) + ": missing value in column '" +
                        table.header[c] + "'");
      }
    }
    table.rows.push_back(std::move(cells));
  }
  if (table.header.empty()) throw DataError("csv: empty input");
  return table;
}

Table read_file(const std::string& path, bool has_header) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  try {
    return parse(in, has_header);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

EncodedPanel panel_from_table(const Table& table, bool time_index) {
  const std::size_t first_col = time_index ? 1 : 0;
  if (table.header.size() <= first_col) throw DataError("panel: no sequence columns");
  std::vector<std::vector<int>> codes;
  std::vector<std::vector<std::string>> labels;
  std::vector<int> sizes;
  for (std::size_t c = first_col; c < table.header.size(); ++c) {
    std::vector<long> ints(table.rows.size());
    bool all_int = true;
    for (std::size_t r = 0; r < table.rows.size() && all_int; ++r) {
      all_int = parse_positive_int(table.rows[r][c], ints[r]);
    }
    std::vector<int> col(table.rows.size());
    std::vector<std::string> order;
    if (all_int) {
      std::map<long, int> index;
      for (long v : ints) index.emplace(v, 0);
      int code = 0;
      for (auto& [value, idx] : index) {
        idx = code++;
        order.push_back(std::to_string(value));
      }
      for (std::size_t r = 0; r < ints.size(); ++r) col[r] = index.at(ints[r]);
    } else {
      std::map<std::string, int> index;
      for (std::size_t r = 0; r < table.rows.size(); ++r) {
        auto [it, inserted] = index.try_emplace(table.rows[r][c], static_cast<int>(order.size()));
        if (inserted) order.push_back(table.rows[r][c]);
        col[r] = it->second;
      }
    }
    if (order.size() < 2) {
      throw DataError("panel column '" + table.header[c] + "' is constant; no transition structure");
    }
    sizes.push_back(static_cast<int>(order.size()));
    codes.push_back(std::move(col));
    labels.push_back(std::move(order));
  }
  std::vector<std::string> times;
  if (time_index) {
    for (const auto& row : table.rows) times.push_back(row[0]);
  }
  return {Panel(std::move(codes), std::move(sizes), std::move(times)), std::move(labels)};
}

EncodedPanel read_panel(const std::string& path, const PanelOptions& options) {
  const Table table = read_file(path, options.has_header);
  try {
    return panel_from_table(table, options.time_index);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

CovariateMatrix covariates_from_table(const Table& table) {
  Eigen::MatrixXd values(static_cast<Eigen::Index>(table.rows.size()),
                         static_cast<Eigen::Index>(table.header.size()));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (std::size_t c = 0; c < table.header.size(); ++c) {
      const std::string& cell = table.rows[r][c];
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != cell.size() || !std::isfinite(v)) {
        throw DataError("covariates row " + std::to_string(r + 1) + ", column '" +
                        table.header[c] + "': not a finite number: '" + cell + "'");
      }
      values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
    }
  }
  return CovariateMatrix(std::move(values), table.header);
}

CovariateMatrix read_covariates(const std::string& path) {
  const Table table = read_file(path, true);
  try {
    return covariates_from_table(table);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

std::string quote_if_needed(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace mmchain::csv
