#pragma once

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <variant>
#include <vector>

#include "mftg/core/error.hpp"

namespace mftg::cli {

using Cell = std::variant<double, std::int64_t, std::string>;

/// Column-labelled result table rendered as CSV or JSON.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row) {
    require(row.size() == columns.size(), Errc::InvalidArgument, "row width differs from header in table " + name);
    rows.push_back(std::move(row));
  }
};

/// 17 significant digits: round-trips every double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t j = 0; j < t.columns.size(); ++j) out += (j ? "," : "") + csv_escape(t.columns[j]);
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out += ',';
      if (const auto* d = std::get_if<double>(&row[j])) out += format_double(*d);
      else if (const auto* i = std::get_if<std::int64_t>(&row[j])) out += std::to_string(*i);
      else out += csv_escape(std::get<std::string>(row[j]));
    }
    out += '\n';
  }
  return out;
}

/// Same schema as the CSV: {"columns": [...], "rows": [[...], ...]}. Doubles are
/// written as raw 17-digit literals; non-finite values become strings.
inline std::string to_json(const Table& t) {
  std::string out = "{\n  \"name\": " + nlohmann::json(t.name).dump() + ",\n  \"columns\": " +
                    nlohmann::json(t.columns).dump() + ",\n  \"rows\": [";
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    out += r ? ",\n    [" : "\n    [";
    const auto& row = t.rows[r];
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out += ", ";
      if (const auto* d = std::get_if<double>(&row[j]))
        out += std::isfinite(*d) ? format_double(*d) : "\"" + format_double(*d) + "\"";
      else if (const auto* i = std::get_if<std::int64_t>(&row[j])) out += std::to_string(*i);
      else out += nlohmann::json(std::get<std::string>(row[j])).dump();
    }
    out += "]";
  }
  out += t.rows.empty() ? "]\n}\n" : "\n  ]\n}\n";
  return out;
}

}  // namespace mftg::cli
