// csv.hpp: self-describing CSV output.
//
//   # iqsim-csv v1
//   # experiment = two-qubit
//   # param bath.N = 100
//   t,M,n,...
//
// Numbers are written with 12 significant digits; non-finite values as `nan`.

#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace iqsim {

inline constexpr const char* kCsvSchema = "# iqsim-csv v1";

using Cell = std::variant<double, long long, std::string>;
using Row = std::vector<Cell>;

struct Table {
  std::vector<std::string> columns;
  std::vector<Row> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return i;
    throw std::out_of_range("Table: no column '" + name + "'");
  }
};

inline std::string format_number(double v) {
  if (!std::isfinite(v)) return "nan";
  if (v == 0.0) return "0";  // folds −0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string format_cell(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_number(*d);
  if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
  return std::get<std::string>(c);
}

inline void write_csv(std::ostream& out, const std::string& experiment,
                      const std::vector<std::pair<std::string, std::string>>& params, const Table& table) {
  out << kCsvSchema << '\n';
  out << "# experiment = " << experiment << '\n';
  for (const auto& [k, v] : params) out << "# param " << k << " = " << v << '\n';
  for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << table.columns[i];
  out << '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size()) throw std::logic_error("write_csv: row width mismatch");
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_cell(row[i]);
    out << '\n';
  }
}

}  // namespace iqsim
