// Copyright 2026 The nmqj Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <charconv>
#include <cstddef>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "nmqj/error.hpp"
#include "nmqj/statistics.hpp"
#include "nmqj/trajectory.hpp"

namespace nmqj {

/// 17 significant digits, '.' decimal point regardless of locale.
inline std::string format_number(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

/// In-memory CSV table: a time column followed by named value columns.
struct CsvTable {
  std::vector<std::string> columns;  // excluding "t"
  std::vector<double> times;
  std::vector<std::vector<double>> values;  // [column][row]

  std::optional<std::size_t> find(std::string_view name) const {
    for (std::size_t k = 0; k < columns.size(); ++k) {
      if (columns[k] == name) return k;
    }
    return std::nullopt;
  }
};

inline void write_csv(std::ostream& os, const CsvTable& table) {
  os << 't';
  for (const auto& c : table.columns) os << ',' << c;
  os << '\n';
  for (std::size_t i = 0; i < table.times.size(); ++i) {
    os << format_number(table.times[i]);
    for (const auto& column : table.values) os << ',' << format_number(column.at(i));
    os << '\n';
  }
}

/// Columns `t,<obs>,<obs>_stderr,...`.
inline CsvTable to_table(const EnsembleResult& result) {
  CsvTable table;
  table.times = result.times;
  for (std::size_t k = 0; k < result.names.size(); ++k) {
    table.columns.push_back(result.names[k]);
    table.columns.push_back(result.names[k] + "_stderr");
    table.values.push_back(result.mean[k]);
    table.values.push_back(result.std_error[k]);
  }
  return table;
}

/// Columns `t,<obs>,...` for deterministic series.
inline CsvTable to_table(const TimeSeries& series) {
  series.check();
  CsvTable table;
  table.times = series.times;
  table.columns = series.names;
  table.values = series.values;
  return table;
}

template <typename Result>
void emit_csv(const Result& result, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_csv(out, to_table(result));
  out.flush();
  if (!out) throw Error("failed writing '" + path + "'");
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

inline double parse_number(const std::string& text, const std::string& where) {
  double x = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto res = std::from_chars(first, last, x);
  if (res.ec != std::errc() || res.ptr != last) {
    throw Error(where + ": cannot parse number '" + text + "'");
  }
  return x;
}

}  // namespace detail

inline CsvTable read_csv(std::istream& is, const std::string& origin = "csv") {
  std::string line;
  if (!std::getline(is, line)) throw Error(origin + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = detail::split_csv_line(line);
  if (header.empty() || header.front() != "t") throw Error(origin + ": first column must be 't'");

  CsvTable table;
  table.columns.assign(header.begin() + 1, header.end());
  table.values.assign(table.columns.size(), {});
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = detail::split_csv_line(line);
    const std::string where = origin + ":" + std::to_string(line_no);
    if (cells.size() != header.size()) throw Error(where + ": wrong number of cells");
    table.times.push_back(detail::parse_number(cells[0], where));
    for (std::size_t k = 1; k < cells.size(); ++k) {
      table.values[k - 1].push_back(detail::parse_number(cells[k], where));
    }
  }
  return table;
}

inline CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  return read_csv(in, path);
}

}  // namespace nmqj
