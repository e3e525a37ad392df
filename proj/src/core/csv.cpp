// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The sbrcal Authors

#include "core/csv.hpp"

#include <charconv>
#include <cmath>

#include "core/types.hpp"

namespace sbr::csv {

std::string number(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (std::isnan(value)) return "nan";
  if (value == 0.0) return "0";  // folds -0 so reruns never differ by sign of zero
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, end);
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << fields[i];
  }
  out << '\n';
}

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.emplace_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

double parse_double(std::string_view field) {
  if (field == "inf") return INFINITY;
  if (field == "-inf") return -INFINITY;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size())
    fail(ErrorCode::Io, "not a number: '" + std::string(field) + "'");
  return value;
}

long long parse_int(std::string_view field) {
  long long value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size())
    fail(ErrorCode::Io, "not an integer: '" + std::string(field) + "'");
  return value;
}

std::size_t Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  fail(ErrorCode::Io, "missing CSV column '" + std::string(name) + "'");
}

Table read_table(std::istream& in) {
  Table table;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split(line);
    if (table.header.empty()) {
      table.header = std::move(fields);
      continue;
    }
    if (fields.size() != table.header.size())
      fail(ErrorCode::Io, "CSV row has " + std::to_string(fields.size()) + " fields, header has " +
                              std::to_string(table.header.size()));
    table.rows.push_back(std::move(fields));
  }
  if (table.header.empty()) fail(ErrorCode::Io, "empty CSV input");
  return table;
}

}  // namespace sbr::csv
