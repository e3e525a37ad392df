// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The sbrcal Authors

#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace sbr::csv {

/// Shortest decimal that round-trips to the same double. Locale independent,
/// no thousands separators.
std::string number(double value);

/// Writes one comma-separated row terminated by '\n'.
void write_row(std::ostream& out, const std::vector<std::string>& fields);

/// Plain comma split; fields in this project never contain quotes or commas.
std::vector<std::string> split(std::string_view line);

double parse_double(std::string_view field);
long long parse_int(std::string_view field);

/// Header plus data rows, skipping blank lines. Throws Io on a malformed row.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;
};

Table read_table(std::istream& in);

}  // namespace sbr::csv
