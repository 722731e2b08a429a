#pragma once

// Small CSV helpers shared by the log readers and writers.

#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

namespace cuelab::detail {

// shortest text that parses back to the same double
inline std::string num(double value) { return fmt::format("{}", value); }

std::vector<std::string> split_csv_line(std::string_view line);
std::string trim(std::string_view text);

/// Strict double parse; throws cuelab::Error(input) naming the field.
double parse_double(std::string_view text, std::string_view field);
long long parse_int(std::string_view text, std::string_view field);

} // namespace cuelab::detail
