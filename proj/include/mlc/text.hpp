#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mlc {

/// Shortest decimal form that parses back to the identical double ("%.17g").
std::string format_double(double v);

/// strtod over the whole token; throws std::runtime_error on trailing junk.
double parse_double(std::string_view token);

/// Integer parse with the same strictness.
long long parse_int(std::string_view token);

std::vector<std::string> split(std::string_view line, char sep);
std::string_view trim(std::string_view s);
std::string lower(std::string_view s);

}  // namespace mlc
