#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lasdi::text {

/// Shortest decimal form that reads back to the same double.
std::string format_double(double v);

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);

/// Parses the whole of `s` as a double (accepts nan/inf). Empty on failure.
std::optional<double> parse_double(std::string_view s);

}  // namespace lasdi::text
