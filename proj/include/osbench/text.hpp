#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace osbench {

// Shortest decimal text that parses back to the identical double.
std::string format_double(double value);

// Strict parsers: the whole field must be consumed. Throw InputError naming `what`.
double parse_double(std::string_view text, std::string_view what);
long long parse_integer(std::string_view text, std::string_view what);
std::uint64_t parse_unsigned(std::string_view text, std::string_view what);

std::vector<std::string_view> split_view(std::string_view text, char sep);
std::string_view trim(std::string_view text);

} // namespace osbench
