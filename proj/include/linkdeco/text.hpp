#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace linkdeco::text {

std::vector<std::string_view> split(std::string_view s, char sep);
/// Lines without their terminators; a trailing newline does not add an
/// empty last line.
std::vector<std::string_view> lines(std::string_view s);
std::string_view trim(std::string_view s);

/// Shortest representation that parses back to the same double.
std::string format_double(double value);
/// Throws InputError when `s` is not entirely a number.
double parse_double(std::string_view s);
unsigned long long parse_uint(std::string_view s);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace linkdeco::text
