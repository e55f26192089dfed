#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tnar::util {

// 17 significant digits; parse_double(format_double(x)) == x bitwise.
std::string format_double(double x);

// Throws FormatError on anything that is not a complete decimal float.
double parse_double(std::string_view s);
long long parse_int(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);
std::string_view trim(std::string_view s);

}  // namespace tnar::util
