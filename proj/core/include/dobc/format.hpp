#pragma once

#include <string>
#include <string_view>

#include "dobc/linalg.hpp"

namespace dobc {

// Shortest representation that parses back to the same double ("nan", "inf", "-inf" otherwise).
std::string format_double(double v);

// Inverse of format_double. Throws std::invalid_argument.
double parse_double(std::string_view s);

// Space-separated components.
std::string format_vector(const Vec& v);
Vec parse_vector(std::string_view s);

}  // namespace dobc
