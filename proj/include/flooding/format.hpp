#pragma once

#include <string>

namespace flooding {

/// Shortest decimal text that parses back to exactly `x` ('.' separator, no locale).
std::string format_number(double x);

} // namespace flooding
