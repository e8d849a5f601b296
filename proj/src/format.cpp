#include "flooding/format.hpp"

#include <array>
#include <charconv>
#include <system_error>

namespace flooding {

std::string format_number(double x) {
    std::array<char, 64> buf{};
    const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    if (ec != std::errc{}) return "nan";
    return std::string(buf.data(), end);
}

} // namespace flooding
