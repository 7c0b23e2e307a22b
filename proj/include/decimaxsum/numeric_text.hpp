#pragma once

#include <charconv>
#include <string>

namespace dms {

/// Shortest decimal form that parses back to the same double.
inline std::string format_real(double x) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

}  // namespace dms
