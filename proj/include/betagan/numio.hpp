#pragma once

#include <charconv>
#include <cstddef>
#include <string>
#include <string_view>
#include <system_error>

#include "betagan/errors.hpp"

namespace betagan {

/// Shortest decimal form that parses back to the identical 64-bit float.
/// Every numeric CSV/manifest value in the project goes through this.
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text, std::size_t line = 0) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last)
        throw ParseError("bad floating-point value '" + std::string(text) + "'", line);
    return v;
}

inline long long parse_integer(std::string_view text, std::size_t line = 0) {
    long long v = 0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last)
        throw ParseError("bad integer value '" + std::string(text) + "'", line);
    return v;
}

}  // namespace betagan
