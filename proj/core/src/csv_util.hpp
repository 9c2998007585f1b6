#ifndef SLICEQ_CSV_UTIL_HPP
#define SLICEQ_CSV_UTIL_HPP

#include <charconv>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sliceq::detail {

/// Shortest decimal form that parses back to the same double (round-trip
/// exact, stable across runs).
inline std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw std::runtime_error("format_double failed");
    return std::string(buf, ptr);
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

inline double parse_double(std::string_view text, const std::string& context) {
    double value = 0.0;
    const auto [ptr, ec] =
        std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw std::runtime_error(context + ": invalid number '" +
                                 std::string(text) + "'");
    }
    return value;
}

inline long parse_long(std::string_view text, const std::string& context) {
    long value = 0;
    const auto [ptr, ec] =
        std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw std::runtime_error(context + ": invalid integer '" +
                                 std::string(text) + "'");
    }
    return value;
}

}  // namespace sliceq::detail

#endif  // SLICEQ_CSV_UTIL_HPP
