#ifndef HSVD_IO_NUMBER_FORMAT_HPP
#define HSVD_IO_NUMBER_FORMAT_HPP

#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>

namespace hsvd::io {

/// 17 significant digits, locale independent; parses back to the same double.
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

/// Whole-token parse; nullopt unless the entire token is a number.
inline std::optional<double> parse_double(std::string_view token) {
    double     v   = 0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
        return std::nullopt;
    }
    return v;
}

inline std::optional<unsigned long long> parse_count(std::string_view token) {
    unsigned long long v   = 0;
    const auto         res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
        return std::nullopt;
    }
    return v;
}

} // namespace hsvd::io

#endif // HSVD_IO_NUMBER_FORMAT_HPP
