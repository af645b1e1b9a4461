#pragma once

#include <charconv>
#include <cstddef>
#include <ostream>
#include <string>
#include <system_error>
#include <type_traits>

namespace cyberinv {

/// Shortest decimal text that round-trips to the same double.
inline std::string format_number(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

inline std::string format_number(std::size_t x) { return std::to_string(x); }

/// Writes one CSV row from heterogeneous cells.
template <class First, class... Rest>
void write_csv_row(std::ostream& out, const First& first, const Rest&... rest) {
    auto cell = [&](const auto& v) {
        if constexpr (std::is_convertible_v<decltype(v), std::string>) {
            out << std::string(v);
        } else {
            out << format_number(v);
        }
    };
    cell(first);
    ((out << ',', cell(rest)), ...);
    out << '\n';
}

} // namespace cyberinv
