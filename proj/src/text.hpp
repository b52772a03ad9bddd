#pragma once

// Number formatting and CSV splitting shared by the readers and writers.

#include <charconv>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace protoneuro::detail {

// Shortest text that parses back to the same double.
inline std::string format_shortest(double value)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general);
    return std::string(buf, res.ptr);
}

// printf %.9g
inline std::string format_sig9(double value)
{
    char buf[64];
    int n = std::snprintf(buf, sizeof(buf), "%.9g", value);
    return std::string(buf, static_cast<std::size_t>(n));
}

inline std::string_view trim(std::string_view s)
{
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_csv(std::string_view line)
{
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (true) {
        const auto comma = line.find(',', pos);
        if (comma == std::string_view::npos) {
            fields.push_back(trim(line.substr(pos)));
            break;
        }
        fields.push_back(trim(line.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    return fields;
}

inline std::optional<double> parse_double(std::string_view s)
{
    if (!s.empty() && s.front() == '+')
        s.remove_prefix(1);
    double value = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), value);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || s.empty())
        return std::nullopt;
    return value;
}

} // namespace protoneuro::detail
