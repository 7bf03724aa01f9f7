// SPDX-License-Identifier: Apache-2.0
// Locale-independent token helpers shared by the text formats.
#pragma once

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cvm::detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

inline std::string_view strip_plus(std::string_view s) {
    return (s.size() > 1 && s.front() == '+') ? s.substr(1) : s;
}

inline std::optional<double> parse_double(std::string_view s) {
    s = strip_plus(s);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

inline std::optional<long long> parse_int(std::string_view s) {
    s = strip_plus(s);
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

inline std::optional<std::size_t> parse_size(std::string_view s) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

/// Integer class label; integral floats such as "1.0" are accepted.
inline std::optional<int> parse_label(std::string_view s) {
    if (auto i = parse_int(s)) {
        if (*i < INT32_MIN || *i > INT32_MAX) return std::nullopt;
        return static_cast<int>(*i);
    }
    if (auto d = parse_double(s); d && std::isfinite(*d) && *d == std::trunc(*d) && std::abs(*d) < 2147483647.0) {
        return static_cast<int>(*d);
    }
    return std::nullopt;
}

/// "idx:value" with idx >= 1.
inline std::optional<std::pair<std::size_t, double>> parse_index_value(std::string_view tok) {
    const auto colon = tok.find(':');
    if (colon == std::string_view::npos) return std::nullopt;
    auto idx = parse_size(tok.substr(0, colon));
    auto val = parse_double(tok.substr(colon + 1));
    if (!idx || *idx == 0 || !val) return std::nullopt;
    return std::pair{*idx, *val};
}

/// 17 significant digits: enough for an exact double round trip.
inline std::string format_double(double v) { return fmt::format("{:.17g}", v); }

}  // namespace cvm::detail
