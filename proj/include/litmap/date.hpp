// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The litmap Authors

#pragma once

#include <charconv>
#include <compare>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace litmap {

/// Proleptic Gregorian calendar date.
struct Date {
    int year = 1970;
    int month = 1;
    int day = 1;

    auto operator<=>(const Date&) const = default;

    static constexpr bool leap(int y) noexcept { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

    static constexpr int days_in_month(int y, int m) noexcept {
        constexpr int days[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
        return (m == 2 && leap(y)) ? 29 : days[m - 1];
    }

    constexpr bool valid() const noexcept {
        return year >= 1 && year <= 9999 && month >= 1 && month <= 12 && day >= 1 &&
               day <= days_in_month(year, month);
    }

    /// Accepts "YYYY-MM-DD" optionally followed by a time part ("T..." or " ...").
    static std::optional<Date> parse(std::string_view s) {
        if (s.size() < 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
        if (s.size() > 10 && s[10] != 'T' && s[10] != ' ') return std::nullopt;
        auto field = [&](std::size_t off, std::size_t len, int& out) {
            const char* b = s.data() + off;
            const auto [p, ec] = std::from_chars(b, b + len, out);
            return ec == std::errc{} && p == b + len;
        };
        Date d;
        if (!field(0, 4, d.year) || !field(5, 2, d.month) || !field(8, 2, d.day)) return std::nullopt;
        if (!d.valid()) return std::nullopt;
        return d;
    }

    std::string iso() const {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
        return buf;
    }
};

}  // namespace litmap
