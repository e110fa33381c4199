#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

#include "sysrisk/errors.hpp"

namespace sysrisk {

// Calendar date (no time of day). Wraps std::chrono so quarter and ISO-week
// arithmetic stay in one place.
class Date {
public:
    Date() : days_(0) {}
    Date(int year, unsigned month, unsigned day);

    // Parses "YYYY-MM-DD"; throws ArgumentError on malformed input.
    static Date parse(std::string_view iso);

    std::string to_string() const;

    int year() const;
    unsigned month() const;
    unsigned day() const;

    // Days since 1970-01-01; usable as a dense key.
    int serial() const { return days_; }

    Date plus_days(int n) const;

    // 1 = Monday ... 7 = Sunday.
    int iso_weekday() const;

    auto operator<=>(const Date&) const = default;

private:
    explicit Date(int serial_days) : days_(serial_days) {}
    int days_;
};

// Calendar quarter, e.g. 2008Q3.
struct Quarter {
    int year = 0;
    int q = 0; // 1..4

    static Quarter of(const Date& d);
    // Parses "YYYYQn"; throws ArgumentError on malformed input.
    static Quarter parse(std::string_view text);

    std::string to_string() const;
    int index() const { return year * 4 + (q - 1); } // dense, ordered
    Quarter next() const;

    auto operator<=>(const Quarter&) const = default;
};

// ISO-8601 week (the week's Thursday decides the year).
struct IsoWeek {
    int year = 0;
    int week = 0;

    static IsoWeek of(const Date& d);

    auto operator<=>(const IsoWeek&) const = default;
};

} // namespace sysrisk
