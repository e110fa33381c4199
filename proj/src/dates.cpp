#include "sysrisk/dates.hpp"

#include <charconv>
#include <cstdio>

namespace sysrisk {

namespace {

std::chrono::year_month_day to_ymd(int serial) {
    return std::chrono::year_month_day{
        std::chrono::sys_days{std::chrono::days{serial}}};
}

int to_serial(std::chrono::year_month_day ymd) {
    return static_cast<int>(
        std::chrono::sys_days{ymd}.time_since_epoch().count());
}

bool parse_int(std::string_view s, int& out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

} // namespace

Date::Date(int year, unsigned month, unsigned day) {
    std::chrono::year_month_day ymd{std::chrono::year{year},
                                    std::chrono::month{month},
                                    std::chrono::day{day}};
    if (!ymd.ok())
        throw ArgumentError("invalid date " + std::to_string(year) + "-" +
                            std::to_string(month) + "-" + std::to_string(day));
    days_ = to_serial(ymd);
}

Date Date::parse(std::string_view iso) {
    int y = 0, m = 0, d = 0;
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-' ||
        !parse_int(iso.substr(0, 4), y) || !parse_int(iso.substr(5, 2), m) ||
        !parse_int(iso.substr(8, 2), d))
        throw ArgumentError("invalid ISO date '" + std::string(iso) + "'");
    return Date(y, static_cast<unsigned>(m), static_cast<unsigned>(d));
}

std::string Date::to_string() const {
    auto ymd = to_ymd(days_);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(ymd.year()),
                  unsigned(ymd.month()), unsigned(ymd.day()));
    return buf;
}

int Date::year() const { return int(to_ymd(days_).year()); }
unsigned Date::month() const { return unsigned(to_ymd(days_).month()); }
unsigned Date::day() const { return unsigned(to_ymd(days_).day()); }

Date Date::plus_days(int n) const { return Date(days_ + n); }

int Date::iso_weekday() const {
    std::chrono::weekday wd{std::chrono::sys_days{std::chrono::days{days_}}};
    return static_cast<int>(wd.iso_encoding());
}

Quarter Quarter::of(const Date& d) {
    return Quarter{d.year(), static_cast<int>((d.month() - 1) / 3 + 1)};
}

Quarter Quarter::parse(std::string_view text) {
    auto pos = text.find('Q');
    int y = 0, qq = 0;
    if (pos == std::string_view::npos || !parse_int(text.substr(0, pos), y) ||
        !parse_int(text.substr(pos + 1), qq) || qq < 1 || qq > 4)
        throw ArgumentError("invalid quarter '" + std::string(text) + "'");
    return Quarter{y, qq};
}

std::string Quarter::to_string() const {
    return std::to_string(year) + "Q" + std::to_string(q);
}

Quarter Quarter::next() const {
    return q == 4 ? Quarter{year + 1, 1} : Quarter{year, q + 1};
}

IsoWeek IsoWeek::of(const Date& d) {
    // The ISO week of a date is the week of its nearest Thursday.
    Date thursday = d.plus_days(4 - d.iso_weekday());
    int y = thursday.year();
    Date jan1(y, 1, 1);
    int week = (thursday.serial() - jan1.serial()) / 7 + 1;
    return IsoWeek{y, week};
}

} // namespace sysrisk
