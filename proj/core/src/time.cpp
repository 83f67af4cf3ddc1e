#include "aptsynth/time.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

namespace aptsynth {

namespace {

using namespace std::chrono;

EpochSeconds floor_div(EpochSeconds a, EpochSeconds b) {
    EpochSeconds q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

sys_days day_of(EpochSeconds t) { return sys_days{days{floor_div(t, kDay)}}; }

bool read_int(std::string_view s, int& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
}

}  // namespace

std::string format_iso8601(EpochSeconds t) {
    const auto d = day_of(t);
    const year_month_day ymd{d};
    const EpochSeconds sod = t - d.time_since_epoch().count() * kDay;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", int(ymd.year()), unsigned(ymd.month()),
                  unsigned(ymd.day()), int(sod / 3600), int(sod / 60 % 60), int(sod % 60));
    return buf;
}

std::string format_date(EpochSeconds t) { return format_iso8601(t).substr(0, 10); }

std::optional<EpochSeconds> parse_iso8601(std::string_view s) {
    // Exactly YYYY-MM-DDTHH:MM:SSZ
    if (s.size() != 20 || s[4] != '-' || s[7] != '-' || s[10] != 'T' || s[13] != ':' || s[16] != ':' ||
        s[19] != 'Z')
        return std::nullopt;
    int y, mo, d, h, mi, se;
    if (!read_int(s.substr(0, 4), y) || !read_int(s.substr(5, 2), mo) || !read_int(s.substr(8, 2), d) ||
        !read_int(s.substr(11, 2), h) || !read_int(s.substr(14, 2), mi) || !read_int(s.substr(17, 2), se))
        return std::nullopt;
    const year_month_day ymd{year{y}, month{unsigned(mo)}, day{unsigned(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || se > 59) return std::nullopt;
    const EpochSeconds days_since = sys_days{ymd}.time_since_epoch().count();
    return days_since * kDay + h * kHour + mi * kMinute + se;
}

int hour_of_day(EpochSeconds t) { return int((t - floor_div(t, kDay) * kDay) / kHour); }

int day_of_week(EpochSeconds t) {
    const weekday wd{day_of(t)};
    return int(wd.iso_encoding()) - 1;
}

int month_of_year(EpochSeconds t) { return int(unsigned(year_month_day{day_of(t)}.month())); }

EpochSeconds floor_to_day(EpochSeconds t) { return floor_div(t, kDay) * kDay; }

}  // namespace aptsynth
