#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace aptsynth {

// UTC instant at one-second resolution.
using EpochSeconds = std::int64_t;
using DurationSeconds = std::int64_t;

inline constexpr DurationSeconds kMinute = 60;
inline constexpr DurationSeconds kHour = 3600;
inline constexpr DurationSeconds kDay = 86400;

// Closed interval [begin, end].
struct TimeRange {
    EpochSeconds begin = 0;
    EpochSeconds end = 0;

    constexpr bool contains(EpochSeconds t) const { return t >= begin && t <= end; }
    constexpr DurationSeconds length() const { return end - begin; }
    friend constexpr bool operator==(const TimeRange&, const TimeRange&) = default;
};

// 2024-01-01T00:00:01Z .. 2024-06-30T23:59:59Z
inline constexpr TimeRange kDefaultTimeRange{1704067201, 1719791999};

// "YYYY-MM-DDTHH:MM:SSZ"
std::string format_iso8601(EpochSeconds t);
std::optional<EpochSeconds> parse_iso8601(std::string_view text);
// "YYYY-MM-DD"
std::string format_date(EpochSeconds t);

int hour_of_day(EpochSeconds t);
// 0 = Monday .. 6 = Sunday
int day_of_week(EpochSeconds t);
// 1..12
int month_of_year(EpochSeconds t);
// Midnight UTC of the day containing t.
EpochSeconds floor_to_day(EpochSeconds t);

}  // namespace aptsynth
