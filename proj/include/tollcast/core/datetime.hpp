#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace tollcast {

/// Calendar date as days since 1970-01-01 (proleptic Gregorian).
struct Date {
  std::int32_t days = 0;

  static Date from_ymd(int year, unsigned month, unsigned day);
  static Date parse(std::string_view text);  // YYYY-MM-DD

  int year() const;
  unsigned month() const;
  unsigned day() const;
  /// 0 = Monday ... 6 = Sunday.
  int weekday() const;
  /// Months since year 0; two dates share a calendar month iff equal.
  int month_key() const { return year() * 12 + static_cast<int>(month()) - 1; }

  std::string str() const;

  Date operator+(int n) const { return Date{days + n}; }
  int operator-(Date other) const { return days - other.days; }
  auto operator<=>(const Date&) const = default;
};

/// Minutes of wall-clock time after midnight, in [0, 1440].
struct ClockTime {
  int minutes = 0;

  static ClockTime hm(int hour, int minute) { return ClockTime{hour * 60 + minute}; }
  static ClockTime parse(std::string_view text);  // HH:MM
  std::string str() const;
  auto operator<=>(const ClockTime&) const = default;
};

/// Wall-clock local date-time at minute resolution. No zone offset is carried;
/// the corridor zone is implicit.
class LocalDateTime {
 public:
  constexpr LocalDateTime() = default;
  constexpr explicit LocalDateTime(std::int64_t minutes_since_epoch)
      : minutes_(minutes_since_epoch) {}
  LocalDateTime(Date date, ClockTime clock)
      : minutes_(static_cast<std::int64_t>(date.days) * 1440 + clock.minutes) {}

  /// Accepts `YYYY-MM-DDTHH:MM` (a space also separates date and time).
  static LocalDateTime parse(std::string_view text);

  std::int64_t minutes() const { return minutes_; }
  Date date() const;
  int minute_of_day() const;
  ClockTime clock() const { return ClockTime{minute_of_day()}; }

  std::string str() const;

  LocalDateTime plus_minutes(std::int64_t m) const { return LocalDateTime{minutes_ + m}; }
  std::int64_t operator-(LocalDateTime other) const { return minutes_ - other.minutes_; }
  auto operator<=>(const LocalDateTime&) const = default;

 private:
  std::int64_t minutes_ = 0;
};

/// True when the wall-clock minute at `t` is skipped or repeated by a US
/// Eastern daylight-saving transition (2007+ rules): 02:00-02:59 on the second
/// Sunday of March, 01:00-01:59 on the first Sunday of November.
bool in_dst_transition(LocalDateTime t);

}  // namespace tollcast
