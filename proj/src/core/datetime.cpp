#include "tollcast/core/datetime.hpp"

#include <charconv>
#include <chrono>
#include <stdexcept>

#include <fmt/core.h>

namespace tollcast {

namespace {

namespace chr = std::chrono;

chr::year_month_day to_ymd(Date d) {
  return chr::year_month_day{chr::sys_days{chr::days{d.days}}};
}

int parse_int(std::string_view text, std::string_view what) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw std::invalid_argument(fmt::format("bad {} field '{}'", what, text));
  }
  return value;
}

}  // namespace

Date Date::from_ymd(int year, unsigned month, unsigned day) {
  chr::year_month_day ymd{chr::year{year}, chr::month{month}, chr::day{day}};
  if (!ymd.ok()) {
    throw std::invalid_argument(fmt::format("invalid date {}-{}-{}", year, month, day));
  }
  return Date{static_cast<std::int32_t>(chr::sys_days{ymd}.time_since_epoch().count())};
}

Date Date::parse(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw std::invalid_argument(fmt::format("expected YYYY-MM-DD, got '{}'", text));
  }
  return from_ymd(parse_int(text.substr(0, 4), "year"),
                  static_cast<unsigned>(parse_int(text.substr(5, 2), "month")),
                  static_cast<unsigned>(parse_int(text.substr(8, 2), "day")));
}

int Date::year() const { return static_cast<int>(to_ymd(*this).year()); }
unsigned Date::month() const { return static_cast<unsigned>(to_ymd(*this).month()); }
unsigned Date::day() const { return static_cast<unsigned>(to_ymd(*this).day()); }

int Date::weekday() const {
  return static_cast<int>(chr::weekday{chr::sys_days{chr::days{days}}}.iso_encoding()) - 1;
}

std::string Date::str() const {
  return fmt::format("{:04d}-{:02d}-{:02d}", year(), month(), day());
}

ClockTime ClockTime::parse(std::string_view text) {
  if (text.size() != 5 || text[2] != ':') {
    throw std::invalid_argument(fmt::format("expected HH:MM, got '{}'", text));
  }
  int h = parse_int(text.substr(0, 2), "hour");
  int m = parse_int(text.substr(3, 2), "minute");
  if (h < 0 || h > 24 || m < 0 || m > 59 || (h == 24 && m != 0)) {
    throw std::invalid_argument(fmt::format("clock time out of range '{}'", text));
  }
  return hm(h, m);
}

std::string ClockTime::str() const {
  return fmt::format("{:02d}:{:02d}", minutes / 60, minutes % 60);
}

LocalDateTime LocalDateTime::parse(std::string_view text) {
  if (text.size() != 16 || (text[10] != 'T' && text[10] != ' ')) {
    throw std::invalid_argument(fmt::format("expected YYYY-MM-DDTHH:MM, got '{}'", text));
  }
  ClockTime clock = ClockTime::parse(text.substr(11, 5));
  if (clock.minutes >= 1440) {
    throw std::invalid_argument(fmt::format("clock time out of range '{}'", text));
  }
  return LocalDateTime{Date::parse(text.substr(0, 10)), clock};
}

Date LocalDateTime::date() const {
  std::int64_t d = minutes_ >= 0 ? minutes_ / 1440 : -((-minutes_ + 1439) / 1440);
  return Date{static_cast<std::int32_t>(d)};
}

int LocalDateTime::minute_of_day() const {
  return static_cast<int>(minutes_ - static_cast<std::int64_t>(date().days) * 1440);
}

std::string LocalDateTime::str() const {
  return date().str() + "T" + clock().str();
}

bool in_dst_transition(LocalDateTime t) {
  const Date d = t.date();
  const unsigned month = d.month();
  if (month != 3 && month != 11) return false;
  if (d.weekday() != 6) return false;
  const unsigned dom = d.day();
  const int hour = t.minute_of_day() / 60;
  if (month == 3) return dom >= 8 && dom <= 14 && hour == 2;
  return dom <= 7 && hour == 1;
}

}  // namespace tollcast
