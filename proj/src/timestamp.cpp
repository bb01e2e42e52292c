#include "newsclick/timestamp.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

#include "newsclick/error.hpp"

namespace newsclick {
namespace {

using std::chrono::sys_days;
using std::chrono::year_month_day;

unsigned parse_digits(std::string_view text, std::size_t pos, std::size_t len) {
  unsigned value = 0;
  for (std::size_t i = pos; i < pos + len; ++i) {
    const char c = text[i];
    if (c < '0' || c > '9') throw ParseError("timestamp '" + std::string(text) + "' is not YYYY-MM-DD HH:MM:SS");
    value = value * 10 + static_cast<unsigned>(c - '0');
  }
  return value;
}

}  // namespace

Timestamp Timestamp::parse(std::string_view text) {
  // 0123456789012345678
  // YYYY-MM-DD HH:MM:SS
  if (text.size() != 19 || text[4] != '-' || text[7] != '-' || text[10] != ' ' || text[13] != ':' ||
      text[16] != ':') {
    throw ParseError("timestamp '" + std::string(text) + "' is not YYYY-MM-DD HH:MM:SS");
  }
  Timestamp t;
  t.year = static_cast<int>(parse_digits(text, 0, 4));
  t.month = parse_digits(text, 5, 2);
  t.day = parse_digits(text, 8, 2);
  t.hour = parse_digits(text, 11, 2);
  t.minute = parse_digits(text, 14, 2);
  t.second = parse_digits(text, 17, 2);
  const year_month_day ymd{std::chrono::year{t.year}, std::chrono::month{t.month}, std::chrono::day{t.day}};
  if (!ymd.ok()) throw ParseError("timestamp '" + std::string(text) + "' is not a calendar date");
  if (t.hour > 23 || t.minute > 59 || t.second > 59) {
    throw ParseError("timestamp '" + std::string(text) + "' has an out-of-range time of day");
  }
  return t;
}

Timestamp Timestamp::from_epoch_seconds(std::int64_t seconds) {
  std::int64_t days = seconds / 86400;
  std::int64_t rem = seconds % 86400;
  if (rem < 0) {
    rem += 86400;
    --days;
  }
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  Timestamp t;
  t.year = static_cast<int>(ymd.year());
  t.month = static_cast<unsigned>(ymd.month());
  t.day = static_cast<unsigned>(ymd.day());
  t.hour = static_cast<unsigned>(rem / 3600);
  t.minute = static_cast<unsigned>(rem % 3600 / 60);
  t.second = static_cast<unsigned>(rem % 60);
  return t;
}

std::string Timestamp::to_string() const {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u %02u:%02u:%02u", year, month, day, hour, minute, second);
  return buf;
}

std::int64_t Timestamp::epoch_seconds() const {
  const sys_days d{year_month_day{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}}};
  return static_cast<std::int64_t>(d.time_since_epoch().count()) * 86400 + hour * 3600 + minute * 60 + second;
}

unsigned Timestamp::day_of_week() const {
  const sys_days d{year_month_day{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}}};
  return std::chrono::weekday{d}.iso_encoding() - 1;
}

}  // namespace newsclick
