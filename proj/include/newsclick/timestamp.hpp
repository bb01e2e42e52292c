#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace newsclick {

/// Calendar date plus wall-clock time, no time zone. Source data always
/// carries zero minutes and seconds, but both are parsed and kept.
struct Timestamp {
  int year = 1970;
  unsigned month = 1;
  unsigned day = 1;
  unsigned hour = 0;
  unsigned minute = 0;
  unsigned second = 0;

  /// Parses exactly `YYYY-MM-DD HH:MM:SS`; throws ParseError otherwise.
  static Timestamp parse(std::string_view text);
  static Timestamp from_epoch_seconds(std::int64_t seconds);

  std::string to_string() const;
  std::int64_t epoch_seconds() const;
  /// Monday = 0 ... Sunday = 6.
  unsigned day_of_week() const;

  auto operator<=>(const Timestamp&) const = default;
};

}  // namespace newsclick
