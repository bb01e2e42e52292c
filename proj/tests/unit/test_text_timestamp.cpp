#include <cmath>
#include <cstring>
#include <random>

#include "doctest.h"
#include "newsclick/error.hpp"
#include "newsclick/io.hpp"
#include "newsclick/text.hpp"
#include "newsclick/timestamp.hpp"

using namespace newsclick;

namespace {

// Zeller's congruence, shifted so Monday = 0.
unsigned zeller(int y, unsigned m, unsigned d) {
  if (m < 3) {
    m += 12;
    y -= 1;
  }
  const int k = y % 100, j = y / 100;
  const int h = (static_cast<int>(d) + 13 * (static_cast<int>(m) + 1) / 5 + k + k / 4 + j / 4 + 5 * j) % 7;
  return static_cast<unsigned>((h + 5) % 7);
}

bool leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

std::int64_t days_by_counting(int y, unsigned m, unsigned d) {
  static const int len[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  std::int64_t days = 0;
  for (int yy = 1970; yy < y; ++yy) days += leap(yy) ? 366 : 365;
  for (unsigned mm = 1; mm < m; ++mm) days += len[mm - 1] + (mm == 2 && leap(y) ? 1 : 0);
  return days + d - 1;
}

}  // namespace

TEST_CASE("timestamp parses the exact layout") {
  const auto t = Timestamp::parse("2011-03-08 23:00:00");
  CHECK(t.year == 2011);
  CHECK(t.month == 3u);
  CHECK(t.day == 8u);
  CHECK(t.hour == 23u);
  CHECK(t.to_string() == "2011-03-08 23:00:00");
  CHECK(Timestamp::parse("2011-03-08 23:17:42").minute == 17u);
  CHECK(Timestamp::parse("2011-03-08 23:17:42").second == 42u);
  CHECK_THROWS_AS(Timestamp::parse("2011-3-08 23:00:00"), ParseError);
  CHECK_THROWS_AS(Timestamp::parse("2011-03-08T23:00:00"), ParseError);
  CHECK_THROWS_AS(Timestamp::parse("2011-03-08 24:00:00"), ParseError);
  CHECK_THROWS_AS(Timestamp::parse("2011-02-30 10:00:00"), ParseError);
  CHECK_THROWS_AS(Timestamp::parse("2011-03-08 23:00:00 "), ParseError);
  CHECK_NOTHROW(Timestamp::parse("2012-02-29 00:00:00"));
}

TEST_CASE("weekday and epoch agree with independent calendar arithmetic") {
  CHECK(Timestamp::parse("2011-03-08 23:00:00").day_of_week() == 1u);
  CHECK(Timestamp::parse("2011-03-09 01:00:00").day_of_week() == 2u);
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> year(1970, 2100), month(1, 12), day(1, 28), hour(0, 23);
  for (int i = 0; i < 2000; ++i) {
    Timestamp t{year(rng), static_cast<unsigned>(month(rng)), static_cast<unsigned>(day(rng)),
                static_cast<unsigned>(hour(rng)), 0, 0};
    CHECK(t.day_of_week() == zeller(t.year, t.month, t.day));
    CHECK(t.epoch_seconds() == days_by_counting(t.year, t.month, t.day) * 86400 + t.hour * 3600);
    CHECK(Timestamp::from_epoch_seconds(t.epoch_seconds()) == t);
    CHECK(Timestamp::parse(t.to_string()) == t);
  }
}

TEST_CASE("utf8 decoding and character classes") {
  const auto s = text::decode_utf8("Ação «já»");
  CHECK(s.size() == 9u);
  CHECK(text::encode_utf8(s) == "Ação «já»");
  CHECK(text::is_upper(U'Á'));
  CHECK_FALSE(text::is_upper(U'ç'));
  CHECK(text::to_lower(U'Ç') == U'ç');
  CHECK(text::is_letter(U'ã'));
  CHECK_FALSE(text::is_letter(U'«'));
  CHECK(text::decode_utf8("\xff") == std::u32string(1, U'�'));
  CHECK(text::split_whitespace(U"  a\tb  c ").size() == 3u);
  const auto w = text::word_tokens(U"O mercado, caiu!");
  REQUIRE(w.size() == 3u);
  CHECK(w[0] == U"o");
  CHECK(w[2] == U"caiu");
}

TEST_CASE("field escaping round-trips") {
  const std::string raw = "a\tb\\c\nd\re";
  CHECK(text::escape_field(raw) == "a\\tb\\\\c\\nd\\re");
  CHECK(text::unescape_field(text::escape_field(raw)) == raw);
  CHECK_THROWS_AS(text::unescape_field("bad\\"), ParseError);
  CHECK_THROWS_AS(text::unescape_field("bad\\q"), ParseError);
  CHECK(text::trim("  x y \t") == "x y");
}

TEST_CASE("doubles survive 17-digit formatting bit for bit") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::uint64_t> bits;
  for (int i = 0; i < 5000; ++i) {
    double v;
    const auto b = bits(rng);
    std::memcpy(&v, &b, sizeof v);
    if (!std::isfinite(v)) continue;
    CHECK(parse_double(format_double(v)) == v);
  }
  CHECK(parse_double(format_double(0.1)) == 0.1);
  CHECK(parse_int("-42") == -42);
  CHECK_THROWS_AS(parse_int("4x"), ParseError);
  CHECK_THROWS_AS(parse_double(""), ParseError);
}
