#include <random>
#include <sstream>

#include "doctest.h"
#include "newsclick/data_model.hpp"
#include "newsclick/error.hpp"
#include "unit/support.hpp"

using namespace newsclick;

namespace {
const std::string kExample =
    "[13116] [2011-03-08 23:00:00] [2] [geral] [manchete] [1214] [401] [Barcelona segue para os quartos-de-final]";

Dataset parse_text(const std::string& s) {
  std::istringstream in(s);
  return parse_dataset(in);
}

std::string write_text(const Dataset& d) {
  std::ostringstream out;
  write_dataset(d, out);
  return out.str();
}
}  // namespace

TEST_CASE("example record parses field by field") {
  const auto e = parse_entry(kExample);
  CHECK(e.line_number == 13116);
  CHECK(e.timestamp == Timestamp{2011, 3, 8, 23, 0, 0});
  CHECK(e.channel_id == 2);
  CHECK(e.section_raw == "geral");
  CHECK(e.section == Section::kGeneral);
  CHECK(e.subsection == Subsection::kManchete);
  CHECK(e.news_id == 1214);
  CHECK(e.clicks == 401);
  CHECK(e.title == "Barcelona segue para os quartos-de-final");
  CHECK(format_entry(e) == kExample);
}

TEST_CASE("minimal entry and enumeration errors") {
  const auto e = parse_entry("[1] [2011-03-01 00:00:00] [1] [geral] [null] [1] [1] [a]");
  CHECK(e.clicks == 1);
  CHECK(e.subsection == Subsection::kNull);
  CHECK(e.title == "a");
  CHECK_THROWS_AS(parse_entry("[2] [2011-03-01 00:00:00] [1] [geral] [banner] [1] [5] [x]"), ParseError);
  try {
    parse_entry("[2] [2011-03-01 00:00:00] [1] [geral] [banner] [1] [5] [x]");
  } catch (const ParseError& err) {
    CHECK(std::string(err.what()).find("banner") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_entry("[2] [2011-03-01 00:00:00] [1] [geral] [null] [1] [0] [x]"), ValidationError);
  CHECK_THROWS_AS(parse_entry("[2] [2011-03-01 00:00:00] [1] [geral] [null] [1] [-3] [x]"), ValidationError);
  CHECK_THROWS_AS(parse_entry("[2] [2011-03-01 00:00:00] [1x] [geral] [null] [1] [5] [x]"), ParseError);
  CHECK_THROWS_AS(parse_entry("[2] [2011-03-01 00:00:00] [1] [geral] [null] [1] [5]"), ParseError);
  CHECK_THROWS_AS(parse_entry("[2] [2011-03-01 00:00:00] [1] [geral]  [null] [1] [5] [x]"), ParseError);
  CHECK_THROWS_AS(parse_entry("[2] [2011-03-01 00:00:00] [1] [weather] [null] [1] [5] [x]"), ParseError);
  CHECK_THROWS_AS(parse_entry("[2] [2011-03-01 00:00:00] [1] [geral] [null] [1] [5] [x] y"), ParseError);
}

TEST_CASE("titles may contain an opening bracket but not a closing one") {
  CHECK_THROWS_AS(parse_entry("[5] [2011-03-01 10:00:00] [3] [sport] [related] [9] [12] [Golo [video] final]"),
                  ParseError);
  const auto f = parse_entry("[5] [2011-03-01 10:00:00] [3] [sport] [related] [9] [12] [Golo [aberto]");
  CHECK(f.title == "Golo [aberto");
  CHECK(format_entry(f) == "[5] [2011-03-01 10:00:00] [3] [sport] [related] [9] [12] [Golo [aberto]");
}

TEST_CASE("section labels in both languages") {
  CHECK(canonical_section("desporto") == Section::kSport);
  CHECK(canonical_section("Sport") == Section::kSport);
  CHECK(canonical_section("economia") == Section::kEconomy);
  CHECK(canonical_section("economy") == Section::kEconomy);
  CHECK(canonical_section("tecnologia") == Section::kTechnology);
  CHECK(canonical_section("vida") == Section::kLife);
  CHECK(canonical_section("general") == Section::kGeneral);
  CHECK_FALSE(canonical_section("tempo").has_value());
  const auto e = parse_entry("[1] [2011-03-01 00:00:00] [1] [Desporto] [footer] [1] [1] [a]");
  CHECK(e.section_raw == "Desporto");
  CHECK(format_entry(e).find("[Desporto]") != std::string::npos);
}

TEST_CASE("dataset indexes and first_seen") {
  const auto d = parse_text(
      "# comment\n"
      "[1] [2011-03-01 23:00:00] [1] [geral] [null] [7] [3] [a]\n"
      "\n"
      "[2] [2011-03-01 22:00:00] [1] [geral] [null] [7] [4] [a]\n"
      "[3] [2011-03-01 21:00:00] [1] [geral] [null] [8] [4] [b]\n");
  REQUIRE(d.size() == 3u);
  CHECK(d.first_seen().at(7) == Timestamp{2011, 3, 1, 22, 0, 0});
  CHECK(d.first_seen().at(8) == Timestamp{2011, 3, 1, 21, 0, 0});
  CHECK(d.by_news_id().at(7) == std::vector<std::size_t>{0, 1});
  CHECK(d.by_news_id().at(8) == std::vector<std::size_t>{2});
  CHECK(parse_text("").empty());
  CHECK(write_text(parse_text("")).empty());
}

TEST_CASE("first failing line is reported") {
  const std::string good = "[1] [2011-03-01 00:00:00] [1] [geral] [null] [1] [1] [a]\n";
  try {
    parse_text(good + good + good + "[4] [2011-03-01 00:00:00] [1] [geral]\n");
    FAIL("expected a parse error");
  } catch (const ParseError& err) {
    CHECK(std::string(err.what()).find("line 4") != std::string::npos);
  }
}

TEST_CASE("random datasets round-trip in both formats") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<LinkHourEntry> rows;
    for (int i = 0; i < 100; ++i) rows.push_back(testing::random_entry(rng, i + 1));
    const Dataset d(rows);
    const auto text = write_text(d);
    const auto back = parse_text(text);
    CHECK(back == d);
    CHECK(write_text(back) == text);
    std::ostringstream tsv;
    write_dataset_tsv(d, tsv);
    CHECK(tsv.str().rfind(std::string(kTsvHeader), 0) == 0);
    CHECK(parse_text(tsv.str()) == d);

    for (const auto& [id, idx] : d.by_news_id()) {
      Timestamp lo = d[idx.front()].timestamp;
      for (auto i : idx) lo = std::min(lo, d[i].timestamp);
      CHECK(d.first_seen().at(id) == lo);
    }
    std::size_t total = 0;
    for (const auto& kv : d.by_news_id()) total += kv.second.size();
    CHECK(total == d.size());
  }
  CHECK(write_text(parse_text(kExample + "\n")) == kExample + "\n");
}

TEST_CASE("content and keyphrase sidecars") {
  std::istringstream content("5\thttp://x/5\tcorpo\\tcom\\nlinhas\n6\t\t\n");
  const auto c = parse_content(content);
  REQUIRE(c.size() == 2u);
  CHECK(c.at(5).url == std::optional<std::string>("http://x/5"));
  CHECK(c.at(5).body == "corpo\tcom\nlinhas");
  CHECK_FALSE(c.at(6).url.has_value());
  std::vector<ArticleContent> rows{c.at(5), c.at(6)};
  std::ostringstream out;
  write_content(rows, out);
  std::istringstream again(out.str());
  const auto c2 = parse_content(again);
  CHECK(c2.at(5) == c.at(5));
  CHECK(c2.at(6) == c.at(6));

  std::istringstream kp("  Portugal \t0.9\nmercado\t0.5\n");
  const auto k = parse_keyphrases(kp);
  REQUIRE(k.size() == 2u);
  CHECK(k[0].phrase == "Portugal");
  CHECK(k[1].confidence == 0.5);
  std::istringstream bad1("\t0.9\n"), bad2("x\t1.5\n"), bad3("x\n");
  CHECK_THROWS(parse_keyphrases(bad1));
  CHECK_THROWS(parse_keyphrases(bad2));
  CHECK_THROWS(parse_keyphrases(bad3));
}

TEST_CASE("read_dataset names a missing path") {
  try {
    read_dataset("/nonexistent/missing.dat");
    FAIL("expected IoError");
  } catch (const IoError& err) {
    CHECK(std::string(err.what()).find("missing.dat") != std::string::npos);
  }
}
