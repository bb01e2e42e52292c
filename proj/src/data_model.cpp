#include "newsclick/data_model.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <istream>
#include <ostream>

#include "newsclick/error.hpp"
#include "newsclick/io.hpp"
#include "newsclick/log.hpp"
#include "newsclick/text.hpp"

namespace newsclick {
namespace {

constexpr std::array<std::string_view, kSectionCount> kSectionTags = {"general", "sport", "economy", "technology",
                                                                      "life"};
constexpr std::array<std::string_view, kSubsectionCount> kSubsectionNames = {"manchete", "headlines", "related",
                                                                             "footer", "null"};

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

[[noreturn]] void entry_error(std::string_view line, int field, const std::string& what) {
  throw ParseError("field " + std::to_string(field) + ": " + what + " in record '" + std::string(line) + "'");
}

std::int64_t int_field(std::string_view line, int field, std::string_view text) {
  try {
    return parse_int(text);
  } catch (const ParseError&) {
    entry_error(line, field, "'" + std::string(text) + "' is not a base-10 integer");
  }
}

LinkHourEntry build_entry(std::string_view line, const std::array<std::string_view, 8>& f) {
  LinkHourEntry e;
  e.line_number = int_field(line, 1, f[0]);
  try {
    e.timestamp = Timestamp::parse(f[1]);
  } catch (const ParseError& err) {
    entry_error(line, 2, err.what());
  }
  e.channel_id = int_field(line, 3, f[2]);
  e.section_raw = std::string(f[3]);
  const auto section = canonical_section(f[3]);
  if (!section) entry_error(line, 4, "unknown section \"" + std::string(f[3]) + "\"");
  e.section = *section;
  const auto sub = parse_subsection(f[4]);
  if (!sub) entry_error(line, 5, "unknown subsection \"" + std::string(f[4]) + "\"");
  e.subsection = *sub;
  e.news_id = int_field(line, 6, f[5]);
  e.clicks = int_field(line, 7, f[6]);
  e.title = std::string(f[7]);
  if (e.line_number < 1) {
    throw ValidationError("line number must be positive in record '" + std::string(line) + "'");
  }
  if (e.clicks < 1) {
    throw ValidationError("clicks must be >= 1 (got " + std::to_string(e.clicks) + ") in record '" +
                          std::string(line) + "'");
  }
  return e;
}

std::string_view strip_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

bool skippable(std::string_view line) {
  return line.find_first_not_of(" \t") == std::string_view::npos || line.front() == '#';
}

[[noreturn]] void rethrow_with_line(std::size_t line_no, const Error& err, bool validation) {
  const std::string msg = "line " + std::to_string(line_no) + ": " + err.what();
  if (validation) throw ValidationError(msg);
  throw ParseError(msg);
}

}  // namespace

std::optional<Section> canonical_section(std::string_view raw) {
  const auto s = ascii_lower(raw);
  if (s == "geral" || s == "general") return Section::kGeneral;
  if (s == "desporto" || s == "sport") return Section::kSport;
  if (s == "economia" || s == "economy") return Section::kEconomy;
  if (s == "tecnologia" || s == "technology") return Section::kTechnology;
  if (s == "vida" || s == "life") return Section::kLife;
  return std::nullopt;
}

std::string_view section_tag(Section s) { return kSectionTags[static_cast<std::size_t>(s)]; }

std::optional<Subsection> parse_subsection(std::string_view raw) {
  for (std::size_t i = 0; i < kSubsectionNames.size(); ++i) {
    if (kSubsectionNames[i] == raw) return static_cast<Subsection>(i);
  }
  return std::nullopt;
}

std::string_view subsection_name(Subsection s) { return kSubsectionNames[static_cast<std::size_t>(s)]; }

LinkHourEntry parse_entry(std::string_view line) {
  line = strip_cr(line);
  std::array<std::string_view, 8> fields;
  std::size_t pos = 0;
  for (int f = 0; f < 7; ++f) {
    if (pos >= line.size() || line[pos] != '[') entry_error(line, f + 1, "expected '['");
    const auto close = line.find(']', pos + 1);
    if (close == std::string_view::npos) entry_error(line, f + 1, "missing ']'");
    fields[f] = line.substr(pos + 1, close - pos - 1);
    pos = close + 1;
    if (pos >= line.size() || line[pos] != ' ') entry_error(line, f + 2, "expected a single space before the field");
    ++pos;
  }
  if (pos >= line.size() || line[pos] != '[') entry_error(line, 8, "expected '['");
  if (line.back() != ']' || line.size() < pos + 2) entry_error(line, 8, "record must end with ']'");
  fields[7] = line.substr(pos + 1, line.size() - pos - 2);
  if (fields[7].find(']') != std::string_view::npos) entry_error(line, 8, "title may not contain ']'");
  return build_entry(line, fields);
}

std::string format_entry(const LinkHourEntry& e) {
  std::string out;
  out.reserve(64 + e.title.size());
  out += '[' + std::to_string(e.line_number) + "] [" + e.timestamp.to_string() + "] [" +
         std::to_string(e.channel_id) + "] [" + e.section_raw + "] [" + std::string(subsection_name(e.subsection)) +
         "] [" + std::to_string(e.news_id) + "] [" + std::to_string(e.clicks) + "] [" + e.title + ']';
  return out;
}

LinkHourEntry parse_entry_tsv(std::string_view line) {
  line = strip_cr(line);
  const auto cols = text::split(line, '\t');
  if (cols.size() != 8) {
    throw ParseError("expected 8 tab-separated columns, got " + std::to_string(cols.size()) + " in record '" +
                     std::string(line) + "'");
  }
  std::array<std::string_view, 8> fields;
  std::copy(cols.begin(), cols.end(), fields.begin());
  return build_entry(line, fields);
}

std::string format_entry_tsv(const LinkHourEntry& e) {
  return std::to_string(e.line_number) + '\t' + e.timestamp.to_string() + '\t' + std::to_string(e.channel_id) +
         '\t' + e.section_raw + '\t' + std::string(subsection_name(e.subsection)) + '\t' +
         std::to_string(e.news_id) + '\t' + std::to_string(e.clicks) + '\t' + e.title;
}

Dataset::Dataset(std::vector<LinkHourEntry> entries) : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    by_news_id_[e.news_id].push_back(i);
    auto [it, inserted] = first_seen_.try_emplace(e.news_id, e.timestamp);
    if (!inserted && e.timestamp < it->second) it->second = e.timestamp;
  }
}

Dataset parse_dataset(std::istream& in) {
  std::vector<LinkHourEntry> entries;
  std::string raw;
  std::size_t line_no = 0;
  bool tsv = false;
  bool first = true;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = strip_cr(raw);
    if (skippable(line)) continue;
    if (first) {
      first = false;
      if (line == kTsvHeader) {
        tsv = true;
        continue;
      }
    }
    try {
      entries.push_back(tsv ? parse_entry_tsv(line) : parse_entry(line));
    } catch (const ValidationError& err) {
      rethrow_with_line(line_no, err, true);
    } catch (const ParseError& err) {
      rethrow_with_line(line_no, err, false);
    }
  }
  if (in.bad()) throw IoError("read failure while parsing dataset");
  return Dataset(std::move(entries));
}

Dataset read_dataset(const std::filesystem::path& path) {
  auto in = open_input(path);
  try {
    return parse_dataset(in);
  } catch (const ValidationError& err) {
    throw ValidationError(path.string() + ": " + err.what());
  } catch (const ParseError& err) {
    throw ParseError(path.string() + ": " + err.what());
  }
}

void write_dataset(const Dataset& d, std::ostream& out) {
  for (const auto& e : d.entries()) out << format_entry(e) << '\n';
  if (!out) throw IoError("failed writing dataset");
}

void write_dataset_tsv(const Dataset& d, std::ostream& out) {
  out << kTsvHeader << '\n';
  for (const auto& e : d.entries()) {
    if (e.title.find('\t') != std::string::npos) {
      throw ValidationError("title of line " + std::to_string(e.line_number) + " contains a tab");
    }
    out << format_entry_tsv(e) << '\n';
  }
  if (!out) throw IoError("failed writing dataset");
}

ContentMap parse_content(std::istream& in) {
  ContentMap out;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = strip_cr(raw);
    if (skippable(line)) continue;
    const auto cols = text::split(line, '\t');
    if (cols.size() != 3) {
      throw ParseError("content line " + std::to_string(line_no) + ": expected news_id<TAB>url<TAB>body");
    }
    ArticleContent c;
    try {
      c.news_id = parse_int(cols[0]);
      if (!cols[1].empty()) c.url = text::unescape_field(cols[1]);
      c.body = text::unescape_field(cols[2]);
    } catch (const ParseError& err) {
      throw ParseError("content line " + std::to_string(line_no) + ": " + err.what());
    }
    if (out.contains(c.news_id)) {
      warn("content line " + std::to_string(line_no) + ": duplicate news_id " + std::to_string(c.news_id) +
           " ignored");
      continue;
    }
    out.emplace(c.news_id, std::move(c));
  }
  return out;
}

ContentMap read_content(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_content(in);
}

void write_content(std::span<const ArticleContent> rows, std::ostream& out) {
  for (const auto& c : rows) {
    out << c.news_id << '\t' << text::escape_field(c.url.value_or("")) << '\t' << text::escape_field(c.body)
        << '\n';
  }
  if (!out) throw IoError("failed writing content sidecar");
}

std::vector<KeyphraseEntry> parse_keyphrases(std::istream& in) {
  std::vector<KeyphraseEntry> out;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = strip_cr(raw);
    if (skippable(line)) continue;
    const auto cols = text::split(line, '\t');
    const auto where = "keyphrase line " + std::to_string(line_no) + ": ";
    if (cols.size() != 2) throw ParseError(where + "expected phrase<TAB>confidence");
    KeyphraseEntry k;
    k.phrase = text::trim(cols[0]);
    if (k.phrase.empty()) throw ValidationError(where + "empty phrase");
    try {
      k.confidence = parse_double(text::trim(cols[1]));
    } catch (const ParseError& err) {
      throw ParseError(where + err.what());
    }
    if (!(k.confidence >= 0.0 && k.confidence <= 1.0)) throw ValidationError(where + "confidence outside [0, 1]");
    out.push_back(std::move(k));
  }
  return out;
}

std::vector<KeyphraseEntry> read_keyphrases(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_keyphrases(in);
}

void write_keyphrases(std::span<const KeyphraseEntry> rows, std::ostream& out) {
  for (const auto& k : rows) out << k.phrase << '\t' << format_double(k.confidence) << '\n';
  if (!out) throw IoError("failed writing keyphrases");
}

}  // namespace newsclick
