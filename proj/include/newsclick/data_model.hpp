#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "newsclick/timestamp.hpp"

namespace newsclick {

enum class Section { kGeneral, kSport, kEconomy, kTechnology, kLife };
enum class Subsection { kManchete, kHeadlines, kRelated, kFooter, kNull };

inline constexpr std::size_t kSectionCount = 5;
inline constexpr std::size_t kSubsectionCount = 5;

/// Maps Portuguese or English section labels (case-insensitive) to a tag.
std::optional<Section> canonical_section(std::string_view raw);
std::string_view section_tag(Section s);
std::optional<Subsection> parse_subsection(std::string_view raw);
std::string_view subsection_name(Subsection s);

/// One hour of clicks on one portal link.
struct LinkHourEntry {
  std::int64_t line_number = 0;
  Timestamp timestamp;
  std::int64_t channel_id = 0;
  std::string section_raw;
  Section section = Section::kGeneral;
  Subsection subsection = Subsection::kNull;
  std::int64_t news_id = 0;
  std::int64_t clicks = 1;
  std::string title;

  bool operator==(const LinkHourEntry&) const = default;
};

/// Parses `[f1] [f2] ... [f8]`. The title is everything between the eighth
/// `[` and the line's final `]`; it may contain `[` but not `]`.
LinkHourEntry parse_entry(std::string_view line);
std::string format_entry(const LinkHourEntry& e);

inline constexpr std::string_view kTsvHeader =
    "line_number\ttimestamp\tchannel_id\tsection\tsubsection\tnews_id\tclicks\ttitle";

LinkHourEntry parse_entry_tsv(std::string_view line);
std::string format_entry_tsv(const LinkHourEntry& e);

/// Immutable, index-carrying collection of link-hour entries.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<LinkHourEntry> entries);

  const std::vector<LinkHourEntry>& entries() const { return entries_; }
  const LinkHourEntry& operator[](std::size_t i) const { return entries_[i]; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  /// news_id -> indices of its entries, in file order.
  const std::map<std::int64_t, std::vector<std::size_t>>& by_news_id() const { return by_news_id_; }
  /// news_id -> earliest timestamp among its entries.
  const std::map<std::int64_t, Timestamp>& first_seen() const { return first_seen_; }

  bool operator==(const Dataset& other) const { return entries_ == other.entries_; }

 private:
  std::vector<LinkHourEntry> entries_;
  std::map<std::int64_t, std::vector<std::size_t>> by_news_id_;
  std::map<std::int64_t, Timestamp> first_seen_;
};

/// Reads the bracketed format, or TSV when the first non-comment line is the
/// TSV header. Blank and `#` lines are skipped. Errors cite the line number.
Dataset parse_dataset(std::istream& in);
Dataset read_dataset(const std::filesystem::path& path);

void write_dataset(const Dataset& d, std::ostream& out);
void write_dataset_tsv(const Dataset& d, std::ostream& out);

/// Pre-extracted article body, keyed by news id.
struct ArticleContent {
  std::int64_t news_id = 0;
  std::optional<std::string> url;
  std::string body;

  bool operator==(const ArticleContent&) const = default;
};

using ContentMap = std::unordered_map<std::int64_t, ArticleContent>;

/// Sidecar format: `news_id<TAB>url<TAB>body`, url and body escaped with
/// text::escape_field; an empty url column means no url.
ContentMap parse_content(std::istream& in);
ContentMap read_content(const std::filesystem::path& path);
void write_content(std::span<const ArticleContent> rows, std::ostream& out);

struct KeyphraseEntry {
  std::string phrase;
  double confidence = 1.0;

  bool operator==(const KeyphraseEntry&) const = default;
};

/// `phrase<TAB>confidence` per line; phrases are trimmed and must be
/// non-empty, confidence must lie in [0, 1].
std::vector<KeyphraseEntry> parse_keyphrases(std::istream& in);
std::vector<KeyphraseEntry> read_keyphrases(const std::filesystem::path& path);
void write_keyphrases(std::span<const KeyphraseEntry> rows, std::ostream& out);

struct SocialMetadata {
  std::int64_t shares = 0;
  std::int64_t likes = 0;
  std::int64_t comments = 0;
  std::int64_t total = 0;

  bool operator==(const SocialMetadata&) const = default;
};

}  // namespace newsclick
