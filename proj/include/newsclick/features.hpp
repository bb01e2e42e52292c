#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "newsclick/data_model.hpp"

namespace newsclick {

/// Title stylometrics (feature group F4).
struct StyleFeatures {
  int word_count = 0;
  int max_word_len = 0;
  int min_word_len = 0;
  int quote_count = 0;
  int capital_letter_count = 0;
  int named_entity_count = 0;

  bool operator==(const StyleFeatures&) const = default;
};

/// Words are whitespace-separated tokens measured in code points. Quotes are
/// any of " “ ” ' ‘ ’ « ». Capitals count uppercase letters, not words.
StyleFeatures stylometric_features(std::string_view title);

/// Proper-noun heuristic: tokens whose first letter (after leading
/// punctuation) is uppercase, skipping the title's first token and all-caps
/// acronyms of at most two letters.
int count_named_entities(std::string_view title);

/// Keeps entries with confidence >= min_confidence, in order, dropping later
/// case-insensitive duplicates.
std::vector<KeyphraseEntry> filter_keyphrases(std::span<const KeyphraseEntry> list, double min_confidence = 0.5);

/// Per-phrase count of non-overlapping, case-insensitive, whole-token matches.
std::vector<int> keyphrase_counts(std::string_view text, std::span<const KeyphraseEntry> phrases);

/// Time-of-publication features (group F5).
struct TimeFeatures {
  int day_of_week = 0;  // Monday = 0
  int hour_of_day = 0;
  std::int64_t hours_since_first_publication = 0;

  bool operator==(const TimeFeatures&) const = default;
};

/// Throws ContractViolation when entry_time precedes first_pub.
TimeFeatures time_features(const Timestamp& entry_time, const Timestamp& first_pub);

enum class FeatureGroup { kBase, kF1, kF2, kF3, kF4, kF5 };

struct FeatureGroups {
  bool base = true;
  bool f1 = false;
  bool f2 = false;
  bool f3 = false;
  bool f4 = false;
  bool f5 = false;

  static FeatureGroups all() { return {true, true, true, true, true, true}; }
  /// Parses "base,f1,f3" or "all"; throws ParseError on unknown names.
  static FeatureGroups parse(std::string_view list);
  bool active(FeatureGroup g) const;
  std::string to_string() const;

  bool operator==(const FeatureGroups&) const = default;
};

struct FeatureSpec {
  enum class Kind { kNumeric, kNominal };

  std::string name;
  Kind kind = Kind::kNumeric;
  FeatureGroup group = FeatureGroup::kBase;
  std::vector<std::string> categories;  // nominal only

  bool operator==(const FeatureSpec&) const = default;
};

/// Frozen description of the learner's input columns. Nominal features are
/// expanded one-hot, one column per category.
class FeatureSchema {
 public:
  FeatureSchema() = default;

  /// Builds the standard layout for the active groups. `channels` are the
  /// channel ids observed in training; `phrases` are the (filtered) F3
  /// keyphrases.
  static FeatureSchema build(FeatureGroups groups, std::span<const std::int64_t> channels,
                             std::span<const KeyphraseEntry> phrases);

  const FeatureGroups& groups() const { return groups_; }
  const std::vector<FeatureSpec>& features() const { return features_; }
  const std::vector<KeyphraseEntry>& phrases() const { return phrases_; }
  std::size_t expanded_width() const { return width_; }
  /// One name per expanded column, e.g. "section=sport".
  std::vector<std::string> column_names() const;

  bool operator==(const FeatureSchema&) const = default;

 private:
  void add(FeatureSpec spec);

  FeatureGroups groups_;
  std::vector<FeatureSpec> features_;
  std::vector<KeyphraseEntry> phrases_;
  std::size_t width_ = 0;
};

struct FeatureVector {
  std::vector<double> values;
  std::vector<bool> missing_mask;
};

/// Optional enrichment consulted by assemble_vector. Absent inputs become
/// masked zeros.
struct FeatureInputs {
  Timestamp first_seen;
  const ArticleContent* content = nullptr;
  std::optional<SocialMetadata> social;
  std::optional<std::int64_t> title_hits;
  /// Precomputed text features for this title and schema; computed on
  /// demand when null.
  const std::vector<int>* keyphrase_counts = nullptr;
  const StyleFeatures* style = nullptr;
};

enum class UnseenCategory {
  kError,        // throw ValidationError naming the feature and value
  kOtherBucket,  // all-zero one-hot group with the mask set
};

FeatureVector assemble_vector(const LinkHourEntry& entry, const FeatureInputs& inputs, const FeatureSchema& schema,
                              UnseenCategory unseen = UnseenCategory::kError);

}  // namespace newsclick
