#include "newsclick/features.hpp"

#include <algorithm>
#include <unordered_set>

#include "newsclick/error.hpp"
#include "newsclick/text.hpp"

namespace newsclick {
namespace {

bool is_quote(char32_t c) {
  switch (c) {
    case U'"': case U'\'': case 0x201C: case 0x201D: case 0x2018: case 0x2019: case 0xAB: case 0xBB:
      return true;
    default:
      return false;
  }
}

bool is_short_acronym(const std::u32string& token) {
  if (token.size() > 2) return false;
  return std::all_of(token.begin(), token.end(), [](char32_t c) { return text::is_upper(c); });
}

std::u32string lowered(std::string_view s) {
  auto u = text::decode_utf8(s);
  for (auto& c : u) c = text::to_lower(c);
  return u;
}

}  // namespace

int count_named_entities(std::string_view title) {
  const auto tokens = text::split_whitespace(text::decode_utf8(title));
  int count = 0;
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    const auto& tok = tokens[i];
    const auto first = std::find_if(tok.begin(), tok.end(), [](char32_t c) { return text::is_alnum(c); });
    if (first == tok.end() || !text::is_upper(*first)) continue;
    if (is_short_acronym(tok)) continue;
    ++count;
  }
  return count;
}

StyleFeatures stylometric_features(std::string_view title) {
  const auto decoded = text::decode_utf8(title);
  const auto tokens = text::split_whitespace(decoded);
  StyleFeatures f;
  f.word_count = static_cast<int>(tokens.size());
  if (!tokens.empty()) {
    f.min_word_len = static_cast<int>(tokens.front().size());
    for (const auto& t : tokens) {
      f.max_word_len = std::max(f.max_word_len, static_cast<int>(t.size()));
      f.min_word_len = std::min(f.min_word_len, static_cast<int>(t.size()));
    }
  }
  for (char32_t c : decoded) {
    if (is_quote(c)) ++f.quote_count;
    if (text::is_upper(c)) ++f.capital_letter_count;
  }
  f.named_entity_count = count_named_entities(title);
  return f;
}

std::vector<KeyphraseEntry> filter_keyphrases(std::span<const KeyphraseEntry> list, double min_confidence) {
  if (!(min_confidence >= 0.0 && min_confidence <= 1.0)) {
    throw ContractViolation("keyphrase confidence threshold must lie in [0, 1]");
  }
  std::vector<KeyphraseEntry> out;
  std::unordered_set<std::u32string> seen;
  for (const auto& k : list) {
    if (k.confidence < min_confidence) continue;
    if (!seen.insert(lowered(k.phrase)).second) continue;
    out.push_back(k);
  }
  return out;
}

std::vector<int> keyphrase_counts(std::string_view text_in, std::span<const KeyphraseEntry> phrases) {
  const auto tokens = text::word_tokens(text::decode_utf8(text_in));
  std::vector<int> counts;
  counts.reserve(phrases.size());
  for (const auto& p : phrases) {
    const auto needle = text::word_tokens(text::decode_utf8(p.phrase));
    int count = 0;
    if (!needle.empty() && needle.size() <= tokens.size()) {
      std::size_t i = 0;
      while (i + needle.size() <= tokens.size()) {
        if (std::equal(needle.begin(), needle.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) {
          ++count;
          i += needle.size();
        } else {
          ++i;
        }
      }
    }
    counts.push_back(count);
  }
  return counts;
}

TimeFeatures time_features(const Timestamp& entry_time, const Timestamp& first_pub) {
  const auto elapsed = entry_time.epoch_seconds() - first_pub.epoch_seconds();
  if (elapsed < 0) {
    throw ContractViolation("entry time " + entry_time.to_string() + " precedes first publication " +
                            first_pub.to_string());
  }
  TimeFeatures t;
  t.day_of_week = static_cast<int>(entry_time.day_of_week());
  t.hour_of_day = static_cast<int>(entry_time.hour);
  t.hours_since_first_publication = elapsed / 3600;
  return t;
}

FeatureGroups FeatureGroups::parse(std::string_view list) {
  FeatureGroups g{false, false, false, false, false, false};
  for (auto item : text::split(list, ',')) {
    const auto name = text::trim(item);
    if (name == "all") {
      g = all();
    } else if (name == "base") {
      g.base = true;
    } else if (name == "f1") {
      g.f1 = true;
    } else if (name == "f2") {
      g.f2 = true;
    } else if (name == "f3") {
      g.f3 = true;
    } else if (name == "f4") {
      g.f4 = true;
    } else if (name == "f5") {
      g.f5 = true;
    } else {
      throw ParseError("unknown feature group '" + name + "'");
    }
  }
  return g;
}

bool FeatureGroups::active(FeatureGroup g) const {
  switch (g) {
    case FeatureGroup::kBase: return base;
    case FeatureGroup::kF1: return f1;
    case FeatureGroup::kF2: return f2;
    case FeatureGroup::kF3: return f3;
    case FeatureGroup::kF4: return f4;
    case FeatureGroup::kF5: return f5;
  }
  return false;
}

std::string FeatureGroups::to_string() const {
  std::string out;
  const std::pair<bool, const char*> names[] = {{base, "base"}, {f1, "f1"}, {f2, "f2"},
                                                {f3, "f3"},     {f4, "f4"}, {f5, "f5"}};
  for (const auto& [on, name] : names) {
    if (!on) continue;
    if (!out.empty()) out += ',';
    out += name;
  }
  return out;
}

void FeatureSchema::add(FeatureSpec spec) {
  for (const auto& f : features_) {
    if (f.name == spec.name) throw ValidationError("duplicate feature name '" + spec.name + "'");
  }
  if (spec.kind == FeatureSpec::Kind::kNominal && spec.categories.empty()) {
    throw ValidationError("nominal feature '" + spec.name + "' has no categories");
  }
  width_ += spec.kind == FeatureSpec::Kind::kNominal ? spec.categories.size() : 1;
  features_.push_back(std::move(spec));
}

FeatureSchema FeatureSchema::build(FeatureGroups groups, std::span<const std::int64_t> channels,
                                   std::span<const KeyphraseEntry> phrases) {
  using Kind = FeatureSpec::Kind;
  FeatureSchema s;
  s.groups_ = groups;
  if (groups.base) {
    std::vector<std::int64_t> ids(channels.begin(), channels.end());
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    std::vector<std::string> cats;
    for (auto id : ids) cats.push_back(std::to_string(id));
    s.add({"channel", Kind::kNominal, FeatureGroup::kBase, std::move(cats)});
    std::vector<std::string> sections;
    for (std::size_t i = 0; i < kSectionCount; ++i) sections.emplace_back(section_tag(static_cast<Section>(i)));
    s.add({"section", Kind::kNominal, FeatureGroup::kBase, std::move(sections)});
    std::vector<std::string> subs;
    for (std::size_t i = 0; i < kSubsectionCount; ++i) subs.emplace_back(subsection_name(static_cast<Subsection>(i)));
    s.add({"subsection", Kind::kNominal, FeatureGroup::kBase, std::move(subs)});
    // hour-of-day lives under F5 when that group is active
    if (!groups.f5) s.add({"hour_of_day", Kind::kNumeric, FeatureGroup::kBase, {}});
  }
  if (groups.f1) s.add({"title_hits", Kind::kNumeric, FeatureGroup::kF1, {}});
  if (groups.f2) {
    for (const char* n : {"fb_shares", "fb_likes", "fb_comments", "fb_total"}) {
      s.add({n, Kind::kNumeric, FeatureGroup::kF2, {}});
    }
  }
  if (groups.f3) {
    s.phrases_.assign(phrases.begin(), phrases.end());
    for (const auto& p : phrases) s.add({"kp:" + p.phrase, Kind::kNumeric, FeatureGroup::kF3, {}});
  }
  if (groups.f4) {
    for (const char* n : {"word_count", "max_word_len", "min_word_len", "quote_count", "capital_letter_count",
                          "named_entity_count"}) {
      s.add({n, Kind::kNumeric, FeatureGroup::kF4, {}});
    }
  }
  if (groups.f5) {
    for (const char* n : {"day_of_week", "hour_of_day", "hours_since_first_publication"}) {
      s.add({n, Kind::kNumeric, FeatureGroup::kF5, {}});
    }
  }
  if (s.width_ == 0) throw ValidationError("feature schema has no columns; activate at least one group");
  return s;
}

std::vector<std::string> FeatureSchema::column_names() const {
  std::vector<std::string> out;
  out.reserve(width_);
  for (const auto& f : features_) {
    if (f.kind == FeatureSpec::Kind::kNumeric) {
      out.push_back(f.name);
    } else {
      for (const auto& c : f.categories) out.push_back(f.name + "=" + c);
    }
  }
  return out;
}

FeatureVector assemble_vector(const LinkHourEntry& entry, const FeatureInputs& inputs, const FeatureSchema& schema,
                              UnseenCategory unseen) {
  FeatureVector v;
  v.values.reserve(schema.expanded_width());
  v.missing_mask.reserve(schema.expanded_width());
  auto push = [&](double value, bool missing = false) {
    v.values.push_back(missing ? 0.0 : value);
    v.missing_mask.push_back(missing);
  };

  std::optional<StyleFeatures> style;
  if (inputs.style) style = *inputs.style;
  std::optional<TimeFeatures> time;
  std::optional<std::vector<int>> kp_counts;
  if (inputs.keyphrase_counts) kp_counts = *inputs.keyphrase_counts;
  std::size_t kp_next = 0;

  for (const auto& f : schema.features()) {
    if (f.kind == FeatureSpec::Kind::kNominal) {
      std::string value;
      if (f.name == "channel") {
        value = std::to_string(entry.channel_id);
      } else if (f.name == "section") {
        value = section_tag(entry.section);
      } else if (f.name == "subsection") {
        value = subsection_name(entry.subsection);
      } else {
        throw ValidationError("no source for nominal feature '" + f.name + "'");
      }
      const auto it = std::find(f.categories.begin(), f.categories.end(), value);
      if (it == f.categories.end()) {
        if (unseen == UnseenCategory::kError) {
          throw ValidationError("value '" + value + "' of feature '" + f.name + "' is not in the schema");
        }
        for (std::size_t i = 0; i < f.categories.size(); ++i) push(0.0, true);
        continue;
      }
      const auto hot = static_cast<std::size_t>(it - f.categories.begin());
      for (std::size_t i = 0; i < f.categories.size(); ++i) push(i == hot ? 1.0 : 0.0);
      continue;
    }

    switch (f.group) {
      case FeatureGroup::kBase:
        push(entry.timestamp.hour);  // hour_of_day
        break;
      case FeatureGroup::kF1:
        push(inputs.title_hits ? static_cast<double>(*inputs.title_hits) : 0.0, !inputs.title_hits);
        break;
      case FeatureGroup::kF2: {
        if (!inputs.social) {
          push(0.0, true);
          break;
        }
        const auto& s = *inputs.social;
        const double value = f.name == "fb_shares"  ? s.shares
                             : f.name == "fb_likes" ? s.likes
                             : f.name == "fb_comments" ? s.comments
                                                       : s.total;
        push(value);
        break;
      }
      case FeatureGroup::kF3: {
        if (!kp_counts) {
          std::string text = entry.title;
          if (inputs.content && !inputs.content->body.empty()) {
            text += ' ';
            text += inputs.content->body;
          }
          kp_counts = keyphrase_counts(text, schema.phrases());
        }
        push((*kp_counts)[kp_next++]);
        break;
      }
      case FeatureGroup::kF4: {
        if (!style) style = stylometric_features(entry.title);
        const auto& s = *style;
        const double value = f.name == "word_count"             ? s.word_count
                             : f.name == "max_word_len"         ? s.max_word_len
                             : f.name == "min_word_len"         ? s.min_word_len
                             : f.name == "quote_count"          ? s.quote_count
                             : f.name == "capital_letter_count" ? s.capital_letter_count
                                                                : s.named_entity_count;
        push(value);
        break;
      }
      case FeatureGroup::kF5: {
        if (!time) time = time_features(entry.timestamp, inputs.first_seen);
        const double value = f.name == "day_of_week"   ? time->day_of_week
                             : f.name == "hour_of_day" ? time->hour_of_day
                                                       : static_cast<double>(time->hours_since_first_publication);
        push(value);
        break;
      }
    }
  }
  return v;
}

}  // namespace newsclick
