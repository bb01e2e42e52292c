#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "newsclick/data_model.hpp"

namespace newsclick {

struct SynthParams {
  int n_links = 1217;
  int days = 15;
  /// Per-link base clicks are log-normal in natural-log space.
  double popularity_mu = 3.0;
  double popularity_sigma = 1.2;
  std::array<double, 24> hourly_multiplier = {0.6, 0.4, 0.3, 0.2, 0.2, 0.3, 0.5, 0.8, 1.1, 1.5, 1.2, 1.2,
                                              1.5, 1.2, 1.1, 1.1, 1.1, 1.1, 1.1, 1.2, 1.2, 1.3, 1.5, 1.0};
  double half_life_hours = 24.0;
  /// Indexed by Subsection: manchete, headlines, related, footer, null.
  std::array<double, kSubsectionCount> subsection_multiplier = {4.0, 2.0, 1.0, 0.4, 0.7};
  int channels = 18;
  /// Mean number of hours a link stays on the front page.
  double mean_hours_shown = 11.0;
  Timestamp start{2012, 3, 1, 0, 0, 0};
  std::uint64_t seed = 42;

  /// Throws ValidationError.
  void validate() const;
};

/// A generated dataset plus matching side inputs for every feature group.
struct SynthOutput {
  Dataset dataset;
  std::vector<ArticleContent> content;
  std::vector<KeyphraseEntry> keyphrases;
  std::unordered_map<std::string, std::int64_t> title_hits;    // title -> count
  std::unordered_map<std::string, SocialMetadata> social;      // url -> counts
};

/// Built-in keyphrase vocabulary woven into generated titles.
const std::vector<std::string>& synth_keyphrase_vocabulary();

/// Expected clicks of a link in one hour: base * hourly * subsection *
/// channel * 2^(-elapsed / half_life); realised as max(1, Poisson).
SynthOutput synth_generate(const SynthParams& p);

/// Paths written by write_synth next to the dataset file.
struct SynthFiles {
  std::filesystem::path dataset;
  std::filesystem::path content;
  std::filesystem::path keyphrases;
  std::filesystem::path title_hits;
  std::filesystem::path social;

  /// `<stem>.content.tsv` and friends beside `dataset`.
  static SynthFiles beside(const std::filesystem::path& dataset);
};

/// Writes every non-empty path atomically.
void write_synth(const SynthOutput& out, const SynthFiles& files);

}  // namespace newsclick
