#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "newsclick/data_model.hpp"
#include "newsclick/enrichment.hpp"
#include "newsclick/ensembles.hpp"
#include "newsclick/evaluation.hpp"
#include "newsclick/features.hpp"

namespace newsclick {

struct PipelineConfig {
  FeatureGroups groups = FeatureGroups::all();
  std::optional<std::filesystem::path> keyphrases_path;
  std::optional<std::filesystem::path> content_path;
  double keyphrase_min_confidence = 0.5;
  std::optional<ProviderConfig> title_hits_provider;
  std::optional<ProviderConfig> social_provider;
  std::optional<std::filesystem::path> cache_dir;
  LearnerSpec learner = default_learner();
  TargetScale scale = TargetScale::kLog10;
  OutlierKind outlier = OutlierKind::kAllToOne;
  int cv_folds = 10;
  std::uint64_t seed = 1;

  /// Throws ValidationError on out-of-range values or missing files.
  void validate() const;
};

/// Side inputs consulted while assembling feature vectors.
struct PipelineInputs {
  ContentMap content;
  EnrichmentMap enrichment;
  std::vector<KeyphraseEntry> keyphrases;  // unfiltered, as read
};

/// Reads the content sidecar and keyphrase list named by cfg and runs the
/// configured providers (through the cache when one is configured).
PipelineInputs load_inputs(const PipelineConfig& cfg, const Dataset& d);

struct TrainingSummary {
  std::size_t n = 0;
  double mean_clicks = 0.0;
  double max_clicks = 0.0;
  std::map<std::int64_t, Timestamp> first_seen;

  bool operator==(const TrainingSummary&) const = default;
};

struct TrainedPipeline {
  FeatureSchema schema;
  std::vector<std::int64_t> channels;
  ModelPtr model;
  std::string learner;  // LearnerSpec::describe() of the fitted learner
  TargetScale scale = TargetScale::kLog10;
  OutlierPolicy policy;
  TrainingSummary summary;
};

/// Feature matrix for `entries` under `schema`. Unseen categories use the
/// all-zero group.
Matrix build_matrix(const FeatureSchema& schema, std::span<const LinkHourEntry> entries,
                    const std::map<std::int64_t, Timestamp>& first_seen, const PipelineInputs& inputs);

TrainedPipeline train_pipeline(const Dataset& d, const PipelineInputs& inputs, const PipelineConfig& cfg);

/// Clicks per entry: model output, inverse transform, outlier clipping.
/// `clamped`, when given, flags rows whose inverse transform overflowed.
std::vector<double> predict_pipeline(const TrainedPipeline& p, std::span<const LinkHourEntry> entries,
                                     const PipelineInputs& inputs, std::vector<bool>* clamped = nullptr);

/// Folds used by cross_validate and the seed each fold's training uses.
std::vector<std::vector<std::size_t>> cv_folds(std::size_t n, const PipelineConfig& cfg);
std::uint64_t fold_seed(std::uint64_t seed, std::size_t fold);

/// Trains on the complement of each fold and scores the fold; one report
/// over all rows, in click space.
EvalReport cross_validate(const Dataset& d, const PipelineInputs& inputs, const PipelineConfig& cfg);

struct AblationRow {
  std::string name;
  FeatureGroups groups;
  EvalReport report;
};

/// Feature groups of the ablation ladder: Base, +F1, +F2, +F3, +F4, +F5.
std::vector<std::pair<std::string, FeatureGroups>> ablation_ladder();
std::vector<AblationRow> ablate(const Dataset& d, const PipelineInputs& inputs, const PipelineConfig& cfg);

/// Configuration echo placed at the top of reports.
std::string describe_config(const PipelineConfig& cfg);

/// Versioned text file holding schema, model, scale, policy and summary.
void save_pipeline(const TrainedPipeline& p, std::ostream& out);
TrainedPipeline load_pipeline(std::istream& in);

}  // namespace newsclick
