#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "newsclick/linear.hpp"
#include "newsclick/matrix.hpp"
#include "newsclick/regressor.hpp"
#include "newsclick/tree.hpp"

namespace newsclick {

enum class LearnerKind { kLinear, kRepTree, kM5p, kBagging, kAdditive };

struct LinearParams {
  double ridge_epsilon = kDefaultRidgeEpsilon;
  bool operator==(const LinearParams&) const = default;
};

struct BaggingParams {
  int rounds = 10;
  /// Debug: every round trains on the unresampled data.
  bool identity_resample = false;
  bool operator==(const BaggingParams&) const = default;
};

struct AdditiveParams {
  int iterations = 10;
  double shrinkage = 1.0;
  double subsample_fraction = 0.5;
  bool operator==(const AdditiveParams&) const = default;
};

/// Recursive learner description. Meta learners (bagging, additive) carry
/// the spec of their base learner.
struct LearnerSpec {
  LearnerKind kind = LearnerKind::kM5p;
  std::variant<LinearParams, REPTreeParams, M5Params, BaggingParams, AdditiveParams> params = M5Params{};
  std::shared_ptr<const LearnerSpec> base;

  static LearnerSpec linear(LinearParams p = {});
  static LearnerSpec reptree(REPTreeParams p = {});
  static LearnerSpec m5p(M5Params p = {});
  static LearnerSpec bagging(LearnerSpec base, BaggingParams p = {});
  static LearnerSpec additive(LearnerSpec base, AdditiveParams p = {});

  /// Throws ValidationError on out-of-range parameters or a meta learner
  /// without a base.
  void validate() const;
  /// Compact description such as "additive(bagging(m5p))".
  std::string describe() const;

  bool operator==(const LearnerSpec& other) const;
};

/// The winning stack: additive regression over bagged M5P with defaults.
LearnerSpec default_learner();

/// Fits any learner. `seed` seeds every random choice inside the fit
/// (meta learners derive per-member substreams from it with derive_seed).
ModelPtr fit_learner(const LearnerSpec& spec, const Matrix& X, std::span<const double> y, std::uint64_t seed);

class BaggedModel final : public Regressor {
 public:
  BaggedModel(std::vector<ModelPtr> members, std::uint64_t seed);

  std::size_t width() const override { return width_; }
  /// Arithmetic mean of member predictions.
  double predict(std::span<const double> x) const override;
  void write(std::ostream& out) const override;

  const std::vector<ModelPtr>& members() const { return members_; }
  int rounds() const { return static_cast<int>(members_.size()); }
  std::uint64_t seed() const { return seed_; }

 private:
  std::vector<ModelPtr> members_;
  std::uint64_t seed_;
  std::size_t width_;
};

struct AdditiveStage {
  ModelPtr model;
  double shrinkage = 1.0;
};

class AdditiveModel final : public Regressor {
 public:
  AdditiveModel(std::size_t width, double initial_prediction, std::vector<AdditiveStage> stages,
                double subsample_fraction, std::uint64_t seed);

  std::size_t width() const override { return width_; }
  /// initial_prediction + sum_i shrinkage_i * h_i(x).
  double predict(std::span<const double> x) const override;
  void write(std::ostream& out) const override;

  double initial_prediction() const { return initial_; }
  const std::vector<AdditiveStage>& stages() const { return stages_; }
  double subsample_fraction() const { return subsample_fraction_; }
  std::uint64_t seed() const { return seed_; }

 private:
  std::size_t width_;
  double initial_;
  std::vector<AdditiveStage> stages_;
  double subsample_fraction_;
  std::uint64_t seed_;
};

/// Round r draws n indices with replacement from Rng(derive_seed(seed, 2r))
/// and fits `base` on them with seed derive_seed(seed, 2r + 1).
std::shared_ptr<const BaggedModel> fit_bagging(const LearnerSpec& base, const Matrix& X, std::span<const double> y,
                                               int rounds, std::uint64_t seed, bool identity_resample = false);

/// Least-squares stagewise boosting. Stage i fits `base` on ceil(f * n) rows
/// drawn without replacement from Rng(derive_seed(seed, 2i)) against the
/// current residuals, using fit seed derive_seed(seed, 2i + 1); residuals of
/// all n rows are then reduced by shrinkage * h_i(x).
std::shared_ptr<const AdditiveModel> fit_additive(const LearnerSpec& base, const Matrix& X, std::span<const double> y,
                                                  int iterations, double shrinkage, double subsample_fraction,
                                                  std::uint64_t seed);

/// Additive regression whose base learner is bagged M5P.
std::shared_ptr<const AdditiveModel> fit_combined(const Matrix& X, std::span<const double> y,
                                                  const M5Params& m5_params, int bag_rounds, int ar_iterations,
                                                  double shrinkage, double subsample_fraction, std::uint64_t seed,
                                                  bool identity_resample = false);

}  // namespace newsclick
