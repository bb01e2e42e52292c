#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace newsclick {

enum class TargetScale { kIdentity, kLog10, kLn };

TargetScale parse_target_scale(std::string_view name);
std::string_view target_scale_name(TargetScale s);

/// Maps clicks (>= 1) into model space. Throws ContractViolation for y < 1.
double forward_target(double y, TargetScale scale);

/// Largest value inverse_target returns; overflowing results clamp here.
inline constexpr double kMaxPrediction = std::numeric_limits<double>::max();

struct InverseResult {
  double value = 0.0;
  bool clamped = false;  // the exact inverse overflowed
};

/// Maps a model-space output back to clicks: identity, 10^p or e^p. No
/// rounding or clipping.
InverseResult inverse_target(double p, TargetScale scale);

enum class OutlierKind { kNone, kAllToOne, kNegativeToOnePositiveToMax };

OutlierKind parse_outlier_kind(std::string_view name);
std::string_view outlier_kind_name(OutlierKind k);

struct OutlierPolicy {
  OutlierKind kind = OutlierKind::kAllToOne;
  /// Largest click count seen in training; fixed when the pipeline is fit.
  double train_max_clicks = 0.0;
};

/// A prediction is an outlier when it is below 1 or above train_max_clicks.
/// kAllToOne maps every outlier to 1; kNegativeToOnePositiveToMax maps low
/// ones to 1 and high ones to train_max_clicks.
double clip_outliers(double prediction, const OutlierPolicy& policy);

/// Absolute/relative error per row plus their sums and means. The means are
/// compensated sums divided by n and rounded so that cae == n * mae and
/// mae == cae / n hold exactly in double arithmetic (likewise cre and mre);
/// cae then differs from the summed ae by at most a few ulps.
struct EvalReport {
  std::size_t n = 0;
  std::vector<double> ae;
  std::vector<double> re;
  double cae = 0.0;
  double cre = 0.0;
  double mae = 0.0;
  double mre = 0.0;
  std::string config;

  /// `n=`, `mae=`, `mre=`, `cae=`, `cre=` lines with 17 significant digits.
  std::string machine_readable() const;
  std::string human_readable() const;
};

/// Requires equal lengths, n >= 1 and every truth >= 1.
EvalReport compute_metrics(std::span<const double> predictions, std::span<const double> truths);

/// Seeded shuffle of 0..n-1 cut into k contiguous folds; the first n % k
/// folds hold one extra index. Requires 2 <= k <= n.
std::vector<std::vector<std::size_t>> kfold_split(std::size_t n, std::size_t k, std::uint64_t seed);

}  // namespace newsclick
