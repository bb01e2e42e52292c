#include "newsclick/evaluation.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "newsclick/error.hpp"
#include "newsclick/io.hpp"
#include "newsclick/rng.hpp"

namespace newsclick {

TargetScale parse_target_scale(std::string_view name) {
  if (name == "identity") return TargetScale::kIdentity;
  if (name == "log10") return TargetScale::kLog10;
  if (name == "ln") return TargetScale::kLn;
  throw ParseError("unknown target scale '" + std::string(name) + "' (identity, log10, ln)");
}

std::string_view target_scale_name(TargetScale s) {
  switch (s) {
    case TargetScale::kIdentity: return "identity";
    case TargetScale::kLog10: return "log10";
    case TargetScale::kLn: return "ln";
  }
  return "?";
}

double forward_target(double y, TargetScale scale) {
  if (!(y >= 1.0)) throw ContractViolation("target transform needs clicks >= 1");
  switch (scale) {
    case TargetScale::kIdentity: return y;
    case TargetScale::kLog10: return std::log10(y);
    case TargetScale::kLn: return std::log(y);
  }
  return y;
}

InverseResult inverse_target(double p, TargetScale scale) {
  double v = p;
  switch (scale) {
    case TargetScale::kIdentity: break;
    case TargetScale::kLog10: v = std::pow(10.0, p); break;
    case TargetScale::kLn: v = std::exp(p); break;
  }
  if (std::isinf(v) && v > 0) return {kMaxPrediction, true};
  return {v, false};
}

OutlierKind parse_outlier_kind(std::string_view name) {
  if (name == "none") return OutlierKind::kNone;
  if (name == "all_to_one") return OutlierKind::kAllToOne;
  if (name == "negative_to_one_positive_to_max") return OutlierKind::kNegativeToOnePositiveToMax;
  throw ParseError("unknown outlier policy '" + std::string(name) +
                   "' (none, all_to_one, negative_to_one_positive_to_max)");
}

std::string_view outlier_kind_name(OutlierKind k) {
  switch (k) {
    case OutlierKind::kNone: return "none";
    case OutlierKind::kAllToOne: return "all_to_one";
    case OutlierKind::kNegativeToOnePositiveToMax: return "negative_to_one_positive_to_max";
  }
  return "?";
}

double clip_outliers(double prediction, const OutlierPolicy& policy) {
  if (policy.kind == OutlierKind::kNone) return prediction;
  if (!(policy.train_max_clicks >= 1.0)) throw ContractViolation("outlier clipping needs train_max_clicks >= 1");
  const bool low = !(prediction >= 1.0);  // NaN counts as low
  const bool high = prediction > policy.train_max_clicks;
  if (!low && !high) return prediction;
  if (policy.kind == OutlierKind::kAllToOne || low) return 1.0;
  return policy.train_max_clicks;
}

namespace {

double compensated_sum(std::span<const double> v) {
  double sum = 0.0;
  double carry = 0.0;
  for (const double x : v) {
    const double t = sum + x;
    carry += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  return sum + carry;
}

// Mean rounded to 53 - bit_width(n) significant bits, so that n * mean is
// exactly representable and mean * n / n == mean.
double exact_mean(std::span<const double> v) {
  const double n = static_cast<double>(v.size());
  const double mean = compensated_sum(v) / n;
  if (mean == 0.0 || !std::isfinite(mean)) return mean;
  int exp = 0;
  std::frexp(mean, &exp);
  const int drop = static_cast<int>(std::bit_width(v.size()));
  const double quantum = std::ldexp(1.0, exp - 53 + drop);
  return std::round(mean / quantum) * quantum;
}

}  // namespace

EvalReport compute_metrics(std::span<const double> predictions, std::span<const double> truths) {
  if (predictions.size() != truths.size()) throw ContractViolation("predictions and truths differ in length");
  if (truths.empty()) throw ContractViolation("metrics need at least one row");
  EvalReport r;
  r.n = truths.size();
  r.ae.resize(r.n);
  r.re.resize(r.n);
  for (std::size_t i = 0; i < r.n; ++i) {
    if (!(truths[i] >= 1.0)) throw ContractViolation("row " + std::to_string(i) + ": true clicks must be >= 1");
    r.ae[i] = std::abs(predictions[i] - truths[i]);
    r.re[i] = r.ae[i] / truths[i];
  }
  r.mae = exact_mean(r.ae);
  r.mre = exact_mean(r.re);
  r.cae = r.mae * static_cast<double>(r.n);
  r.cre = r.mre * static_cast<double>(r.n);
  return r;
}

std::string EvalReport::machine_readable() const {
  return "n=" + std::to_string(n) + "\nmae=" + format_double(mae) + "\nmre=" + format_double(mre) +
         "\ncae=" + format_double(cae) + "\ncre=" + format_double(cre) + "\n";
}

std::string EvalReport::human_readable() const {
  char buf[256];
  std::snprintf(buf, sizeof buf, "rows %zu  MAE %.2f  MRE %.2f%%  CAE %.2f  CRE %.2f", n, mae, 100.0 * mre, cae,
                cre);
  std::string out = buf;
  if (!config.empty()) out = config + "\n" + out;
  return out + "\n";
}

std::vector<std::vector<std::size_t>> kfold_split(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ContractViolation("k-fold split needs k >= 2");
  if (k > n) throw ContractViolation("k-fold split needs k <= n (k=" + std::to_string(k) + ", n=" + std::to_string(n) + ")");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i);
    std::swap(order[i], order[pick(rng)]);
  }
  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = n / k + (f < n % k ? 1 : 0);
    folds[f].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                    order.begin() + static_cast<std::ptrdiff_t>(pos + size));
    pos += size;
  }
  return folds;
}

}  // namespace newsclick
