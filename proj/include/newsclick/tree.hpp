#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "newsclick/linear.hpp"
#include "newsclick/matrix.hpp"
#include "newsclick/regressor.hpp"

namespace newsclick {

/// Arena node. Internal when left >= 0; rows with x[feature] <= threshold
/// go left. Every node carries a model: leaves predict with it, and M5P
/// internal nodes use theirs for smoothing.
struct TreeNode {
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  SparseLinearModel model;
  std::size_t n_training = 0;
  double training_sd = 0.0;

  bool is_leaf() const { return left < 0; }
  bool operator==(const TreeNode&) const = default;
};

enum class TreeKind { kM5p, kRepTree };

struct M5Params {
  std::size_t min_leaf_instances = 4;
  double sd_stop_fraction = 0.05;
  double smoothing_constant = 15.0;
  bool use_smoothing = true;
  bool prune = true;
  /// Greedy backward elimination of node-model attributes while the
  /// adjusted error does not increase.
  bool eliminate_attributes = false;

  void validate() const;
  bool operator==(const M5Params&) const = default;
};

struct REPTreeParams {
  std::size_t min_leaf_instances = 2;
  int max_depth = -1;  // < 0: unlimited
  double prune_fraction = 1.0 / 3.0;
  /// Nodes whose target variance is below this fraction of the root
  /// variance are not split.
  double min_variance_fraction = 1e-3;
  std::uint64_t seed = 1;

  void validate() const;
  bool operator==(const REPTreeParams&) const = default;
};

class RegressionTree final : public Regressor {
 public:
  RegressionTree(TreeKind kind, std::size_t width, std::vector<TreeNode> nodes, bool smoothing,
                 double smoothing_constant);

  std::size_t width() const override { return width_; }
  double predict(std::span<const double> x) const override;
  void write(std::ostream& out) const override;

  TreeKind kind() const { return kind_; }
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  bool smoothing() const { return smoothing_; }
  double smoothing_constant() const { return smoothing_constant_; }
  /// Index of the leaf that x routes to.
  std::size_t leaf_for(std::span<const double> x) const;
  std::size_t leaf_count() const;
  std::size_t depth() const;

 private:
  TreeKind kind_;
  std::size_t width_;
  std::vector<TreeNode> nodes_;
  bool smoothing_;
  double smoothing_constant_;
};

struct Split {
  std::size_t feature = 0;
  double threshold = 0.0;
  double score = 0.0;
};

/// sd(y) - |L|/|y| sd(y_L) - |R|/|y| sd(y_R) over y restricted to L ∪ R,
/// population standard deviations. Throws ContractViolation on an empty side.
double sdr(std::span<const double> y, std::span<const std::size_t> left, std::span<const std::size_t> right);

/// SDR-maximising split over midpoints between consecutive distinct values
/// of each candidate feature, both children holding >= min_leaf_instances
/// rows. Ties go to the lowest feature index, then the lowest threshold.
/// Absent when no legal split has positive SDR. Requires
/// rows(X) >= 2 * min_leaf_instances.
std::optional<Split> best_split(const Matrix& X, std::span<const double> y,
                                std::span<const std::size_t> candidate_features, std::size_t min_leaf_instances);

/// Relative tolerance under which two split scores count as tied.
inline constexpr double kSplitTieTolerance = 1e-12;

RegressionTree fit_m5p(const Matrix& X, std::span<const double> y, const M5Params& params);

struct RepTreeDiagnostics {
  std::size_t grow_rows = 0;
  std::size_t prune_rows = 0;
  std::size_t nodes_before_pruning = 0;
  std::size_t nodes_after_pruning = 0;
  /// Prune-set squared error with grow-set leaf values, before and after
  /// reduced-error pruning (back-fitting happens afterwards).
  double prune_sse_before = 0.0;
  double prune_sse_after = 0.0;
};

RegressionTree fit_reptree(const Matrix& X, std::span<const double> y, const REPTreeParams& params,
                           RepTreeDiagnostics* diagnostics = nullptr);

}  // namespace newsclick
