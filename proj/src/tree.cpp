#include "newsclick/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "newsclick/error.hpp"
#include "newsclick/io.hpp"
#include "newsclick/rng.hpp"

namespace newsclick {
namespace {

using detail::ColumnData;

// Ridge used for node models; only matters for collinear one-hot columns.
constexpr double kNodeRidge = 1e-8;

enum class Criterion { kSdr, kVariance };

struct NodeStats {
  double mean = 0.0;
  double s1 = 0.0;  // sum of (y - mean), ~0 up to rounding
  double s2 = 0.0;  // sum of (y - mean)^2
  bool constant = true;

  double sd(std::size_t n) const {
    const double m = s1 / static_cast<double>(n);
    return std::sqrt(std::max(0.0, s2 / static_cast<double>(n) - m * m));
  }
  double sse(std::size_t n) const { return std::max(0.0, s2 - s1 * s1 / static_cast<double>(n)); }
};

struct GrowNode {
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::size_t begin = 0;
  std::size_t end = 0;
  double mean = 0.0;
  double sd = 0.0;
};

double split_midpoint(double lo, double hi) {
  const double mid = lo + (hi - lo) / 2.0;
  return mid < hi ? mid : lo;
}

double side_sd(double s1, double s2, double n) {
  const double m = s1 / n;
  const double second = s2 / n;
  const double var = second - m * m;
  // below the cancellation noise of second - m^2 the side is constant
  if (var <= 8.0 * std::numeric_limits<double>::epsilon() * second) return 0.0;
  return std::sqrt(var);
}

// Recursive partitioner over presorted per-feature index lists. The rows of
// every node occupy a contiguous range [begin, end) of rows_ and of each
// sorted_[f].
class Grower {
  struct Entry {
    double value;
    double y;
    std::size_t row;
  };

 public:
  Grower(const ColumnData& data, std::span<const double> y, std::vector<std::size_t> rows, Criterion criterion,
         std::size_t min_leaf)
      : data_(data), y_(y), rows_(std::move(rows)), criterion_(criterion), min_leaf_(min_leaf) {
    goes_left_.assign(data_.rows, 0);
    row_buffer_.resize(rows_.size());
    entry_buffer_.resize(rows_.size());
    sorted_.resize(data_.columns.size());
    for (std::size_t f = 0; f < data_.columns.size(); ++f) {
      const auto& col = data_.columns[f];
      auto& s = sorted_[f];
      s.resize(rows_.size());
      for (std::size_t i = 0; i < rows_.size(); ++i) s[i] = {col[rows_[i]], y_[rows_[i]], rows_[i]};
      std::sort(s.begin(), s.end(), [](const Entry& a, const Entry& b) {
        return a.value != b.value ? a.value < b.value : a.row < b.row;
      });
    }
  }

  const std::vector<std::size_t>& rows() const { return rows_; }

  NodeStats stats(std::size_t b, std::size_t e) const {
    NodeStats st;
    double sum = 0.0;
    for (std::size_t i = b; i < e; ++i) sum += y_[rows_[i]];
    st.mean = sum / static_cast<double>(e - b);
    const double first = y_[rows_[b]];
    for (std::size_t i = b; i < e; ++i) {
      const double v = y_[rows_[i]];
      const double c = v - st.mean;
      st.s1 += c;
      st.s2 += c * c;
      if (v != first) st.constant = false;
    }
    return st;
  }

  std::optional<Split> find_split(std::size_t b, std::size_t e, const NodeStats& st) {
    std::vector<std::uint32_t> active(sorted_.size());
    for (std::size_t f = 0; f < active.size(); ++f) active[f] = static_cast<std::uint32_t>(f);
    return find_split(b, e, st, active);
  }

  // Scans the features in `active`; drops from it those constant on [b, e),
  // which stay constant in every descendant.
  std::optional<Split> find_split(std::size_t b, std::size_t e, const NodeStats& st,
                                  std::vector<std::uint32_t>& active) const {
    if (st.constant) return std::nullopt;
    const std::size_t n = e - b;
    const double nd = static_cast<double>(n);
    const double parent = criterion_ == Criterion::kSdr ? st.sd(n) : st.sse(n);
    const double tol = kSplitTieTolerance * parent;
    std::optional<Split> best;
    double best_score = -std::numeric_limits<double>::infinity();
    std::size_t kept = 0;
    for (const std::uint32_t f : active) {
      const Entry* ent = sorted_[f].data() + b;
      if (ent[0].value == ent[n - 1].value) continue;
      active[kept++] = f;
      double s1 = 0.0;
      double s2 = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const double c = ent[i].y - st.mean;
        s1 += c;
        s2 += c * c;
        const std::size_t nl = i + 1;
        const std::size_t nr = n - nl;
        if (nr < min_leaf_) break;
        if (nl < min_leaf_) continue;
        const double v = ent[i].value;
        const double vn = ent[i + 1].value;
        if (v == vn) continue;
        const double r1 = st.s1 - s1;
        const double r2 = st.s2 - s2;
        double score;
        if (criterion_ == Criterion::kSdr) {
          score = parent - static_cast<double>(nl) / nd * side_sd(s1, s2, static_cast<double>(nl)) -
                  static_cast<double>(nr) / nd * side_sd(r1, r2, static_cast<double>(nr));
        } else {
          score = parent - std::max(0.0, s2 - s1 * s1 / static_cast<double>(nl)) -
                  std::max(0.0, r2 - r1 * r1 / static_cast<double>(nr));
        }
        if (score > best_score + tol) {
          best_score = score;
          best = Split{f, split_midpoint(v, vn), score};
        }
      }
    }
    active.resize(kept);
    if (!best || best->score <= tol) return std::nullopt;
    return best;
  }

  std::size_t partition(std::size_t b, std::size_t e, const Split& split, std::span<const std::uint32_t> active) {
    const auto& col = data_.columns[split.feature];
    for (std::size_t i = b; i < e; ++i) goes_left_[rows_[i]] = col[rows_[i]] <= split.threshold ? 1 : 0;
    const auto mid = stable_partition(rows_, row_buffer_, b, e, [](std::size_t r) { return r; });
    for (const auto f : active)
      stable_partition(sorted_[f], entry_buffer_, b, e, [](const Entry& x) { return x.row; });
    return mid;
  }

  // Grows the subtree over [b, e); `stop` decides whether a node stays a leaf.
  template <class Stop>
  std::int32_t grow(std::vector<GrowNode>& nodes, std::size_t b, std::size_t e, int depth, const Stop& stop) {
    std::vector<std::uint32_t> active(sorted_.size());
    for (std::size_t f = 0; f < active.size(); ++f) active[f] = static_cast<std::uint32_t>(f);
    return grow(nodes, b, e, depth, stop, active);
  }

  template <class Stop>
  std::int32_t grow(std::vector<GrowNode>& nodes, std::size_t b, std::size_t e, int depth, const Stop& stop,
                    std::vector<std::uint32_t> active) {
    const auto st = stats(b, e);
    const auto index = static_cast<std::int32_t>(nodes.size());
    nodes.push_back({-1, 0.0, -1, -1, b, e, st.mean, st.sd(e - b)});
    if (stop(e - b, st, depth)) return index;
    const auto split = find_split(b, e, st, active);
    if (!split) return index;
    const auto mid = partition(b, e, *split, active);
    nodes[index].feature = static_cast<std::int32_t>(split->feature);
    nodes[index].threshold = split->threshold;
    const auto l = grow(nodes, b, mid, depth + 1, stop, active);
    nodes[index].left = l;
    const auto r = grow(nodes, mid, e, depth + 1, stop, std::move(active));
    nodes[index].right = r;
    return index;
  }

 private:
  template <class T, class RowOf>
  std::size_t stable_partition(std::vector<T>& v, std::vector<T>& buffer, std::size_t b, std::size_t e,
                               RowOf row_of) {
    std::size_t write = b;
    std::size_t spill = 0;
    for (std::size_t i = b; i < e; ++i) {
      if (goes_left_[row_of(v[i])]) {
        v[write++] = v[i];
      } else {
        buffer[spill++] = v[i];
      }
    }
    std::copy(buffer.begin(), buffer.begin() + static_cast<std::ptrdiff_t>(spill),
              v.begin() + static_cast<std::ptrdiff_t>(write));
    return write;
  }

  const ColumnData& data_;
  std::span<const double> y_;
  std::vector<std::size_t> rows_;
  Criterion criterion_;
  std::size_t min_leaf_;
  std::vector<std::vector<Entry>> sorted_;
  std::vector<std::uint8_t> goes_left_;
  std::vector<std::size_t> row_buffer_;
  std::vector<Entry> entry_buffer_;
};

double predict_columns(const SparseLinearModel& m, const ColumnData& data, std::size_t row) {
  double s = m.intercept;
  for (std::size_t i = 0; i < m.attributes.size(); ++i) s += m.weights[i] * data.columns[m.attributes[i]][row];
  return s;
}

// Copies the nodes reachable from `root` into a fresh pre-order arena.
std::vector<TreeNode> compact(const std::vector<TreeNode>& nodes, std::int32_t root = 0) {
  std::vector<TreeNode> out;
  struct Frame {
    std::int32_t src;
    std::int32_t parent;
    bool is_left;
  };
  std::vector<Frame> stack{{root, -1, false}};
  while (!stack.empty()) {
    const auto f = stack.back();
    stack.pop_back();
    const auto idx = static_cast<std::int32_t>(out.size());
    out.push_back(nodes[static_cast<std::size_t>(f.src)]);
    if (f.parent >= 0) {
      auto& p = out[static_cast<std::size_t>(f.parent)];
      (f.is_left ? p.left : p.right) = idx;
    }
    const auto& src = nodes[static_cast<std::size_t>(f.src)];
    if (!src.is_leaf()) {
      stack.push_back({src.right, idx, false});
      stack.push_back({src.left, idx, true});
      out.back().left = out.back().right = -1;
      out.back().feature = src.feature;
    }
  }
  return out;
}

// M5 model construction, selection and pruning over a grown tree.
class M5Builder {
 public:
  M5Builder(const ColumnData& data, std::span<const double> y, const std::vector<std::size_t>& rows,
            std::vector<GrowNode> grown, const M5Params& params)
      : data_(data), y_(y), rows_(rows), grown_(std::move(grown)), params_(params) {
    position_.assign(data_.columns.size(), kAbsent);
    for (const auto& g : grown_) {
      if (g.feature < 0) continue;
      auto& pos = position_[static_cast<std::size_t>(g.feature)];
      if (pos != kAbsent) continue;
      pos = split_columns_.size();
      split_columns_.push_back(static_cast<std::size_t>(g.feature));
    }
    reduced_.rows = data_.rows;
    for (auto c : split_columns_) reduced_.columns.push_back(data_.columns[c]);
    nodes_.resize(grown_.size());
    errors_.resize(grown_.size());
    for (std::size_t i = 0; i < grown_.size(); ++i) {
      const auto& g = grown_[i];
      auto& n = nodes_[i];
      n.feature = g.feature;
      n.threshold = g.threshold;
      n.left = g.left;
      n.right = g.right;
      n.n_training = g.end - g.begin;
      n.training_sd = g.sd;
    }
  }

  std::vector<TreeNode> build() {
    std::vector<char> path(data_.columns.size(), 0);
    detail::Moments root;
    fit_models(0, path, root);
    if (params_.prune) prune(0);
    return compact(nodes_);
  }

 private:
  std::span<const std::size_t> node_rows(std::size_t i) const {
    return {rows_.data() + grown_[i].begin, grown_[i].end - grown_[i].begin};
  }

  static double pruning_factor(std::size_t n, std::size_t v) {
    return n > v ? static_cast<double>(n + v) / static_cast<double>(n - v) : 10.0;
  }

  double abs_residual_sum(const SparseLinearModel& m, std::span<const std::size_t> rows) const {
    double abs_sum = 0.0;
    for (auto r : rows) abs_sum += std::abs(y_[r] - predict_columns(m, data_, r));
    return abs_sum;
  }

  // True when rows hold more than `limit` distinct points over `attributes`.
  bool more_distinct_than(std::span<const std::size_t> rows, std::span<const std::size_t> attributes,
                          std::size_t limit) const {
    if (rows.size() <= limit) return false;
    std::vector<std::vector<double>> seen;
    std::vector<double> point(attributes.size());
    for (auto r : rows) {
      for (std::size_t j = 0; j < attributes.size(); ++j) point[j] = data_.columns[attributes[j]][r];
      if (std::find(seen.begin(), seen.end(), point) != seen.end()) continue;
      seen.push_back(point);
      if (seen.size() > limit) return true;
    }
    return false;
  }

  // A linear model with at least as many parameters as distinct points
  // interpolates them and is never eligible.
  double adjusted_error(const SparseLinearModel& m, std::span<const std::size_t> rows) const {
    if (!m.attributes.empty() && !more_distinct_than(rows, m.attributes, m.parameter_count()))
      return std::numeric_limits<double>::infinity();
    return abs_residual_sum(m, rows) / static_cast<double>(rows.size()) *
           pruning_factor(rows.size(), m.parameter_count());
  }

  // Fits on moments over the split columns; attrs are positions in that set.
  SparseLinearModel fit(const detail::Moments& moments, std::span<const std::size_t> attrs) const {
    auto m = detail::fit_sparse_linear(moments, attrs, kNodeRidge);
    for (auto& a : m.attributes) a = split_columns_[a];
    return m;
  }

  std::pair<SparseLinearModel, double> select_model(std::span<const std::size_t> rows, std::vector<std::size_t> attrs,
                                                    const detail::Moments& moments) const {
    SparseLinearModel constant = fit(moments, {});
    const double constant_err = adjusted_error(constant, rows);
    if (attrs.empty()) return {constant, constant_err};
    auto model = fit(moments, attrs);
    double err = adjusted_error(model, rows);
    if (params_.eliminate_attributes) {
      while (attrs.size() > 1) {
        std::optional<std::size_t> drop;
        SparseLinearModel best_model;
        double best_err = err;
        for (std::size_t k = 0; k < attrs.size(); ++k) {
          auto trial = attrs;
          trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(k));
          auto m = fit(moments, trial);
          const double e = adjusted_error(m, rows);
          if (e <= best_err) {
            best_err = e;
            drop = k;
            best_model = std::move(m);
          }
        }
        if (!drop) break;
        attrs.erase(attrs.begin() + static_cast<std::ptrdiff_t>(*drop));
        model = std::move(best_model);
        err = best_err;
      }
    }
    if (constant_err <= err) return {constant, constant_err};
    return {model, err};
  }

  // Returns the split features used in the subtree rooted at i and fills
  // `moments` with the node's centered moments.
  std::vector<char> fit_models(std::size_t i, std::vector<char>& path, detail::Moments& moments) {
    std::vector<char> subtree(data_.columns.size(), 0);
    auto& node = nodes_[i];
    const auto rows = node_rows(i);
    if (!node.is_leaf()) {
      const auto f = static_cast<std::size_t>(node.feature);
      const char saved = path[f];
      path[f] = 1;
      detail::Moments ml, mr;
      const auto l = fit_models(static_cast<std::size_t>(node.left), path, ml);
      const auto r = fit_models(static_cast<std::size_t>(node.right), path, mr);
      path[f] = saved;
      for (std::size_t k = 0; k < subtree.size(); ++k) subtree[k] = l[k] | r[k];
      subtree[f] = 1;
      moments = detail::Moments::combine(ml, mr);
    } else {
      moments = detail::Moments::of(reduced_, y_, rows);
    }
    std::vector<std::size_t> attrs;
    for (std::size_t k = 0; k < subtree.size(); ++k) {
      if (!(path[k] || subtree[k])) continue;
      const auto& col = data_.columns[k];
      const double first = col[rows[0]];
      const bool varies = std::any_of(rows.begin(), rows.end(), [&](std::size_t r) { return col[r] != first; });
      if (varies) attrs.push_back(position_[k]);
    }
    auto [model, err] = select_model(rows, std::move(attrs), moments);
    nodes_[i].model = std::move(model);
    errors_[i] = err;
    return subtree;
  }

  struct SubtreeError {
    double abs_sum;
    std::size_t params;
  };

  // Collapses node i when its own model's adjusted error is no worse than
  // the subtree's: mean absolute residual of the subtree times the factor
  // for its total parameter count (leaf parameters plus one per split).
  SubtreeError prune(std::size_t i) {
    auto& node = nodes_[i];
    const auto rows = node_rows(i);
    if (node.is_leaf()) return {abs_residual_sum(node.model, rows), node.model.parameter_count()};
    const auto l = prune(static_cast<std::size_t>(node.left));
    const auto r = prune(static_cast<std::size_t>(node.right));
    const SubtreeError sub{l.abs_sum + r.abs_sum, l.params + r.params + 1};
    const double sub_err = sub.abs_sum / static_cast<double>(rows.size()) * pruning_factor(rows.size(), sub.params);
    if (errors_[i] <= sub_err) {
      nodes_[i].left = nodes_[i].right = -1;
      nodes_[i].feature = -1;
      nodes_[i].threshold = 0.0;
      return {abs_residual_sum(node.model, rows), node.model.parameter_count()};
    }
    return sub;
  }

  const ColumnData& data_;
  std::span<const double> y_;
  const std::vector<std::size_t>& rows_;
  std::vector<GrowNode> grown_;
  const M5Params& params_;
  static constexpr std::size_t kAbsent = static_cast<std::size_t>(-1);
  std::vector<std::size_t> position_;
  std::vector<std::size_t> split_columns_;
  ColumnData reduced_;
  std::vector<TreeNode> nodes_;
  std::vector<double> errors_;
};

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i] = i;
  return rows;
}

void check_xy(const Matrix& X, std::span<const double> y) {
  if (X.rows() != y.size()) throw ContractViolation("rows(X) must equal len(y)");
}

}  // namespace

void M5Params::validate() const {
  if (min_leaf_instances < 1) throw ValidationError("m5p min_leaf_instances must be >= 1");
  if (!(sd_stop_fraction > 0.0 && sd_stop_fraction < 1.0)) throw ValidationError("m5p sd_stop_fraction must lie in (0, 1)");
  if (!(smoothing_constant >= 0.0)) throw ValidationError("m5p smoothing_constant must be >= 0");
}

void REPTreeParams::validate() const {
  if (min_leaf_instances < 1) throw ValidationError("reptree min_leaf_instances must be >= 1");
  if (!(prune_fraction > 0.0 && prune_fraction < 1.0)) throw ValidationError("reptree prune_fraction must lie in (0, 1)");
  if (!(min_variance_fraction >= 0.0)) throw ValidationError("reptree min_variance_fraction must be >= 0");
}

RegressionTree::RegressionTree(TreeKind kind, std::size_t width, std::vector<TreeNode> nodes, bool smoothing,
                               double smoothing_constant)
    : kind_(kind), width_(width), nodes_(std::move(nodes)), smoothing_(smoothing),
      smoothing_constant_(smoothing_constant) {
  if (nodes_.empty()) throw ContractViolation("a tree needs at least one node");
  for (const auto& n : nodes_) {
    if (n.is_leaf()) {
      if (n.right >= 0) throw ValidationError("tree node has a right child but no left child");
      continue;
    }
    const auto count = static_cast<std::int32_t>(nodes_.size());
    if (n.right < 0 || n.left >= count || n.right >= count || n.feature < 0 ||
        static_cast<std::size_t>(n.feature) >= width_) {
      throw ValidationError("malformed internal tree node");
    }
  }
  for (const auto& n : nodes_) {
    for (auto a : n.model.attributes) {
      if (a >= width_) throw ValidationError("node model references a column beyond the tree width");
    }
    if (n.model.attributes.size() != n.model.weights.size()) throw ValidationError("node model arity mismatch");
  }
}

std::size_t RegressionTree::leaf_for(std::span<const double> x) const {
  std::size_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const auto& n = nodes_[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return i;
}

double RegressionTree::predict(std::span<const double> x) const {
  check_width(x);
  if (!smoothing_) return nodes_[leaf_for(x)].model.predict(x);
  std::size_t path[256];
  std::vector<std::size_t> long_path;
  std::size_t depth = 0;
  std::size_t i = 0;
  auto record = [&](std::size_t node) {
    if (depth < 256) {
      path[depth] = node;
    } else {
      if (long_path.empty()) long_path.assign(path, path + 256);
      long_path.push_back(node);
    }
    ++depth;
  };
  record(0);
  while (!nodes_[i].is_leaf()) {
    const auto& n = nodes_[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    record(i);
  }
  auto at = [&](std::size_t k) { return depth <= 256 ? path[k] : long_path[k]; };
  double p = nodes_[at(depth - 1)].model.predict(x);
  const double k = smoothing_constant_;
  for (std::size_t d = depth - 1; d > 0; --d) {
    const auto n_child = static_cast<double>(nodes_[at(d)].n_training);
    p = (n_child * p + k * nodes_[at(d - 1)].model.predict(x)) / (n_child + k);
  }
  return p;
}

std::size_t RegressionTree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

std::size_t RegressionTree::depth() const {
  std::vector<std::size_t> depth(nodes_.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, depth[i]);
    const auto& n = nodes_[i];
    if (n.is_leaf()) continue;
    depth[static_cast<std::size_t>(n.left)] = depth[i] + 1;
    depth[static_cast<std::size_t>(n.right)] = depth[i] + 1;
  }
  return deepest;
}

void RegressionTree::write(std::ostream& out) const {
  out << "tree " << (kind_ == TreeKind::kM5p ? "m5p" : "reptree") << ' ' << width_ << ' ' << (smoothing_ ? 1 : 0)
      << ' ' << format_double(smoothing_constant_) << ' ' << nodes_.size() << '\n';
  for (const auto& n : nodes_) {
    out << "node " << n.feature << ' ' << format_double(n.threshold) << ' ' << n.left << ' ' << n.right << ' '
        << n.n_training << ' ' << format_double(n.training_sd) << ' ' << format_double(n.model.intercept) << ' '
        << n.model.attributes.size();
    for (std::size_t i = 0; i < n.model.attributes.size(); ++i) {
      out << ' ' << n.model.attributes[i] << ' ' << format_double(n.model.weights[i]);
    }
    out << '\n';
  }
}

double sdr(std::span<const double> y, std::span<const std::size_t> left, std::span<const std::size_t> right) {
  if (left.empty() || right.empty()) throw ContractViolation("sdr needs both sides of the split to be non-empty");
  auto sd_of = [&](std::span<const std::size_t> a, std::span<const std::size_t> b) {
    double sum = 0.0;
    for (auto i : a) sum += y[i];
    for (auto i : b) sum += y[i];
    const double n = static_cast<double>(a.size() + b.size());
    const double mean = sum / n;
    double ss = 0.0;
    for (auto i : a) ss += (y[i] - mean) * (y[i] - mean);
    for (auto i : b) ss += (y[i] - mean) * (y[i] - mean);
    return std::sqrt(ss / n);
  };
  const double n = static_cast<double>(left.size() + right.size());
  return sd_of(left, right) - static_cast<double>(left.size()) / n * sd_of(left, {}) -
         static_cast<double>(right.size()) / n * sd_of(right, {});
}

std::optional<Split> best_split(const Matrix& X, std::span<const double> y,
                                std::span<const std::size_t> candidate_features, std::size_t min_leaf_instances) {
  check_xy(X, y);
  if (min_leaf_instances < 1) throw ContractViolation("min_leaf_instances must be >= 1");
  if (X.rows() < 2 * min_leaf_instances) throw ContractViolation("best_split needs n >= 2 * min_leaf_instances");
  for (auto f : candidate_features) {
    if (f >= X.cols()) throw ContractViolation("candidate feature index out of range");
  }
  // Restrict to the candidate columns, then map the winner back.
  Matrix sub(X.rows(), candidate_features.size());
  for (std::size_t r = 0; r < X.rows(); ++r) {
    for (std::size_t k = 0; k < candidate_features.size(); ++k) sub(r, k) = X(r, candidate_features[k]);
  }
  std::vector<std::size_t> order(candidate_features.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return candidate_features[a] < candidate_features[b]; });
  const auto sorted_sub = [&] {
    Matrix m(X.rows(), order.size());
    for (std::size_t r = 0; r < X.rows(); ++r) {
      for (std::size_t k = 0; k < order.size(); ++k) m(r, k) = sub(r, order[k]);
    }
    return m;
  }();
  const auto data = ColumnData::from(sorted_sub);
  Grower grower(data, y, all_rows(X.rows()), Criterion::kSdr, min_leaf_instances);
  const auto st = grower.stats(0, X.rows());
  auto split = grower.find_split(0, X.rows(), st);
  if (!split) return split;
  split->feature = candidate_features[order[split->feature]];
  std::vector<std::size_t> left, right;
  for (std::size_t r = 0; r < X.rows(); ++r) (X(r, split->feature) <= split->threshold ? left : right).push_back(r);
  split->score = sdr(y, left, right);
  return split;
}

RegressionTree fit_m5p(const Matrix& X, std::span<const double> y, const M5Params& params) {
  check_xy(X, y);
  params.validate();
  if (X.rows() == 0) throw ContractViolation("fit_m5p needs at least one row");
  const auto data = ColumnData::from(X);
  Grower grower(data, y, all_rows(X.rows()), Criterion::kSdr, params.min_leaf_instances);
  const double root_sd = grower.stats(0, X.rows()).sd(X.rows());
  const double sd_floor = params.sd_stop_fraction * root_sd;
  std::vector<GrowNode> grown;
  grower.grow(grown, 0, X.rows(), 0, [&](std::size_t n, const NodeStats& st, int) {
    return n < 2 * params.min_leaf_instances || st.sd(n) < sd_floor;
  });
  M5Builder builder(data, y, grower.rows(), std::move(grown), params);
  return RegressionTree(TreeKind::kM5p, X.cols(), builder.build(), params.use_smoothing, params.smoothing_constant);
}

RegressionTree fit_reptree(const Matrix& X, std::span<const double> y, const REPTreeParams& params,
                           RepTreeDiagnostics* diagnostics) {
  check_xy(X, y);
  params.validate();
  const auto n = X.rows();
  if (n == 0) throw ContractViolation("fit_reptree needs at least one row");
  RepTreeDiagnostics diag;
  if (n < 2) {
    TreeNode leaf;
    leaf.model.intercept = y[0];
    leaf.n_training = 1;
    diag.grow_rows = 1;
    diag.nodes_before_pruning = diag.nodes_after_pruning = 1;
    if (diagnostics) *diagnostics = diag;
    return RegressionTree(TreeKind::kRepTree, X.cols(), {leaf}, false, 0.0);
  }

  Rng rng(params.seed);
  const auto n_prune = static_cast<std::size_t>(std::floor(static_cast<double>(n) * params.prune_fraction));
  const auto prune_rows = sample_without_replacement(n, n_prune, rng);
  std::vector<std::size_t> grow_rows;
  grow_rows.reserve(n - n_prune);
  {
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (k < prune_rows.size() && prune_rows[k] == i) {
        ++k;
      } else {
        grow_rows.push_back(i);
      }
    }
  }
  diag.grow_rows = grow_rows.size();
  diag.prune_rows = prune_rows.size();

  const auto data = ColumnData::from(X);
  Grower grower(data, y, grow_rows, Criterion::kVariance, params.min_leaf_instances);
  const auto n_grow = grow_rows.size();
  const double root_var = grower.stats(0, n_grow).sse(n_grow) / static_cast<double>(n_grow);
  const double var_floor = params.min_variance_fraction * root_var;
  std::vector<GrowNode> grown;
  grower.grow(grown, 0, n_grow, 0, [&](std::size_t count, const NodeStats& st, int depth) {
    if (count < 2 * params.min_leaf_instances) return true;
    if (params.max_depth >= 0 && depth >= params.max_depth) return true;
    return st.sse(count) / static_cast<double>(count) < var_floor;
  });

  std::vector<TreeNode> nodes(grown.size());
  for (std::size_t i = 0; i < grown.size(); ++i) {
    nodes[i].feature = grown[i].feature;
    nodes[i].threshold = grown[i].threshold;
    nodes[i].left = grown[i].left;
    nodes[i].right = grown[i].right;
    nodes[i].model.intercept = grown[i].mean;
    nodes[i].n_training = grown[i].end - grown[i].begin;
    nodes[i].training_sd = grown[i].sd;
  }
  diag.nodes_before_pruning = nodes.size();

  // Squared error on the prune set if each node were a leaf.
  std::vector<double> leaf_sse(nodes.size(), 0.0);
  for (auto r : prune_rows) {
    const auto x = X.row(r);
    std::size_t i = 0;
    while (true) {
      const double d = y[r] - nodes[i].model.intercept;
      leaf_sse[i] += d * d;
      if (nodes[i].is_leaf()) break;
      i = static_cast<std::size_t>(x[static_cast<std::size_t>(nodes[i].feature)] <= nodes[i].threshold
                                       ? nodes[i].left
                                       : nodes[i].right);
    }
  }
  auto subtree_sse = [&](auto&& self, std::size_t i, bool prune) -> double {
    if (nodes[i].is_leaf()) return leaf_sse[i];
    const double below = self(self, static_cast<std::size_t>(nodes[i].left), prune) +
                         self(self, static_cast<std::size_t>(nodes[i].right), prune);
    if (prune && leaf_sse[i] <= below) {
      nodes[i].left = nodes[i].right = -1;
      nodes[i].feature = -1;
      nodes[i].threshold = 0.0;
      return leaf_sse[i];
    }
    return below;
  };
  diag.prune_sse_before = subtree_sse(subtree_sse, 0, false);
  diag.prune_sse_after = subtree_sse(subtree_sse, 0, true);
  nodes = compact(nodes);
  diag.nodes_after_pruning = nodes.size();

  // Back-fit: node statistics over grow and prune rows together.
  std::vector<double> sum(nodes.size(), 0.0);
  std::vector<double> sum_sq(nodes.size(), 0.0);
  std::vector<std::size_t> count(nodes.size(), 0);
  for (std::size_t r = 0; r < n; ++r) {
    const auto x = X.row(r);
    std::size_t i = 0;
    while (true) {
      sum[i] += y[r];
      ++count[i];
      if (nodes[i].is_leaf()) break;
      i = static_cast<std::size_t>(x[static_cast<std::size_t>(nodes[i].feature)] <= nodes[i].threshold
                                       ? nodes[i].left
                                       : nodes[i].right);
    }
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (count[i] == 0) continue;
    const double mean = sum[i] / static_cast<double>(count[i]);
    nodes[i].model.intercept = mean;
    nodes[i].n_training = count[i];
  }
  for (std::size_t r = 0; r < n; ++r) {
    const auto x = X.row(r);
    std::size_t i = 0;
    while (true) {
      const double d = y[r] - nodes[i].model.intercept;
      sum_sq[i] += d * d;
      if (nodes[i].is_leaf()) break;
      i = static_cast<std::size_t>(x[static_cast<std::size_t>(nodes[i].feature)] <= nodes[i].threshold
                                       ? nodes[i].left
                                       : nodes[i].right);
    }
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (count[i] > 0) nodes[i].training_sd = std::sqrt(sum_sq[i] / static_cast<double>(count[i]));
  }
  if (diagnostics) *diagnostics = diag;
  return RegressionTree(TreeKind::kRepTree, X.cols(), std::move(nodes), false, 0.0);
}

}  // namespace newsclick
