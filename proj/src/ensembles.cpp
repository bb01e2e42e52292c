#include "newsclick/ensembles.hpp"

#include <cmath>
#include <ostream>

#include "newsclick/error.hpp"
#include "newsclick/io.hpp"
#include "newsclick/rng.hpp"

namespace newsclick {

LearnerSpec LearnerSpec::linear(LinearParams p) { return {LearnerKind::kLinear, p, nullptr}; }
LearnerSpec LearnerSpec::reptree(REPTreeParams p) { return {LearnerKind::kRepTree, p, nullptr}; }
LearnerSpec LearnerSpec::m5p(M5Params p) { return {LearnerKind::kM5p, p, nullptr}; }

LearnerSpec LearnerSpec::bagging(LearnerSpec base, BaggingParams p) {
  return {LearnerKind::kBagging, p, std::make_shared<const LearnerSpec>(std::move(base))};
}

LearnerSpec LearnerSpec::additive(LearnerSpec base, AdditiveParams p) {
  return {LearnerKind::kAdditive, p, std::make_shared<const LearnerSpec>(std::move(base))};
}

void LearnerSpec::validate() const {
  switch (kind) {
    case LearnerKind::kLinear:
      if (!(std::get<LinearParams>(params).ridge_epsilon >= 0.0)) {
        throw ValidationError("linear ridge_epsilon must be >= 0");
      }
      return;
    case LearnerKind::kRepTree:
      std::get<REPTreeParams>(params).validate();
      return;
    case LearnerKind::kM5p:
      std::get<M5Params>(params).validate();
      return;
    case LearnerKind::kBagging: {
      const auto& p = std::get<BaggingParams>(params);
      if (p.rounds < 1) throw ValidationError("bagging rounds must be >= 1");
      break;
    }
    case LearnerKind::kAdditive: {
      const auto& p = std::get<AdditiveParams>(params);
      if (p.iterations < 1) throw ValidationError("additive iterations must be >= 1");
      if (!(p.shrinkage > 0.0 && p.shrinkage <= 1.0)) throw ValidationError("additive shrinkage must lie in (0, 1]");
      if (!(p.subsample_fraction > 0.0 && p.subsample_fraction <= 1.0)) {
        throw ValidationError("additive subsample_fraction must lie in (0, 1]");
      }
      break;
    }
  }
  if (!base) throw ValidationError("meta learner '" + describe() + "' has no base learner");
  base->validate();
}

std::string LearnerSpec::describe() const {
  switch (kind) {
    case LearnerKind::kLinear: return "linear";
    case LearnerKind::kRepTree: return "reptree";
    case LearnerKind::kM5p: return "m5p";
    case LearnerKind::kBagging: return "bagging(" + (base ? base->describe() : std::string("?")) + ")";
    case LearnerKind::kAdditive: return "additive(" + (base ? base->describe() : std::string("?")) + ")";
  }
  return "?";
}

bool LearnerSpec::operator==(const LearnerSpec& other) const {
  if (kind != other.kind || params != other.params) return false;
  if (!base || !other.base) return !base && !other.base;
  return *base == *other.base;
}

LearnerSpec default_learner() {
  return LearnerSpec::additive(LearnerSpec::bagging(LearnerSpec::m5p()));
}

ModelPtr fit_learner(const LearnerSpec& spec, const Matrix& X, std::span<const double> y, std::uint64_t seed) {
  spec.validate();
  switch (spec.kind) {
    case LearnerKind::kLinear:
      return std::make_shared<const LinearRegressor>(fit_linear(X, y, std::get<LinearParams>(spec.params).ridge_epsilon));
    case LearnerKind::kRepTree: {
      auto p = std::get<REPTreeParams>(spec.params);
      p.seed = derive_seed(p.seed, seed);
      return std::make_shared<const RegressionTree>(fit_reptree(X, y, p));
    }
    case LearnerKind::kM5p:
      return std::make_shared<const RegressionTree>(fit_m5p(X, y, std::get<M5Params>(spec.params)));
    case LearnerKind::kBagging: {
      const auto& p = std::get<BaggingParams>(spec.params);
      return fit_bagging(*spec.base, X, y, p.rounds, seed, p.identity_resample);
    }
    case LearnerKind::kAdditive: {
      const auto& p = std::get<AdditiveParams>(spec.params);
      return fit_additive(*spec.base, X, y, p.iterations, p.shrinkage, p.subsample_fraction, seed);
    }
  }
  throw ContractViolation("unknown learner kind");
}

BaggedModel::BaggedModel(std::vector<ModelPtr> members, std::uint64_t seed)
    : members_(std::move(members)), seed_(seed), width_(0) {
  if (members_.empty()) throw ContractViolation("a bagged model needs at least one member");
  width_ = members_.front()->width();
  for (const auto& m : members_) {
    if (!m || m->width() != width_) throw ValidationError("bagged members disagree on feature width");
  }
}

double BaggedModel::predict(std::span<const double> x) const {
  check_width(x);
  double sum = 0.0;
  for (const auto& m : members_) sum += m->predict(x);
  return sum / static_cast<double>(members_.size());
}

void BaggedModel::write(std::ostream& out) const {
  out << "bagging " << width_ << ' ' << members_.size() << ' ' << seed_ << '\n';
  for (const auto& m : members_) m->write(out);
}

AdditiveModel::AdditiveModel(std::size_t width, double initial_prediction, std::vector<AdditiveStage> stages,
                             double subsample_fraction, std::uint64_t seed)
    : width_(width), initial_(initial_prediction), stages_(std::move(stages)),
      subsample_fraction_(subsample_fraction), seed_(seed) {
  for (const auto& s : stages_) {
    if (!s.model || s.model->width() != width_) throw ValidationError("additive stage disagrees on feature width");
  }
}

double AdditiveModel::predict(std::span<const double> x) const {
  check_width(x);
  double p = initial_;
  for (const auto& s : stages_) p += s.shrinkage * s.model->predict(x);
  return p;
}

void AdditiveModel::write(std::ostream& out) const {
  out << "additive " << width_ << ' ' << format_double(initial_) << ' ' << format_double(subsample_fraction_) << ' '
      << seed_ << ' ' << stages_.size() << '\n';
  for (const auto& s : stages_) {
    out << "stage " << format_double(s.shrinkage) << '\n';
    s.model->write(out);
  }
}

std::shared_ptr<const BaggedModel> fit_bagging(const LearnerSpec& base, const Matrix& X, std::span<const double> y,
                                               int rounds, std::uint64_t seed, bool identity_resample) {
  if (rounds < 1) throw ContractViolation("bagging needs rounds >= 1");
  if (X.rows() == 0 || X.rows() != y.size()) throw ContractViolation("bagging needs rows(X) == len(y) >= 1");
  const auto n = X.rows();
  std::vector<ModelPtr> members;
  members.reserve(static_cast<std::size_t>(rounds));
  for (int r = 0; r < rounds; ++r) {
    const auto round = static_cast<std::uint64_t>(r);
    const auto fit_seed = derive_seed(seed, 2 * round + 1);
    if (identity_resample) {
      members.push_back(fit_learner(base, X, y, fit_seed));
      continue;
    }
    Rng rng(derive_seed(seed, 2 * round));
    const auto idx = bootstrap_indices(n, rng);
    const auto Xs = X.select_rows(idx);
    std::vector<double> ys(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) ys[i] = y[idx[i]];
    members.push_back(fit_learner(base, Xs, ys, fit_seed));
  }
  return std::make_shared<const BaggedModel>(std::move(members), seed);
}

std::shared_ptr<const AdditiveModel> fit_additive(const LearnerSpec& base, const Matrix& X, std::span<const double> y,
                                                  int iterations, double shrinkage, double subsample_fraction,
                                                  std::uint64_t seed) {
  if (iterations < 1) throw ContractViolation("additive regression needs iterations >= 1");
  if (!(shrinkage > 0.0 && shrinkage <= 1.0)) throw ContractViolation("shrinkage must lie in (0, 1]");
  if (!(subsample_fraction > 0.0 && subsample_fraction <= 1.0)) {
    throw ContractViolation("subsample fraction must lie in (0, 1]");
  }
  const auto n = X.rows();
  if (n == 0 || n != y.size()) throw ContractViolation("additive regression needs rows(X) == len(y) >= 1");

  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(n);
  std::vector<double> residual(n);
  for (std::size_t i = 0; i < n; ++i) residual[i] = y[i] - mean;

  const auto m = std::min(n, static_cast<std::size_t>(std::ceil(subsample_fraction * static_cast<double>(n))));
  std::vector<AdditiveStage> stages;
  stages.reserve(static_cast<std::size_t>(iterations));
  for (int i = 0; i < iterations; ++i) {
    const auto stage = static_cast<std::uint64_t>(i);
    Rng rng(derive_seed(seed, 2 * stage));
    const auto idx = sample_without_replacement(n, m, rng);
    ModelPtr h;
    if (idx.size() == n) {
      h = fit_learner(base, X, residual, derive_seed(seed, 2 * stage + 1));
    } else {
      const auto Xs = X.select_rows(idx);
      std::vector<double> rs(idx.size());
      for (std::size_t k = 0; k < idx.size(); ++k) rs[k] = residual[idx[k]];
      h = fit_learner(base, Xs, rs, derive_seed(seed, 2 * stage + 1));
    }
    for (std::size_t r = 0; r < n; ++r) residual[r] -= shrinkage * h->predict(X.row(r));
    stages.push_back({std::move(h), shrinkage});
  }
  return std::make_shared<const AdditiveModel>(X.cols(), mean, std::move(stages), subsample_fraction, seed);
}

std::shared_ptr<const AdditiveModel> fit_combined(const Matrix& X, std::span<const double> y,
                                                  const M5Params& m5_params, int bag_rounds, int ar_iterations,
                                                  double shrinkage, double subsample_fraction, std::uint64_t seed,
                                                  bool identity_resample) {
  const auto base = LearnerSpec::bagging(LearnerSpec::m5p(m5_params), {bag_rounds, identity_resample});
  base.validate();
  return fit_additive(base, X, y, ar_iterations, shrinkage, subsample_fraction, seed);
}

}  // namespace newsclick
