#include "newsclick/config.hpp"

#include <charconv>
#include <istream>
#include <limits>
#include <memory>
#include <map>
#include <ostream>

#include "newsclick/error.hpp"
#include "newsclick/io.hpp"
#include "newsclick/text.hpp"

namespace newsclick {

namespace {

struct Block {
  std::map<std::string, std::pair<std::string, std::size_t>> values;  // key -> (value, line)
  std::map<std::string, std::unique_ptr<Block>> children;
  std::size_t line = 0;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  void read_block(Block& b, bool nested) {
    std::string raw;
    while (std::getline(in_, raw)) {
      ++line_;
      const std::string s = text::trim(raw);
      if (s.empty() || s[0] == '#') continue;
      if (s == "}") {
        if (!nested) fail("unexpected '}'");
        return;
      }
      if (s.back() == '{') {
        const std::string name = text::trim(std::string_view(s).substr(0, s.size() - 1));
        if (name.empty()) fail("block without a name");
        if (b.children.count(name)) fail("duplicate block '" + name + "'");
        auto child = std::make_unique<Block>();
        child->line = line_;
        read_block(*child, true);
        b.children.emplace(name, std::move(child));
        continue;
      }
      const auto eq = s.find('=');
      if (eq == std::string::npos) fail("expected 'key = value'");
      const std::string key = text::trim(std::string_view(s).substr(0, eq));
      const std::string value = text::trim(std::string_view(s).substr(eq + 1));
      if (key.empty()) fail("empty key");
      if (!b.values.emplace(key, std::pair{value, line_}).second) fail("duplicate key '" + key + "'");
    }
    if (nested) fail("unterminated block");
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("config line " + std::to_string(line_) + ": " + msg);
  }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

class Values {
 public:
  explicit Values(Block& b) : b_(b) {}

  std::optional<std::string> take(const std::string& key) {
    const auto it = b_.values.find(key);
    if (it == b_.values.end()) return std::nullopt;
    current_line_ = it->second.second;
    std::string v = it->second.first;
    b_.values.erase(it);
    return v;
  }

  template <class F>
  void with(const std::string& key, F&& f) {
    if (auto v = take(key)) {
      try {
        f(*v);
      } catch (const Error& e) {
        throw ParseError("config line " + std::to_string(current_line_) + ": " + key + ": " + e.what());
      }
    }
  }

  void finish() const {
    if (!b_.values.empty()) {
      const auto& [k, v] = *b_.values.begin();
      throw ParseError("config line " + std::to_string(v.second) + ": unknown key '" + k + "'");
    }
  }

 private:
  Block& b_;
  std::size_t current_line_ = 0;
};

bool parse_bool(std::string_view s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ParseError("expected true or false, got '" + std::string(s) + "'");
}

std::size_t parse_size(std::string_view s) {
  const auto v = parse_int(s);
  if (v < 0) throw ParseError("expected a non-negative integer");
  return static_cast<std::size_t>(v);
}

int parse_small_int(std::string_view s) {
  const auto v = parse_int(s);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) throw ParseError("out of range");
  return static_cast<int>(v);
}

std::uint64_t parse_seed(std::string_view s) {
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw ParseError("expected an unsigned integer seed");
  return v;
}

LearnerSpec parse_learner(Block& b) {
  Values v(b);
  const auto kind_text = v.take("kind");
  if (!kind_text) throw ParseError("config line " + std::to_string(b.line) + ": learner block without 'kind'");
  const LearnerKind kind = parse_learner_kind(*kind_text);
  auto base_block = b.children.find("base");
  const bool meta = kind == LearnerKind::kBagging || kind == LearnerKind::kAdditive;
  for (const auto& [name, child] : b.children) {
    if (name != "base" || !meta)
      throw ParseError("config line " + std::to_string(child->line) + ": unexpected block '" + name + "'");
  }
  LearnerSpec spec;
  switch (kind) {
    case LearnerKind::kLinear: {
      LinearParams p;
      v.with("ridge_epsilon", [&](auto s) { p.ridge_epsilon = parse_double(s); });
      spec = LearnerSpec::linear(p);
      break;
    }
    case LearnerKind::kRepTree: {
      REPTreeParams p;
      v.with("min_leaf", [&](auto s) { p.min_leaf_instances = parse_size(s); });
      v.with("max_depth", [&](auto s) { p.max_depth = parse_small_int(s); });
      v.with("prune_fraction", [&](auto s) { p.prune_fraction = parse_double(s); });
      v.with("min_variance_fraction", [&](auto s) { p.min_variance_fraction = parse_double(s); });
      v.with("seed", [&](auto s) { p.seed = parse_seed(s); });
      spec = LearnerSpec::reptree(p);
      break;
    }
    case LearnerKind::kM5p: {
      M5Params p;
      v.with("min_leaf", [&](auto s) { p.min_leaf_instances = parse_size(s); });
      v.with("sd_stop_fraction", [&](auto s) { p.sd_stop_fraction = parse_double(s); });
      v.with("smoothing_constant", [&](auto s) { p.smoothing_constant = parse_double(s); });
      v.with("use_smoothing", [&](auto s) { p.use_smoothing = parse_bool(s); });
      v.with("prune", [&](auto s) { p.prune = parse_bool(s); });
      v.with("eliminate_attributes", [&](auto s) { p.eliminate_attributes = parse_bool(s); });
      spec = LearnerSpec::m5p(p);
      break;
    }
    case LearnerKind::kBagging:
    case LearnerKind::kAdditive: {
      if (base_block == b.children.end())
        throw ParseError("config line " + std::to_string(b.line) + ": " + *kind_text + " needs a base block");
      LearnerSpec base = parse_learner(*base_block->second);
      if (kind == LearnerKind::kBagging) {
        BaggingParams p;
        v.with("rounds", [&](auto s) { p.rounds = parse_small_int(s); });
        v.with("identity_resample", [&](auto s) { p.identity_resample = parse_bool(s); });
        spec = LearnerSpec::bagging(std::move(base), p);
      } else {
        AdditiveParams p;
        v.with("iterations", [&](auto s) { p.iterations = parse_small_int(s); });
        v.with("shrinkage", [&](auto s) { p.shrinkage = parse_double(s); });
        v.with("subsample_fraction", [&](auto s) { p.subsample_fraction = parse_double(s); });
        spec = LearnerSpec::additive(std::move(base), p);
      }
      break;
    }
  }
  v.finish();
  try {
    spec.validate();
  } catch (const ValidationError& e) {
    throw ParseError("config line " + std::to_string(b.line) + ": " + e.what());
  }
  return spec;
}

void write_learner(const LearnerSpec& spec, std::ostream& out, int depth) {
  const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
  out << pad << "kind = " << learner_kind_name(spec.kind) << '\n';
  switch (spec.kind) {
    case LearnerKind::kLinear:
      out << pad << "ridge_epsilon = " << format_double(std::get<LinearParams>(spec.params).ridge_epsilon) << '\n';
      break;
    case LearnerKind::kRepTree: {
      const auto& p = std::get<REPTreeParams>(spec.params);
      out << pad << "min_leaf = " << p.min_leaf_instances << '\n'
          << pad << "max_depth = " << p.max_depth << '\n'
          << pad << "prune_fraction = " << format_double(p.prune_fraction) << '\n'
          << pad << "min_variance_fraction = " << format_double(p.min_variance_fraction) << '\n'
          << pad << "seed = " << p.seed << '\n';
      break;
    }
    case LearnerKind::kM5p: {
      const auto& p = std::get<M5Params>(spec.params);
      out << pad << "min_leaf = " << p.min_leaf_instances << '\n'
          << pad << "sd_stop_fraction = " << format_double(p.sd_stop_fraction) << '\n'
          << pad << "smoothing_constant = " << format_double(p.smoothing_constant) << '\n'
          << pad << "use_smoothing = " << (p.use_smoothing ? "true" : "false") << '\n'
          << pad << "prune = " << (p.prune ? "true" : "false") << '\n'
          << pad << "eliminate_attributes = " << (p.eliminate_attributes ? "true" : "false") << '\n';
      break;
    }
    case LearnerKind::kBagging: {
      const auto& p = std::get<BaggingParams>(spec.params);
      out << pad << "rounds = " << p.rounds << '\n'
          << pad << "identity_resample = " << (p.identity_resample ? "true" : "false") << '\n';
      break;
    }
    case LearnerKind::kAdditive: {
      const auto& p = std::get<AdditiveParams>(spec.params);
      out << pad << "iterations = " << p.iterations << '\n'
          << pad << "shrinkage = " << format_double(p.shrinkage) << '\n'
          << pad << "subsample_fraction = " << format_double(p.subsample_fraction) << '\n';
      break;
    }
  }
  if (spec.base) {
    out << pad << "base {\n";
    write_learner(*spec.base, out, depth + 1);
    out << pad << "}\n";
  }
}

}  // namespace

LearnerKind parse_learner_kind(std::string_view name) {
  if (name == "linear") return LearnerKind::kLinear;
  if (name == "reptree") return LearnerKind::kRepTree;
  if (name == "m5p") return LearnerKind::kM5p;
  if (name == "bagging") return LearnerKind::kBagging;
  if (name == "additive") return LearnerKind::kAdditive;
  throw ParseError("unknown learner kind '" + std::string(name) + "' (linear, reptree, m5p, bagging, additive)");
}

std::string_view learner_kind_name(LearnerKind k) {
  switch (k) {
    case LearnerKind::kLinear: return "linear";
    case LearnerKind::kRepTree: return "reptree";
    case LearnerKind::kM5p: return "m5p";
    case LearnerKind::kBagging: return "bagging";
    case LearnerKind::kAdditive: return "additive";
  }
  return "?";
}

PipelineConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
  Block root;
  Reader(in).read_block(root, false);
  PipelineConfig cfg;
  Values v(root);
  auto path = [&](std::string_view s) {
    std::filesystem::path p(s);
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    return p;
  };

  v.with("features", [&](auto s) { cfg.groups = FeatureGroups::parse(s); });
  v.with("keyphrases", [&](auto s) { cfg.keyphrases_path = path(s); });
  v.with("content", [&](auto s) { cfg.content_path = path(s); });
  v.with("keyphrase_min_confidence", [&](auto s) { cfg.keyphrase_min_confidence = parse_double(s); });
  v.with("target_scale", [&](auto s) { cfg.scale = parse_target_scale(s); });
  v.with("outlier_policy", [&](auto s) { cfg.outlier = parse_outlier_kind(s); });
  v.with("cv_folds", [&](auto s) { cfg.cv_folds = parse_small_int(s); });
  v.with("seed", [&](auto s) { cfg.seed = parse_seed(s); });

  ProviderConfig base;
  std::optional<std::filesystem::path> hits_fixture, social_fixture;
  std::optional<std::string> hits_endpoint, social_endpoint;
  v.with("enrichment.mode", [&](auto s) { base.mode = parse_provider_mode(s); });
  v.with("enrichment.title_hits_fixture", [&](auto s) { hits_fixture = path(s); });
  v.with("enrichment.social_fixture", [&](auto s) { social_fixture = path(s); });
  v.with("enrichment.title_hits_endpoint", [&](auto s) { hits_endpoint = s; });
  v.with("enrichment.social_endpoint", [&](auto s) { social_endpoint = s; });
  v.with("enrichment.timeout_ms", [&](auto s) { base.timeout = std::chrono::milliseconds(parse_int(s)); });
  v.with("enrichment.max_concurrent_requests", [&](auto s) { base.max_concurrent_requests = parse_small_int(s); });
  v.with("enrichment.retry_count", [&](auto s) { base.retry_count = parse_small_int(s); });
  v.with("enrichment.cache_dir", [&](auto s) { cfg.cache_dir = path(s); });
  v.finish();

  auto provider = [&](const auto& fixture, const auto& endpoint) -> std::optional<ProviderConfig> {
    if (!fixture && !endpoint) return std::nullopt;
    ProviderConfig p = base;
    p.fixture_path = fixture;
    p.endpoint_url = endpoint;
    return p;
  };
  cfg.title_hits_provider = provider(hits_fixture, hits_endpoint);
  cfg.social_provider = provider(social_fixture, social_endpoint);

  for (auto& [name, child] : root.children) {
    if (name != "learner") throw ParseError("config line " + std::to_string(child->line) + ": unknown block '" + name + "'");
    cfg.learner = parse_learner(*child);
  }
  try {
    cfg.learner.validate();
    if (cfg.title_hits_provider) cfg.title_hits_provider->validate();
    if (cfg.social_provider) cfg.social_provider->validate();
    if (cfg.cv_folds < 2) throw ValidationError("cv_folds must be >= 2");
    if (!(cfg.keyphrase_min_confidence >= 0.0 && cfg.keyphrase_min_confidence <= 1.0))
      throw ValidationError("keyphrase_min_confidence must lie in [0, 1]");
  } catch (const ValidationError& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  auto in = open_input(path);
  try {
    return parse_config(in, path.parent_path());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_config(const PipelineConfig& cfg, std::ostream& out) {
  out << "features = " << cfg.groups.to_string() << '\n';
  if (cfg.keyphrases_path) out << "keyphrases = " << cfg.keyphrases_path->string() << '\n';
  if (cfg.content_path) out << "content = " << cfg.content_path->string() << '\n';
  out << "keyphrase_min_confidence = " << format_double(cfg.keyphrase_min_confidence) << '\n';
  out << "target_scale = " << target_scale_name(cfg.scale) << '\n';
  out << "outlier_policy = " << outlier_kind_name(cfg.outlier) << '\n';
  out << "cv_folds = " << cfg.cv_folds << '\n';
  out << "seed = " << cfg.seed << '\n';
  const ProviderConfig* any = cfg.title_hits_provider ? &*cfg.title_hits_provider
                              : cfg.social_provider   ? &*cfg.social_provider
                                                      : nullptr;
  if (any) {
    out << "enrichment.mode = " << provider_mode_name(any->mode) << '\n';
    out << "enrichment.timeout_ms = " << any->timeout.count() << '\n';
    out << "enrichment.max_concurrent_requests = " << any->max_concurrent_requests << '\n';
    out << "enrichment.retry_count = " << any->retry_count << '\n';
  }
  auto emit = [&](const std::optional<ProviderConfig>& p, std::string_view prefix) {
    if (!p) return;
    if (p->fixture_path) out << "enrichment." << prefix << "_fixture = " << p->fixture_path->string() << '\n';
    if (p->endpoint_url) out << "enrichment." << prefix << "_endpoint = " << *p->endpoint_url << '\n';
  };
  emit(cfg.title_hits_provider, "title_hits");
  emit(cfg.social_provider, "social");
  if (cfg.cache_dir) out << "enrichment.cache_dir = " << cfg.cache_dir->string() << '\n';
  out << "learner {\n";
  write_learner(cfg.learner, out, 1);
  out << "}\n";
}

}  // namespace newsclick
