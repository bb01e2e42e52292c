#include "newsclick/pipeline.hpp"

#include <algorithm>
#include <istream>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>

#include "newsclick/error.hpp"
#include "newsclick/io.hpp"
#include "newsclick/rng.hpp"
#include "newsclick/text.hpp"

namespace newsclick {

namespace {

constexpr std::string_view kMagic = "newsclick-pipeline";
constexpr int kVersion = 1;

void require_file(const std::optional<std::filesystem::path>& p, std::string_view what) {
  if (p && !std::filesystem::exists(*p)) throw IoError(std::string(what) + " not found: " + p->string());
}

std::map<std::int64_t, Timestamp> first_seen_of(std::span<const LinkHourEntry> entries) {
  std::map<std::int64_t, Timestamp> out;
  for (const auto& e : entries) {
    auto [it, inserted] = out.emplace(e.news_id, e.timestamp);
    if (!inserted && e.timestamp < it->second) it->second = e.timestamp;
  }
  return out;
}

std::string next_line(std::istream& in, std::string_view expect_key) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("pipeline file ends before '" + std::string(expect_key) + "'");
  if (!line.starts_with(expect_key) || (line.size() > expect_key.size() && line[expect_key.size()] != ' '))
    throw ParseError("pipeline file: expected '" + std::string(expect_key) + "', got '" + line + "'");
  return line.size() > expect_key.size() ? line.substr(expect_key.size() + 1) : std::string();
}

std::vector<std::string_view> words(std::string_view s) {
  std::vector<std::string_view> out;
  for (auto w : text::split(s, ' '))
    if (!w.empty()) out.push_back(w);
  return out;
}

}  // namespace

void PipelineConfig::validate() const {
  learner.validate();
  if (cv_folds < 2) throw ValidationError("cv_folds must be >= 2");
  if (!(keyphrase_min_confidence >= 0.0 && keyphrase_min_confidence <= 1.0))
    throw ValidationError("keyphrase_min_confidence must lie in [0, 1]");
  if (title_hits_provider) title_hits_provider->validate();
  if (social_provider) social_provider->validate();
  require_file(keyphrases_path, "keyphrase file");
  require_file(content_path, "content file");
}

PipelineInputs load_inputs(const PipelineConfig& cfg, const Dataset& d) {
  PipelineInputs in;
  if (cfg.content_path) in.content = read_content(*cfg.content_path);
  if (cfg.keyphrases_path) in.keyphrases = read_keyphrases(*cfg.keyphrases_path);
  Providers providers;
  if (cfg.title_hits_provider && cfg.groups.f1) providers.title_hits = make_title_hits_provider(*cfg.title_hits_provider);
  if (cfg.social_provider && cfg.groups.f2) providers.social = make_social_provider(*cfg.social_provider);
  if (providers.title_hits || providers.social) {
    std::unique_ptr<EnrichmentCache> cache;
    if (cfg.cache_dir) cache = std::make_unique<EnrichmentCache>(*cfg.cache_dir);
    in.enrichment = enrich_dataset(d, providers, cache.get(), &in.content);
  }
  return in;
}

Matrix build_matrix(const FeatureSchema& schema, std::span<const LinkHourEntry> entries,
                    const std::map<std::int64_t, Timestamp>& first_seen, const PipelineInputs& inputs) {
  struct TextFeatures {
    std::vector<int> keyphrase_counts;
    StyleFeatures style;
  };
  std::map<std::pair<std::int64_t, std::string_view>, TextFeatures> memo;
  Matrix X(0, schema.expanded_width());
  for (const auto& e : entries) {
    FeatureInputs fi;
    const auto fs = first_seen.find(e.news_id);
    fi.first_seen = fs == first_seen.end() ? e.timestamp : fs->second;
    if (const auto c = inputs.content.find(e.news_id); c != inputs.content.end()) fi.content = &c->second;
    if (const auto r = inputs.enrichment.find(e.news_id); r != inputs.enrichment.end()) {
      fi.title_hits = r->second.title_hits;
      fi.social = r->second.social;
    }
    auto [it, fresh] = memo.try_emplace({e.news_id, e.title});
    if (fresh) {
      if (schema.groups().f3) {
        std::string text = e.title;
        if (fi.content && !fi.content->body.empty()) text += ' ' + fi.content->body;
        it->second.keyphrase_counts = keyphrase_counts(text, schema.phrases());
      }
      if (schema.groups().f4) it->second.style = stylometric_features(e.title);
    }
    fi.keyphrase_counts = &it->second.keyphrase_counts;
    fi.style = &it->second.style;
    X.append_row(assemble_vector(e, fi, schema, UnseenCategory::kOtherBucket).values);
  }
  return X;
}

TrainedPipeline train_pipeline(const Dataset& d, const PipelineInputs& inputs, const PipelineConfig& cfg) {
  if (d.empty()) throw ValidationError("cannot train on an empty dataset");
  cfg.learner.validate();
  TrainedPipeline p;
  std::set<std::int64_t> channels;
  for (const auto& e : d.entries()) channels.insert(e.channel_id);
  p.channels.assign(channels.begin(), channels.end());
  const auto phrases = cfg.groups.f3 ? filter_keyphrases(inputs.keyphrases, cfg.keyphrase_min_confidence)
                                     : std::vector<KeyphraseEntry>{};
  p.schema = FeatureSchema::build(cfg.groups, p.channels, phrases);

  p.summary.n = d.size();
  p.summary.first_seen = d.first_seen();
  std::vector<double> y;
  y.reserve(d.size());
  double sum = 0.0;
  for (const auto& e : d.entries()) {
    const auto clicks = static_cast<double>(e.clicks);
    sum += clicks;
    p.summary.max_clicks = std::max(p.summary.max_clicks, clicks);
    y.push_back(forward_target(clicks, cfg.scale));
  }
  p.summary.mean_clicks = sum / static_cast<double>(d.size());

  const Matrix X = build_matrix(p.schema, d.entries(), p.summary.first_seen, inputs);
  p.model = fit_learner(cfg.learner, X, y, cfg.seed);
  p.learner = cfg.learner.describe();
  p.scale = cfg.scale;
  p.policy = {cfg.outlier, p.summary.max_clicks};
  return p;
}

std::vector<double> predict_pipeline(const TrainedPipeline& p, std::span<const LinkHourEntry> entries,
                                     const PipelineInputs& inputs, std::vector<bool>* clamped) {
  if (!p.model) throw ContractViolation("pipeline has no model");
  if (p.model->width() != p.schema.expanded_width())
    throw ContractViolation("pipeline schema width does not match its model");
  auto first_seen = p.summary.first_seen;
  for (const auto& [id, ts] : first_seen_of(entries)) {
    auto [it, inserted] = first_seen.emplace(id, ts);
    if (!inserted && ts < it->second) it->second = ts;
  }
  const Matrix X = build_matrix(p.schema, entries, first_seen, inputs);
  std::vector<double> out(entries.size());
  if (clamped) clamped->assign(entries.size(), false);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto inv = inverse_target(p.model->predict(X.row(i)), p.scale);
    if (clamped) (*clamped)[i] = inv.clamped;
    out[i] = clip_outliers(inv.value, p.policy);
  }
  return out;
}

std::vector<std::vector<std::size_t>> cv_folds(std::size_t n, const PipelineConfig& cfg) {
  return kfold_split(n, static_cast<std::size_t>(cfg.cv_folds), derive_seed(cfg.seed, 0));
}

std::uint64_t fold_seed(std::uint64_t seed, std::size_t fold) { return derive_seed(seed, fold + 1); }

EvalReport cross_validate(const Dataset& d, const PipelineInputs& inputs, const PipelineConfig& cfg) {
  if (cfg.cv_folds < 2) throw ValidationError("cv_folds must be >= 2");
  const auto folds = cv_folds(d.size(), cfg);
  std::vector<double> preds(d.size()), truths(d.size());
  std::vector<char> in_fold(d.size());
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::fill(in_fold.begin(), in_fold.end(), 0);
    for (const auto i : folds[f]) in_fold[i] = 1;
    std::vector<LinkHourEntry> train, test;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (!in_fold[i]) train.push_back(d[i]);
    }
    for (const auto i : folds[f]) test.push_back(d[i]);
    PipelineConfig fold_cfg = cfg;
    fold_cfg.seed = fold_seed(cfg.seed, f);
    const auto p = train_pipeline(Dataset(std::move(train)), inputs, fold_cfg);
    const auto fp = predict_pipeline(p, test, inputs);
    for (std::size_t j = 0; j < folds[f].size(); ++j) {
      preds[folds[f][j]] = fp[j];
      truths[folds[f][j]] = static_cast<double>(test[j].clicks);
    }
  }
  auto report = compute_metrics(preds, truths);
  report.config = describe_config(cfg);
  return report;
}

std::vector<std::pair<std::string, FeatureGroups>> ablation_ladder() {
  std::vector<std::pair<std::string, FeatureGroups>> out;
  FeatureGroups g;
  out.emplace_back("Base", g);
  g.f1 = true;
  out.emplace_back("Base+F1", g);
  g.f2 = true;
  out.emplace_back("Base+F1+F2", g);
  g.f3 = true;
  out.emplace_back("Base+F1+F2+F3", g);
  g.f4 = true;
  out.emplace_back("Base+F1+F2+F3+F4", g);
  g.f5 = true;
  out.emplace_back("Base+F1+F2+F3+F4+F5", g);
  return out;
}

std::vector<AblationRow> ablate(const Dataset& d, const PipelineInputs& inputs, const PipelineConfig& cfg) {
  std::vector<AblationRow> rows;
  for (const auto& [name, groups] : ablation_ladder()) {
    PipelineConfig c = cfg;
    c.groups = groups;
    rows.push_back({name, groups, cross_validate(d, inputs, c)});
  }
  return rows;
}

std::string describe_config(const PipelineConfig& cfg) {
  std::ostringstream s;
  s << "learner=" << cfg.learner.describe() << " features=" << cfg.groups.to_string()
    << " target_scale=" << target_scale_name(cfg.scale) << " outlier_policy=" << outlier_kind_name(cfg.outlier)
    << " cv_folds=" << cfg.cv_folds << " seed=" << cfg.seed;
  return s.str();
}

void save_pipeline(const TrainedPipeline& p, std::ostream& out) {
  out << kMagic << ' ' << kVersion << '\n';
  out << "learner " << p.learner << '\n';
  out << "features " << p.schema.groups().to_string() << '\n';
  out << "scale " << target_scale_name(p.scale) << '\n';
  out << "outlier " << outlier_kind_name(p.policy.kind) << ' ' << format_double(p.policy.train_max_clicks) << '\n';
  out << "channels " << p.channels.size();
  for (const auto c : p.channels) out << ' ' << c;
  out << '\n';
  out << "phrases " << p.schema.phrases().size() << '\n';
  for (const auto& k : p.schema.phrases())
    out << text::escape_field(k.phrase) << '\t' << format_double(k.confidence) << '\n';
  out << "summary " << p.summary.n << ' ' << format_double(p.summary.mean_clicks) << ' '
      << format_double(p.summary.max_clicks) << '\n';
  out << "first_seen " << p.summary.first_seen.size() << '\n';
  for (const auto& [id, ts] : p.summary.first_seen) out << id << '\t' << ts.to_string() << '\n';
  out << "model\n";
  save_model(*p.model, out);
}

TrainedPipeline load_pipeline(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty pipeline file");
  const auto head = words(line);
  if (head.size() != 2 || head[0] != kMagic) throw ParseError("not a pipeline file");
  if (parse_int(head[1]) != kVersion) throw ParseError("unsupported pipeline version " + std::string(head[1]));

  TrainedPipeline p;
  try {
    p.learner = next_line(in, "learner");
    const auto groups = FeatureGroups::parse(next_line(in, "features"));
    p.scale = parse_target_scale(next_line(in, "scale"));
    const std::string outlier_line = next_line(in, "outlier");
    const auto outlier = words(outlier_line);
    if (outlier.size() != 2) throw ParseError("malformed outlier line");
    p.policy = {parse_outlier_kind(outlier[0]), parse_double(outlier[1])};

    const std::string ch_line = next_line(in, "channels");
    const auto ch = words(ch_line);
    if (ch.empty() || static_cast<std::size_t>(parse_int(ch[0])) != ch.size() - 1)
      throw ParseError("malformed channels line");
    for (std::size_t i = 1; i < ch.size(); ++i) p.channels.push_back(parse_int(ch[i]));

    const auto n_phrases = parse_int(next_line(in, "phrases"));
    std::vector<KeyphraseEntry> phrases;
    for (std::int64_t i = 0; i < n_phrases; ++i) {
      if (!std::getline(in, line)) throw ParseError("pipeline file ends inside phrases");
      const auto f = text::split(line, '\t');
      if (f.size() != 2) throw ParseError("malformed phrase line");
      phrases.push_back({text::unescape_field(f[0]), parse_double(f[1])});
    }
    p.schema = FeatureSchema::build(groups, p.channels, phrases);

    const std::string summary_line = next_line(in, "summary");
    const auto summary = words(summary_line);
    if (summary.size() != 3) throw ParseError("malformed summary line");
    p.summary.n = static_cast<std::size_t>(parse_int(summary[0]));
    p.summary.mean_clicks = parse_double(summary[1]);
    p.summary.max_clicks = parse_double(summary[2]);

    const auto n_seen = parse_int(next_line(in, "first_seen"));
    for (std::int64_t i = 0; i < n_seen; ++i) {
      if (!std::getline(in, line)) throw ParseError("pipeline file ends inside first_seen");
      const auto f = text::split(line, '\t');
      if (f.size() != 2) throw ParseError("malformed first_seen line");
      p.summary.first_seen.emplace(parse_int(f[0]), Timestamp::parse(f[1]));
    }
    next_line(in, "model");
    p.model = load_model(in);
  } catch (const ValidationError& e) {
    throw ParseError(std::string("pipeline file: ") + e.what());
  }
  if (p.model->width() != p.schema.expanded_width())
    throw ParseError("pipeline file: model width " + std::to_string(p.model->width()) + " does not match schema width " +
                     std::to_string(p.schema.expanded_width()));
  return p;
}

}  // namespace newsclick
