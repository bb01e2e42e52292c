#include "newsclick/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "newsclick/config.hpp"
#include "newsclick/error.hpp"
#include "newsclick/io.hpp"
#include "newsclick/pipeline.hpp"
#include "newsclick/synth.hpp"
#include "newsclick/text.hpp"

namespace newsclick {

namespace {

namespace fs = std::filesystem;

constexpr std::string_view kPredictionHeader = "line_number\tnews_id\tprediction";

struct Options {
  std::string config;
  std::string data;
  std::string out;
  std::string model;
  std::string predictions;
  std::string cache;
  std::string config_out;
  std::optional<std::uint64_t> seed;
  std::optional<int> folds;
  int links = SynthParams{}.n_links;
  int days = SynthParams{}.days;
  bool no_sidecars = false;
  bool round = false;
};

PipelineConfig config_from(const Options& o) {
  PipelineConfig cfg = o.config.empty() ? PipelineConfig{} : load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.folds) cfg.cv_folds = *o.folds;
  cfg.validate();
  return cfg;
}

void emit(const Options& o, std::ostream& out, const std::string& text) {
  out << text;
  if (!o.out.empty()) write_file_atomic(o.out, [&](std::ostream& f) { f << text; });
}

std::string relative_to(const fs::path& file, const fs::path& dir) {
  return fs::proximate(fs::absolute(file), fs::absolute(dir.empty() ? fs::path(".") : dir)).generic_string();
}

int cmd_synth(const Options& o, std::ostream& out) {
  SynthParams p;
  p.n_links = o.links;
  p.days = o.days;
  if (o.seed) p.seed = *o.seed;
  const auto s = synth_generate(p);
  SynthFiles files = SynthFiles::beside(o.out);
  if (o.no_sidecars) files = SynthFiles{o.out, {}, {}, {}, {}};
  write_synth(s, files);
  out << "wrote " << s.dataset.size() << " entries for " << s.dataset.by_news_id().size() << " links to "
      << files.dataset.string() << '\n';
  if (!o.no_sidecars) {
    for (const auto& f : {files.content, files.keyphrases, files.title_hits, files.social})
      out << "wrote " << f.string() << '\n';
  }
  if (!o.config_out.empty()) {
    if (o.no_sidecars) throw ValidationError("--config-out needs the sidecar files");
    const fs::path dir = fs::path(o.config_out).parent_path();
    PipelineConfig cfg;
    cfg.seed = p.seed;
    cfg.keyphrases_path = relative_to(files.keyphrases, dir);
    cfg.content_path = relative_to(files.content, dir);
    ProviderConfig hits;
    hits.fixture_path = relative_to(files.title_hits, dir);
    ProviderConfig social;
    social.fixture_path = relative_to(files.social, dir);
    cfg.title_hits_provider = hits;
    cfg.social_provider = social;
    write_file_atomic(o.config_out, [&](std::ostream& f) { write_config(cfg, f); });
    out << "wrote " << o.config_out << '\n';
  }
  return kExitOk;
}

int cmd_enrich(const Options& o, std::ostream& out) {
  PipelineConfig cfg = config_from(o);
  if (!o.cache.empty()) cfg.cache_dir = o.cache;
  if (!cfg.cache_dir) throw ValidationError("enrich needs a cache directory (--cache or enrichment.cache_dir)");
  if (!cfg.title_hits_provider && !cfg.social_provider) throw ValidationError("config names no enrichment provider");
  const Dataset d = read_dataset(o.data);
  const auto inputs = load_inputs(cfg, d);
  std::size_t hits = 0, social = 0;
  for (const auto& [id, r] : inputs.enrichment) {
    hits += r.title_hits.has_value();
    social += r.social.has_value();
  }
  out << "links " << d.by_news_id().size() << "  enriched " << inputs.enrichment.size() << "  title_hits " << hits
      << "  social " << social << "  cache " << cfg.cache_dir->string() << '\n';
  return kExitOk;
}

int cmd_train(const Options& o, std::ostream& out, std::ostream& err) {
  const Dataset d = read_dataset(o.data);
  const PipelineConfig cfg = config_from(o);
  const auto inputs = load_inputs(cfg, d);
  const auto p = train_pipeline(d, inputs, cfg);
  out << "trained " << p.learner << " on " << p.summary.n << " entries, " << p.schema.expanded_width()
      << " columns, max clicks " << p.summary.max_clicks << '\n';
  if (o.out.empty()) {
    err << "warning: no --out given, model not saved\n";
  } else {
    write_file_atomic(o.out, [&](std::ostream& f) { save_pipeline(p, f); });
    out << "wrote " << o.out << '\n';
  }
  return kExitOk;
}

int cmd_predict(const Options& o, std::ostream& out, std::ostream& err) {
  TrainedPipeline p;
  {
    auto in = open_input(o.model);
    try {
      p = load_pipeline(in);
    } catch (const ParseError& e) {
      throw ParseError(o.model + ": " + e.what());
    }
  }
  const Dataset d = read_dataset(o.data);
  const PipelineConfig cfg = config_from(o);
  const auto inputs = load_inputs(cfg, d);
  std::vector<bool> clamped;
  const auto preds = predict_pipeline(p, d.entries(), inputs, &clamped);
  const auto n_clamped = std::count(clamped.begin(), clamped.end(), true);
  if (n_clamped > 0) err << "warning: " << n_clamped << " prediction(s) overflowed and were clamped\n";
  std::ostringstream s;
  s << kPredictionHeader << '\n';
  for (std::size_t i = 0; i < d.size(); ++i) {
    s << d[i].line_number << '\t' << d[i].news_id << '\t';
    if (o.round) {
      s << format_double(std::round(preds[i]));
    } else {
      s << format_double(preds[i]);
    }
    s << '\n';
  }
  write_file_atomic(o.out, [&](std::ostream& f) { f << s.str(); });
  out << "wrote " << d.size() << " predictions to " << o.out << '\n';
  return kExitOk;
}

int cmd_evaluate(const Options& o, std::ostream& out) {
  const Dataset d = read_dataset(o.data);
  std::map<std::int64_t, double> truth;
  for (const auto& e : d.entries()) {
    if (!truth.emplace(e.line_number, static_cast<double>(e.clicks)).second)
      throw ValidationError(o.data + ": duplicate line number " + std::to_string(e.line_number));
  }
  auto in = open_input(o.predictions);
  std::string line;
  std::vector<double> preds, truths;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line == kPredictionHeader) continue;
    const auto f = text::split(line, '\t');
    try {
      if (f.size() != 3) throw ParseError("expected line_number<TAB>news_id<TAB>prediction");
      const auto ln = parse_int(f[0]);
      const auto it = truth.find(ln);
      if (it == truth.end()) throw ValidationError("line number " + std::to_string(ln) + " is not in the dataset");
      preds.push_back(parse_double(f[2]));
      truths.push_back(it->second);
    } catch (const Error& e) {
      throw ParseError(o.predictions + ": line " + std::to_string(no) + ": " + e.what());
    }
  }
  if (preds.empty()) throw ValidationError(o.predictions + ": no predictions");
  auto report = compute_metrics(preds, truths);
  report.config = "predictions=" + o.predictions + " data=" + o.data;
  emit(o, out, report.human_readable() + report.machine_readable());
  return kExitOk;
}

int cmd_cv(const Options& o, std::ostream& out) {
  const Dataset d = read_dataset(o.data);
  const PipelineConfig cfg = config_from(o);
  const auto inputs = load_inputs(cfg, d);
  const auto report = cross_validate(d, inputs, cfg);
  emit(o, out, report.human_readable() + report.machine_readable());
  return kExitOk;
}

int cmd_ablate(const Options& o, std::ostream& out) {
  const Dataset d = read_dataset(o.data);
  const PipelineConfig cfg = config_from(o);
  const auto inputs = load_inputs(cfg, d);
  const auto rows = ablate(d, inputs, cfg);
  std::ostringstream s;
  s << describe_config(cfg) << '\n';
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-22s %12s %10s\n", "features", "MAE", "MRE");
  s << buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-22s %12.2f %9.2f%%\n", r.name.c_str(), r.report.mae, 100.0 * r.report.mre);
    s << buf;
  }
  for (const auto& r : rows)
    s << "row=" << r.name << " n=" << r.report.n << " mae=" << format_double(r.report.mae)
      << " mre=" << format_double(r.report.mre) << " cae=" << format_double(r.report.cae)
      << " cre=" << format_double(r.report.cre) << '\n';
  emit(o, out, s.str());
  return kExitOk;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hourly news click prediction", "newsclick"};
  app.require_subcommand(1);
  Options o;

  auto add_seed = [&](CLI::App* c) { c->add_option("--seed", o.seed, "Master seed (overrides the config)"); };
  auto add_config = [&](CLI::App* c) { c->add_option("--config", o.config, "Pipeline config file"); };
  auto add_data = [&](CLI::App* c) { c->add_option("--data", o.data, "Dataset file")->required(); };

  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth->add_option("--out", o.out, "Dataset path")->required();
  synth->add_option("--links", o.links, "Number of links");
  synth->add_option("--days", o.days, "Number of days");
  synth->add_flag("--no-sidecars", o.no_sidecars, "Skip content, keyphrase and fixture files");
  synth->add_option("--config-out", o.config_out, "Also write a pipeline config using the sidecars");
  add_seed(synth);

  auto* enrich = app.add_subcommand("enrich", "Populate the enrichment cache");
  add_config(enrich);
  add_data(enrich);
  enrich->add_option("--cache", o.cache, "Cache directory (overrides the config)");

  auto* train = app.add_subcommand("train", "Fit and save a pipeline");
  add_config(train);
  add_data(train);
  train->add_option("--out", o.out, "Pipeline file");
  add_seed(train);

  auto* predict = app.add_subcommand("predict", "Score a dataset with a saved pipeline");
  predict->add_option("--model", o.model, "Pipeline file")->required();
  add_config(predict);
  add_data(predict);
  predict->add_option("--out", o.out, "Predictions file")->required();
  predict->add_flag("--round", o.round, "Round predictions to whole clicks");

  auto* evaluate = app.add_subcommand("evaluate", "Score predictions against true clicks");
  evaluate->add_option("--predictions", o.predictions, "Predictions file")->required();
  add_data(evaluate);
  evaluate->add_option("--out", o.out, "Report file");

  auto* cv = app.add_subcommand("cv", "Cross-validate a pipeline");
  add_config(cv);
  add_data(cv);
  cv->add_option("--out", o.out, "Report file");
  cv->add_option("--folds", o.folds, "Number of folds (overrides the config)");
  add_seed(cv);

  auto* abl = app.add_subcommand("ablate", "Cross-validate the feature-group ladder");
  add_config(abl);
  add_data(abl);
  abl->add_option("--out", o.out, "Report file");
  abl->add_option("--folds", o.folds, "Number of folds (overrides the config)");
  add_seed(abl);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (synth->parsed()) return cmd_synth(o, out);
    if (enrich->parsed()) return cmd_enrich(o, out);
    if (train->parsed()) return cmd_train(o, out, err);
    if (predict->parsed()) return cmd_predict(o, out, err);
    if (evaluate->parsed()) return cmd_evaluate(o, out);
    if (cv->parsed()) return cmd_cv(o, out);
    if (abl->parsed()) return cmd_ablate(o, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace newsclick
