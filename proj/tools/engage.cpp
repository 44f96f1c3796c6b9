// engage — batch command-line driver: corpus ingest, features, labels, training,
// cross-validated evaluation, Shapley importance and the side experiments.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "engage/corpus.hpp"
#include "engage/csv.hpp"
#include "engage/cv.hpp"
#include "engage/error.hpp"
#include "engage/experiments.hpp"
#include "engage/explain.hpp"
#include "engage/features.hpp"
#include "engage/labels.hpp"
#include "engage/models.hpp"
#include "engage/pipeline.hpp"
#include "engage/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace engage;

namespace {

constexpr const char* kToolVersion = "1.0.0";
constexpr int kArtifactVersion = 1;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---- options ----------------------------------------------------------------------------

struct CorpusArgs {
  std::string corpus;
  std::string data_dir;
  int min_viewers = 5;
  std::string encoding = "raw";
  bool video = false;
  double epsilon = 1e-3;
  double bot_threshold = 0.05;
};

struct ModelArgs {
  std::string model = "rf";
  std::optional<double> lambda, C, epsilon_ins, gamma;
  std::optional<int> trees, max_features, min_leaf, max_depth, max_epochs;
  bool tune = false;
  int inner_k = 3;
};

struct Run {
  std::string out;
  std::uint64_t seed = 0;
};

// Required options are checked after the config file is merged, so they may come from it.
std::map<const CLI::App*, std::vector<std::string>> g_required;

void add_corpus(CLI::App* sub, CorpusArgs& a, bool labels) {
  g_required[sub].push_back("--corpus");
  sub->add_option("--corpus", a.corpus, "Corpus directory (lectures.csv|json, events.csv, transcripts/)");
  sub->add_option("--data-dir", a.data_dir, "Lexicon and mapping directory (default: built-in data)");
  sub->add_option("--min-viewers", a.min_viewers, "Keep lectures with at least this many distinct viewers")
      ->check(CLI::PositiveNumber);
  if (labels) {
    sub->add_option("--encoding", a.encoding, "Label encoding")
        ->check(CLI::IsMember({"raw", "cleaned", "standardised", "standardized", "comparative"}));
    sub->add_option("--label-epsilon", a.epsilon, "Floor applied to MNET before the log")->check(CLI::PositiveNumber);
    sub->add_option("--bot-threshold", a.bot_threshold, "Mean watch fraction below which a user is dropped (cleaned)");
  }
  sub->add_flag("--with-video-features", a.video, "Add the video-specific feature columns");
}

void add_model(CLI::App* sub, ModelArgs& m) {
  sub->add_option("--model", m.model, "Model family")
      ->transform(CLI::IsMember({"rr", "svr", "krr", "ksvr", "rf"}, CLI::ignore_case));
  sub->add_option("--lambda", m.lambda, "L2 penalty (RR, KRR)");
  sub->add_option("--C", m.C, "Loss weight (SVR, KSVR)");
  sub->add_option("--epsilon-ins", m.epsilon_ins, "Insensitive zone (SVR, KSVR)");
  sub->add_option("--gamma", m.gamma, "RBF width (KRR, KSVR; default 1/p)");
  sub->add_option("--trees", m.trees, "Number of trees (RF)");
  sub->add_option("--max-features", m.max_features, "Candidate features per split (RF; default ceil(p/3))");
  sub->add_option("--min-leaf", m.min_leaf, "Minimum leaf size (RF)");
  sub->add_option("--max-depth", m.max_depth, "Depth limit (RF)");
  sub->add_option("--max-epochs", m.max_epochs, "Epoch limit (SVR, KSVR)");
  sub->add_flag("--tune", m.tune, "Pick hyperparameters from the default grid by inner cross-validation");
  sub->add_option("--inner-k", m.inner_k, "Inner folds for --tune")->check(CLI::Range(2, 100));
}

void add_run(CLI::App* sub, Run& r, bool needs_out = true) {
  sub->add_option("--out", r.out, "Output run directory");
  if (needs_out) g_required[sub].push_back("--out");
  sub->add_option("--seed", r.seed, "Random seed");
}

/// Fills options the command line left unset from a JSON object of {long-name: value}.
void apply_config(CLI::App* sub, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError("config '" + path + "': " + e.what());
  }
  if (!cfg.is_object()) throw UsageError("config '" + path + "' must be a JSON object");
  if (cfg.contains(sub->get_name()) && cfg[sub->get_name()].is_object()) {
    json merged = cfg;
    for (auto& [k, v] : cfg[sub->get_name()].items()) merged[k] = v;
    cfg = merged;
  }
  static const std::set<std::string> sections = {"ingest", "features", "labels", "train", "eval",
                                                  "explain", "personalise", "subject-split", "synth"};
  for (auto& [key, value] : cfg.items()) {
    if (sections.count(key) && value.is_object()) continue;
    CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (!opt || key == "config") throw UsageError("config '" + path + "': unknown option '" + key + "' for " + sub->get_name());
    if (opt->count() > 0) continue;  // command line wins
    auto text = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
    if (value.is_array()) {
      for (const auto& v : value) opt->add_result(text(v));
    } else if (value.is_boolean()) {
      if (!value.get<bool>()) continue;
      opt->add_result("true");
    } else {
      opt->add_result(text(value));
    }
    opt->run_callback();
  }
}

/// Every long option of the subcommand with its effective value; feeds the manifest hash.
json effective_config(const CLI::App* sub) {
  json cfg = json::object();
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string& name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "config" || opt->get_lnames().empty()) continue;
    if (opt->count() > 0) {
      auto r = opt->results();
      cfg[name] = r.size() == 1 ? json(r[0]) : json(r);
    } else if (!opt->get_default_str().empty()) {
      cfg[name] = opt->get_default_str();
    }
  }
  return cfg;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void write_manifest(const fs::path& dir, const CLI::App* sub, const std::vector<std::string>& artifacts) {
  json cfg = effective_config(sub);
  // The output location does not change the computation, so it stays out of the hash.
  json hashed = cfg;
  hashed.erase("out");
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(hashed.dump())));
  json arts = json::array();
  for (const auto& a : artifacts) arts.push_back({{"file", a}, {"format_version", kArtifactVersion}});
  write_json(dir / "manifest.json", {{"tool", "engage"},
                                     {"tool_version", kToolVersion},
                                     {"command", sub->get_name()},
                                     {"config", cfg},
                                     {"config_hash", hash},
                                     {"artifacts", arts}});
}

// ---- shared pipeline steps --------------------------------------------------------------

fs::path data_dir(const CorpusArgs& a) { return a.data_dir.empty() ? default_data_dir() : fs::path(a.data_dir); }

Corpus read_corpus(const CorpusArgs& a) {
  if (!fs::is_directory(a.corpus)) throw UsageError("corpus directory '" + a.corpus + "' does not exist");
  Corpus c = load_corpus(a.corpus, SubjectMap::load(data_dir(a) / "subject_areas.csv"));
  for (const auto& w : c.warnings) std::cerr << "warning: " << w << "\n";
  for (const auto& r : c.rejected_events) std::cerr << "warning: events line " << r.line << ": " << r.message << "\n";
  return c;
}

Lexicons read_lexicons(const CorpusArgs& a) { return Lexicons::load(data_dir(a) / "lexicons"); }

FeatureMode mode_of(const CorpusArgs& a) { return a.video ? FeatureMode::content_plus_video : FeatureMode::content_only; }

DatasetOptions dataset_options(const CorpusArgs& a) {
  DatasetOptions o;
  o.mode = mode_of(a);
  o.encoding = parse_encoding(a.encoding);
  o.labels.epsilon = a.epsilon;
  o.labels.bot_threshold = a.bot_threshold;
  o.min_viewers = a.min_viewers;
  return o;
}

ModelSpec model_spec(const ModelArgs& m, std::uint64_t seed) {
  ModelSpec s;
  s.family = parse_family(m.model);
  s.seed = seed;
  auto& hp = s.hp;
  if (m.lambda) hp.lambda = *m.lambda;
  if (m.C) hp.C = *m.C;
  if (m.epsilon_ins) hp.epsilon = *m.epsilon_ins;
  if (m.gamma) hp.gamma = *m.gamma;
  if (m.trees) hp.trees = *m.trees;
  if (m.max_features) hp.max_features = *m.max_features;
  if (m.min_leaf) hp.min_leaf = *m.min_leaf;
  if (m.max_depth) hp.max_depth = *m.max_depth;
  if (m.max_epochs) hp.max_epochs = *m.max_epochs;
  s.validate();
  return s;
}

/// The requested spec, or the inner-CV winner of the default grid under --tune (explicit
/// hyperparameters then override the grid point).
ModelSpec resolve_spec(const ModelArgs& m, std::uint64_t seed, const Dataset& d, json* note) {
  ModelSpec s = model_spec(m, seed);
  if (!m.tune) return s;
  auto grid = default_grid(s.family, static_cast<int>(d.X.cols()), seed);
  for (auto& g : grid) {
    if (m.trees) g.hp.trees = *m.trees;
    if (m.max_epochs) g.hp.max_epochs = *m.max_epochs;
  }
  auto sel = select_hyperparameters(d.X, d.y, grid, m.inner_k, seed);
  if (note) {
    json scores = json::array();
    for (std::size_t i = 0; i < grid.size(); ++i)
      scores.push_back({{"model", to_json(grid[i])}, {"inner_pairwise_accuracy", sel.scores[i]}});
    *note = {{"selected", to_json(sel.spec)}, {"grid", scores}, {"inner_k", m.inner_k}};
  }
  return sel.spec;
}

json dataset_summary(const Dataset& d, const CorpusArgs& a) {
  return {{"lectures", d.size()},
          {"features", d.X.columns},
          {"encoding", std::string(to_string(d.encoding))},
          {"excluded_lectures", d.excluded.size()},
          {"min_viewers", a.min_viewers}};
}

// ---- subcommands ------------------------------------------------------------------------

int cmd_ingest(const CLI::App* sub, const CorpusArgs& a, const Run& r) {
  Corpus c = read_corpus(a);
  auto kept = filter_min_viewers(c.lectures, c.events, a.min_viewers);
  std::cout << "lectures: " << c.lectures.size() << "\n"
            << "lectures_retained: " << kept.lectures.size() << " (>= " << a.min_viewers << " distinct viewers)\n"
            << "events: " << c.events.size() << "\n"
            << "events_retained: " << kept.events.size() << "\n"
            << "rejected_event_rows: " << c.rejected_events.size() << "\n";
  if (!r.out.empty()) {
    json rejected = json::array();
    for (const auto& x : c.rejected_events) rejected.push_back({{"line", x.line}, {"message", x.message}});
    write_json(fs::path(r.out) / "ingest.json", {{"lectures", c.lectures.size()},
                                                 {"lectures_retained", kept.lectures.size()},
                                                 {"events", c.events.size()},
                                                 {"events_retained", kept.events.size()},
                                                 {"rejected_event_rows", rejected},
                                                 {"warnings", c.warnings}});
    write_manifest(r.out, sub, {"ingest.json"});
  }
  return c.rejected_events.empty() ? 0 : 1;
}

int cmd_features(const CLI::App* sub, const CorpusArgs& a, const Run& r) {
  Corpus c = read_corpus(a);
  auto p = prepare(c, read_lexicons(a), mode_of(a), a.min_viewers);
  std::vector<std::string> ids;
  for (const auto& l : p.lectures) ids.push_back(l.id);
  write_features_csv(fs::path(r.out) / "features.csv", ids, p.features);
  write_manifest(r.out, sub, {"features.csv"});
  std::cout << "features: " << ids.size() << " lectures -> " << (fs::path(r.out) / "features.csv").string() << "\n";
  return 0;
}

int cmd_labels(const CLI::App* sub, const CorpusArgs& a, const Run& r) {
  Corpus c = read_corpus(a);
  auto kept = filter_min_viewers(c.lectures, c.events, a.min_viewers);
  auto o = dataset_options(a);
  LabelTable t = build_label_table(kept.lectures, kept.events, o.encoding, o.labels);
  write_labels_csv(fs::path(r.out) / "labels.csv", t);
  for (const auto& [id, why] : t.excluded) std::cerr << "warning: lecture " << id << " not labelled: " << why << "\n";
  write_manifest(r.out, sub, {"labels.csv"});
  std::cout << "labels: " << t.entries.size() << " lectures (" << to_string(t.encoding) << ")\n";
  return 0;
}

int cmd_train(const CLI::App* sub, const CorpusArgs& a, const ModelArgs& m, const Run& r) {
  Dataset d = build_dataset(read_corpus(a), read_lexicons(a), dataset_options(a));
  json tuning;
  ModelSpec spec = resolve_spec(m, r.seed, d, &tuning);
  TrainedModel model = train(d.X, d.y, spec);
  save_model(fs::path(r.out) / "model.json", model);
  std::vector<std::string> arts = {"model.json"};
  if (!tuning.is_null()) {
    write_json(fs::path(r.out) / "tuning.json", tuning);
    arts.push_back("tuning.json");
  }
  write_manifest(r.out, sub, arts);
  std::cout << "trained " << to_string(spec.family) << " on " << d.size() << " lectures -> "
            << (fs::path(r.out) / "model.json").string() << "\n";
  return 0;
}

struct EvalArgs {
  int k = 5;
  bool same_subject = false;
  bool length_split = false;
  double length_cutoff = 5000;
};

int cmd_eval(const CLI::App* sub, const CorpusArgs& a, const ModelArgs& m, const EvalArgs& e, const Run& r) {
  Corpus c = read_corpus(a);
  auto opts = dataset_options(a);
  auto prepared = prepare(c, read_lexicons(a), opts.mode, a.min_viewers);
  Dataset d = assemble(prepared, opts);
  json tuning;
  ModelSpec spec = resolve_spec(m, r.seed, d, &tuning);

  std::vector<PairFilter> filters;
  if (e.same_subject) filters.push_back(PairFilter::same_subject());
  if (e.length_split)
    for (auto p : {LengthPreset::short_short, LengthPreset::long_long, LengthPreset::short_long})
      filters.push_back(PairFilter::length(p, e.length_cutoff));

  CVOptions cvo;
  cvo.k = e.k;
  cvo.seed = r.seed;
  EvalResult res = evaluate_cv(d, spec, cvo, filters);

  const fs::path out(r.out);
  json report = to_json(res);
  report["dataset"] = dataset_summary(d, a);
  if (!tuning.is_null()) report["tuning"] = tuning;
  std::vector<std::string> arts = {"report.json", "bins.csv", "cumulative.csv", "predictions.csv"};
  try {
    LabelTable raw = raw_labels(prepared.lectures, prepared.events, a.epsilon);
    SignalReport sig = correlate_signals(prepared.lectures, raw);
    report["signals"] = to_json(sig)["signal_correlations"];
    write_scatter_csv(out / "scatter.csv", sig);
    arts.push_back("scatter.csv");
  } catch (const UndefinedError& err) {
    std::cerr << "warning: " << err.what() << "\n";
    report["signals"] = nullptr;
  }
  write_json(out / "report.json", report);
  write_bins_csv(out / "bins.csv", res.pooled.misranking);
  write_cumulative_csv(out / "cumulative.csv", res.pooled.misranking);
  {
    std::ofstream p(out / "predictions.csv", std::ios::binary);
    csv::write_row(p, {"lecture_id", "fold", "target", "prediction", "mnet"});
    for (std::size_t i = 0; i < d.size(); ++i)
      csv::write_row(p, {d.ids[i], std::to_string(res.cv.fold_of[i]), csv::format_double(d.y[static_cast<Eigen::Index>(i)]),
                         csv::format_double(res.cv.out_of_fold[static_cast<Eigen::Index>(i)]), csv::format_double(d.mnet[i])});
  }
  write_manifest(out, sub, arts);

  std::printf("%s %s, %d-fold CV on %zu lectures\n", std::string(to_string(spec.family)).c_str(),
              std::string(to_string(d.encoding)).c_str(), e.k, d.size());
  std::printf("pairwise_accuracy %.4f +- %.4f\nsrocc %.4f +- %.4f\nmae %.4f +- %.4f\n", res.cv.pairwise_accuracy.mean,
              res.cv.pairwise_accuracy.std_error, res.cv.srocc.mean, res.cv.srocc.std_error, res.cv.mae.mean,
              res.cv.mae.std_error);
  for (const auto& [name, s] : res.filtered) std::printf("pairwise_accuracy[%s] %.4f +- %.4f\n", name.c_str(), s.mean, s.std_error);
  return 0;
}

struct ExplainArgs {
  int permutations = 128;
  int background = 100;
  int max_rows = 0;
  std::string model_file;
};

int cmd_explain(const CLI::App* sub, const CorpusArgs& a, const ModelArgs& m, const ExplainArgs& x, const Run& r) {
  Dataset d = build_dataset(read_corpus(a), read_lexicons(a), dataset_options(a));
  TrainedModel model = x.model_file.empty() ? train(d.X, d.y, resolve_spec(m, r.seed, d, nullptr)) : load_model(x.model_file);
  if (model.features != d.X.columns)
    throw SignatureMismatchError("model features do not match the dataset columns (check --with-video-features)");

  Eigen::MatrixXd background = sample_background(d.X.values, x.background, r.seed);
  Eigen::MatrixXd rows = d.X.values;
  if (x.max_rows > 0 && rows.rows() > x.max_rows) rows = sample_background(d.X.values, x.max_rows, r.seed + 1);
  ShapleyOptions so{x.permutations, r.seed};
  Eigen::MatrixXd shap = shapley_matrix(predictor(model), rows, background, so);
  ImportanceReport rep = importance_report(d.X.columns, shap, load_verticals(data_dir(a) / "feature_verticals.csv"));
  summary_export(r.out, rep, rows);
  write_manifest(r.out, sub, {"shap_summary.csv", "mas.csv"});
  std::cout << "feature importance (MAS, share):\n";
  for (int j : rep.ranking())
    std::printf("  %-24s %.4f  %.3f\n", rep.columns[static_cast<std::size_t>(j)].c_str(), rep.mas[j], rep.mas_share[j]);
  return 0;
}

int cmd_personalise(const CLI::App* sub, const CorpusArgs& a, const ModelArgs& m, const PersonalOptions& po,
                    const Run& r) {
  Corpus c = read_corpus(a);
  auto opts = dataset_options(a);
  auto prepared = prepare(c, read_lexicons(a), opts.mode, a.min_viewers);
  Dataset d = assemble(prepared, opts);
  PersonalOptions o = po;
  o.seed = r.seed;
  o.epsilon = a.epsilon;
  auto rows = personalised_comparison(d, prepared.lectures, prepared.events, model_spec(m, r.seed), o);
  write_personal_csv(fs::path(r.out) / "personal.csv", rows);
  write_manifest(r.out, sub, {"personal.csv"});
  int evaluated = 0, better = 0;
  for (const auto& u : rows) {
    if (!u.delta_mae) {
      std::cout << "skipped " << u.user_id << ": " << u.skipped << "\n";
      continue;
    }
    ++evaluated;
    if (*u.delta_mae > 0) ++better;
    std::printf("%-12s records %zu  dMAE %+.4f\n", u.user_id.c_str(), u.records, *u.delta_mae);
  }
  std::printf("%d users evaluated, personal model better for %d\n", evaluated, better);
  return 0;
}

int cmd_subject_split(const CLI::App* sub, const CorpusArgs& a, const ModelArgs& m, double split, const Run& r) {
  Dataset d = build_dataset(read_corpus(a), read_lexicons(a), dataset_options(a));
  auto res = subject_split_experiment(d, model_spec(m, r.seed), split, r.seed);
  write_subject_split_csv(fs::path(r.out) / "subject_split.csv", res);
  write_json(fs::path(r.out) / "report.json", to_json(res));
  write_manifest(r.out, sub, {"subject_split.csv", "report.json"});
  std::printf("%-18s %8s %8s\n", "training", "STEM", "Misc");
  std::printf("%-18s %8.4f %8.4f\n", "subject-agnostic", res.accuracy[0][0], res.accuracy[0][1]);
  std::printf("%-18s %8.4f %8.4f\n", "subject-specific", res.accuracy[1][0], res.accuracy[2][1]);
  return 0;
}

int cmd_synth(const CLI::App* sub, GeneratorSpec g, const std::string& dir, const Run& r) {
  g.seed = r.seed;
  const fs::path dd = dir.empty() ? default_data_dir() : fs::path(dir);
  auto sc = generate(g, Lexicons::load(dd / "lexicons"), SubjectMap::load(dd / "subject_areas.csv"));
  write_corpus(r.out, sc.lectures, sc.events);
  {
    std::ofstream out(fs::path(r.out) / "latent.csv", std::ios::binary);
    csv::write_row(out, {"lecture_id", "latent", "target"});
    for (std::size_t i = 0; i < sc.lectures.size(); ++i)
      csv::write_row(out, {sc.lectures[i].id, csv::format_double(sc.latent[i]), csv::format_double(sc.target[i])});
  }
  write_manifest(r.out, sub, {"lectures.csv", "events.csv", "transcripts/", "latent.csv"});
  std::cout << "synth: " << sc.lectures.size() << " lectures, " << sc.events.size() << " events -> " << r.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Context-agnostic engagement prediction for video lectures"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  app.set_version_flag("--version", kToolVersion);
  std::string config;

  CorpusArgs ca;
  ModelArgs ma;
  Run run;
  EvalArgs ea;
  ExplainArgs xa;
  PersonalOptions po;
  double split = 0.7;
  GeneratorSpec gs;
  std::string form = "linear", synth_data;

  auto with_config = [&](CLI::App* s) { s->add_option("--config", config, "JSON file of option values"); };

  auto* ingest = app.add_subcommand("ingest", "Validate a corpus and print counts");
  add_corpus(ingest, ca, false);
  add_run(ingest, run, false);
  with_config(ingest);

  auto* features = app.add_subcommand("features", "Write features.csv");
  add_corpus(features, ca, false);
  add_run(features, run);
  with_config(features);

  auto* labels = app.add_subcommand("labels", "Write labels.csv under an encoding");
  add_corpus(labels, ca, true);
  add_run(labels, run);
  with_config(labels);

  auto* trn = app.add_subcommand("train", "Fit a model on the whole corpus and write model.json");
  add_corpus(trn, ca, true);
  add_model(trn, ma);
  add_run(trn, run);
  with_config(trn);

  auto* ev = app.add_subcommand("eval", "k-fold cross-validated evaluation with plot-ready CSVs");
  add_corpus(ev, ca, true);
  add_model(ev, ma);
  add_run(ev, run);
  ev->add_option("--k", ea.k, "Folds")->check(CLI::Range(2, 1000));
  ev->add_flag("--same-subject", ea.same_subject, "Also score pairs within one subject");
  ev->add_flag("--length-split", ea.length_split, "Also score short/long pair groups");
  ev->add_option("--length-cutoff", ea.length_cutoff, "Word count separating short from long lectures");
  with_config(ev);

  auto* ex = app.add_subcommand("explain", "Shapley feature importance (shap_summary.csv, mas.csv)");
  add_corpus(ex, ca, true);
  add_model(ex, ma);
  add_run(ex, run);
  ex->add_option("--permutations", xa.permutations, "Sampled permutations per observation")->check(CLI::PositiveNumber);
  ex->add_option("--background", xa.background, "Background rows")->check(CLI::PositiveNumber);
  ex->add_option("--max-rows", xa.max_rows, "Explain at most this many lectures (0 = all)");
  ex->add_option("--model-file", xa.model_file, "Explain a saved model instead of training one")->check(CLI::ExistingFile);
  with_config(ex);

  auto* pe = app.add_subcommand("personalise", "Per-user personal vs. population model MAE");
  add_corpus(pe, ca, true);
  add_model(pe, ma);
  add_run(pe, run);
  pe->add_option("--top-k", po.top_k, "Most active users to compare")->check(CLI::PositiveNumber);
  pe->add_option("--split", po.split, "Train fraction")->check(CLI::Range(0.05, 0.95));
  pe->add_option("--min-records", po.min_records, "Minimum lectures watched per user");
  with_config(pe);

  auto* ss = app.add_subcommand("subject-split", "Subject-agnostic vs. subject-specific training");
  add_corpus(ss, ca, true);
  add_model(ss, ma);
  add_run(ss, run);
  ss->add_option("--split", split, "Train fraction")->check(CLI::Range(0.05, 0.95));
  with_config(ss);

  auto* sy = app.add_subcommand("synth", "Generate a synthetic corpus with known latent engagement");
  add_run(sy, run);
  sy->add_option("--lectures", gs.n_lectures, "Lecture count")->check(CLI::PositiveNumber);
  sy->add_option("--users", gs.n_users, "User count")->check(CLI::PositiveNumber);
  sy->add_option("--form", form, "Latent engagement form")->check(CLI::IsMember({"linear", "step", "nonlinear"}));
  sy->add_option("--noise", gs.noise_sd, "Noise standard deviation")->check(CLI::NonNegativeNumber);
  sy->add_option("--min-words", gs.min_words, "Shortest transcript")->check(CLI::PositiveNumber);
  sy->add_option("--max-words", gs.max_words, "Longest transcript")->check(CLI::PositiveNumber);
  sy->add_option("--max-viewers", gs.max_viewers, "Viewers per lecture (upper bound)")->check(CLI::PositiveNumber);
  sy->add_option("--data-dir", synth_data, "Lexicon and mapping directory");
  with_config(sy);

  try {
    app.parse(argc, argv);
    CLI::App* sub = app.get_subcommands().front();
    if (!config.empty()) apply_config(sub, config);
    for (const auto& req : g_required[sub])
      if (sub->get_option(req)->count() == 0) throw UsageError(req + " is required for " + sub->get_name());
    if (sub == ingest) return cmd_ingest(sub, ca, run);
    if (sub == features) return cmd_features(sub, ca, run);
    if (sub == labels) return cmd_labels(sub, ca, run);
    if (sub == trn) return cmd_train(sub, ca, ma, run);
    if (sub == ev) return cmd_eval(sub, ca, ma, ea, run);
    if (sub == ex) return cmd_explain(sub, ca, ma, xa, run);
    if (sub == pe) return cmd_personalise(sub, ca, ma, po, run);
    if (sub == ss) return cmd_subject_split(sub, ca, ma, split, run);
    if (sub == sy) {
      gs.form = parse_latent_form(form);
      return cmd_synth(sub, gs, synth_data, run);
    }
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const engage::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
