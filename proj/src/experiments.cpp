#include "engage/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include "engage/csv.hpp"
#include "engage/error.hpp"
#include "engage/features.hpp"
#include "engage/random.hpp"

namespace engage {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::span<const double> as_span(const Eigen::VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  return out;
}

std::string opt_text(const std::optional<double>& v) { return v ? csv::format_double(*v) : std::string(); }

}  // namespace

// ---- cross-validated evaluation ---------------------------------------------------------

Summary filtered_fold_summary(const CVReport& cv, const Eigen::VectorXd& y, const PairFilter& filter,
                              const PairAttributes& attrs) {
  filter.check(attrs, static_cast<std::size_t>(y.size()));
  std::vector<double> scores;
  for (int f = 0; f < cv.k; ++f) {
    std::vector<int> te;
    for (std::size_t i = 0; i < cv.fold_of.size(); ++i)
      if (cv.fold_of[i] == f) te.push_back(static_cast<int>(i));
    Eigen::VectorXd yt = take(y, te), pt = take(cv.out_of_fold, te);
    auto t = pairwise_tally(as_span(yt), as_span(pt), filter, attrs.subset(te));
    scores.push_back(t.pairs > 0 ? t.accuracy() : std::nan(""));
  }
  return summarize(scores);
}

EvalResult evaluate_cv(const Dataset& data, const ModelSpec& spec, const CVOptions& options,
                       const std::vector<PairFilter>& extra_filters) {
  EvalResult r;
  const PairAttributes attrs = data.attributes();
  r.cv = cross_validate(data.X, data.y, spec, options, attrs);
  r.pooled = evaluate(as_span(data.y), as_span(r.cv.out_of_fold), data.mnet, options.filter, attrs);
  for (const auto& f : extra_filters) r.filtered.emplace_back(f.name(), filtered_fold_summary(r.cv, data.y, f, attrs));
  return r;
}

json to_json(const Summary& s) { return {{"mean", num(s.mean)}, {"std_error", num(s.std_error)}, {"folds", s.folds}}; }

json to_json(const CVReport& cv) {
  json folds = json::array();
  for (const auto& f : cv.folds)
    folds.push_back({{"fold", f.fold},
                     {"n_train", f.n_train},
                     {"n_test", f.n_test},
                     {"pairwise_accuracy", num(f.pairwise_accuracy)},
                     {"srocc", num(f.srocc)},
                     {"mae", num(f.mae)}});
  return {{"model", to_json(cv.spec)},
          {"k", cv.k},
          {"seed", cv.seed},
          {"filter", cv.filter},
          {"folds", folds},
          {"pairwise_accuracy", to_json(cv.pairwise_accuracy)},
          {"srocc", to_json(cv.srocc)},
          {"mae", to_json(cv.mae)}};
}

json to_json(const EvalResult& r) {
  json bins = json::array(), cum = json::array();
  for (const auto& b : r.pooled.misranking.bins)
    bins.push_back({{"lo", b.lo}, {"hi", b.hi}, {"accuracy", opt(b.accuracy)}, {"pairs", b.pairs}});
  for (const auto& c : r.pooled.misranking.cumulative)
    cum.push_back({{"lower_bound", c.lower_bound}, {"accuracy", opt(c.accuracy)}, {"pairs", c.pairs}});
  json filtered = json::object();
  for (const auto& [name, s] : r.filtered) filtered[name] = to_json(s);
  return {{"cross_validation", to_json(r.cv)},
          {"out_of_fold",
           {{"pairwise_accuracy", num(r.pooled.pairwise_accuracy)},
            {"srocc", num(r.pooled.srocc)},
            {"mae", num(r.pooled.mae)},
            {"pairs", r.pooled.pairs},
            {"binned", bins},
            {"cumulative", cum}}},
          {"filtered_pairwise_accuracy", filtered}};
}

void write_bins_csv(const fs::path& path, const Misranking& m) {
  auto out = open_out(path);
  csv::write_row(out, {"bin_lo", "bin_hi", "accuracy", "pairs"});
  for (const auto& b : m.bins)
    csv::write_row(out, {csv::format_double(b.lo), csv::format_double(b.hi), opt_text(b.accuracy), std::to_string(b.pairs)});
}

void write_cumulative_csv(const fs::path& path, const Misranking& m) {
  auto out = open_out(path);
  csv::write_row(out, {"lower_bound", "accuracy", "pairs"});
  for (const auto& c : m.cumulative)
    csv::write_row(out, {csv::format_double(c.lower_bound), opt_text(c.accuracy), std::to_string(c.pairs)});
}

// ---- engagement vs. popularity signals --------------------------------------------------

SignalReport correlate_signals(std::span<const Lecture> lectures, const LabelTable& labels) {
  SignalReport r;
  for (const auto& l : lectures) {
    const LabelEntry* e = labels.find(l.id);
    if (!e || !e->mnet) continue;
    r.scatter.push_back({l.id, *e->mnet, l.view_count, l.mean_star_rating});
  }
  using Get = std::optional<double> (*)(const SignalReport::Row&);
  const std::pair<const char*, Get> signals[] = {
      {"mnet", [](const SignalReport::Row& row) { return std::optional<double>(row.mnet); }},
      {"views", [](const SignalReport::Row& row) {
         return row.views ? std::optional<double>(static_cast<double>(*row.views)) : std::nullopt;
       }},
      {"rating", [](const SignalReport::Row& row) { return row.rating; }},
  };
  bool any = false;
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = a + 1; b < 3; ++b) {
      std::vector<double> xa, xb;
      for (const auto& row : r.scatter) {
        auto va = signals[a].second(row), vb = signals[b].second(row);
        if (va && vb) {
          xa.push_back(*va);
          xb.push_back(*vb);
        }
      }
      SignalPair p{signals[a].first, signals[b].first, std::nullopt, xa.size()};
      if (xa.size() >= 2) {
        try {
          p.srocc = srocc(xa, xb);
          any = true;
        } catch (const UndefinedError&) {
        }
      }
      r.pairs.push_back(p);
    }
  if (!any) throw UndefinedError("correlate_signals: no pair of signals overlaps on two or more varying lectures");
  return r;
}

json to_json(const SignalReport& r) {
  json pairs = json::array();
  for (const auto& p : r.pairs) pairs.push_back({{"a", p.a}, {"b", p.b}, {"srocc", opt(p.srocc)}, {"n", p.n}});
  return {{"signal_correlations", pairs}};
}

void write_scatter_csv(const fs::path& path, const SignalReport& r) {
  auto out = open_out(path);
  csv::write_row(out, {"lecture_id", "mnet", "views", "rating"});
  for (const auto& row : r.scatter)
    csv::write_row(out, {row.lecture_id, csv::format_double(row.mnet), row.views ? std::to_string(*row.views) : "",
                         opt_text(row.rating)});
}

// ---- splits -------------------------------------------------------------------------------

std::pair<std::vector<int>, std::vector<int>> split_indices(std::size_t n, double split, std::uint64_t seed) {
  if (!(split > 0.0 && split < 1.0)) throw ValidationError("split fraction must be in (0, 1)");
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto rng = seeded_rng({seed, 0x73706c6974ULL});
  for (std::size_t i = n; i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(order[i - 1], order[pick(rng)]);
  }
  const auto cut = static_cast<std::size_t>(std::llround(split * static_cast<double>(n)));
  std::vector<int> tr(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cut));
  std::vector<int> te(order.begin() + static_cast<std::ptrdiff_t>(cut), order.end());
  std::sort(tr.begin(), tr.end());
  std::sort(te.begin(), te.end());
  return {tr, te};
}

// ---- personalised vs. population models -------------------------------------------------

std::vector<UserComparison> personalised_comparison(const Dataset& data, std::span<const Lecture> lectures,
                                                    std::span<const ViewEvent> events, const ModelSpec& spec,
                                                    const PersonalOptions& o) {
  if (o.top_k < 1) throw ValidationError("top_k must be >= 1");
  if (!(o.split > 0.0 && o.split < 1.0)) throw ValidationError("split fraction must be in (0, 1)");

  std::map<std::string, int> row_of;
  for (std::size_t i = 0; i < data.ids.size(); ++i) row_of[data.ids[i]] = static_cast<int>(i);

  auto [pop_train, pop_test] = split_indices(data.size(), o.split, o.seed);
  (void)pop_test;
  const TrainedModel population = train({take_rows(data.X.values, pop_train), data.X.columns}, take(data.y, pop_train), spec);
  const Eigen::VectorXd pop_pred = predict(population, data.X);

  // Personal models see only the content (cross-modal) columns.
  const auto& content = content_feature_names();
  std::vector<int> content_cols;
  for (const auto& name : content) {
    auto it = std::find(data.X.columns.begin(), data.X.columns.end(), name);
    if (it == data.X.columns.end()) throw ValidationError("dataset lacks content feature '" + name + "'");
    content_cols.push_back(static_cast<int>(it - data.X.columns.begin()));
  }
  Eigen::MatrixXd content_X(data.X.rows(), static_cast<Eigen::Index>(content_cols.size()));
  for (std::size_t j = 0; j < content_cols.size(); ++j) content_X.col(static_cast<Eigen::Index>(j)) = data.X.values.col(content_cols[j]);

  std::vector<Lecture> kept;
  for (const auto& l : lectures)
    if (row_of.count(l.id)) kept.push_back(l);
  auto records = engagement_records(kept, events);

  std::map<std::string, std::vector<const EngagementRecord*>> by_user;
  std::map<std::string, long long> event_count;
  for (const auto& r : records) {
    by_user[r.user_id].push_back(&r);
    event_count[r.user_id] += r.event_count;
  }
  std::vector<std::string> users;
  for (const auto& [u, _] : by_user) users.push_back(u);
  std::stable_sort(users.begin(), users.end(),
                   [&](const std::string& a, const std::string& b) { return event_count[a] > event_count[b]; });
  if (users.size() > static_cast<std::size_t>(o.top_k)) users.resize(static_cast<std::size_t>(o.top_k));

  std::vector<UserComparison> out;
  for (const auto& u : users) {
    auto recs = by_user[u];
    std::stable_sort(recs.begin(), recs.end(), [](const EngagementRecord* a, const EngagementRecord* b) {
      return a->first_seen < b->first_seen;
    });
    UserComparison c;
    c.user_id = u;
    c.events = event_count[u];
    c.records = recs.size();
    if (static_cast<int>(recs.size()) < o.min_records) {
      c.skipped = "fewer than " + std::to_string(o.min_records) + " lectures watched";
      out.push_back(c);
      continue;
    }
    c.n_train = static_cast<std::size_t>(std::floor(o.split * static_cast<double>(recs.size())));
    c.n_test = recs.size() - c.n_train;
    std::vector<int> tr, te;
    std::vector<double> ytr, yte;
    for (std::size_t i = 0; i < recs.size(); ++i) {
      int row = row_of.at(recs[i]->lecture_id);
      double target = lmnet(recs[i]->normalized_engagement, o.epsilon);
      (i < c.n_train ? tr : te).push_back(row);
      (i < c.n_train ? ytr : yte).push_back(target);
    }
    try {
      FeatureMatrix Xtr{take_rows(content_X, tr), content};
      Eigen::VectorXd y_train = Eigen::Map<Eigen::VectorXd>(ytr.data(), static_cast<Eigen::Index>(ytr.size()));
      ModelSpec personal_spec = spec;
      if (personal_spec.hp.max_features) personal_spec.hp.max_features = std::min(*personal_spec.hp.max_features, static_cast<int>(content.size()));
      const TrainedModel personal = train(Xtr, y_train, personal_spec);
      Eigen::VectorXd p_personal = predict(personal, {take_rows(content_X, te), content});
      Eigen::VectorXd p_pop = take(pop_pred, te);
      c.mae_population = mae(yte, as_span(p_pop));
      c.mae_personal = mae(yte, as_span(p_personal));
      c.delta_mae = *c.mae_population - *c.mae_personal;
    } catch (const Error& e) {
      c.skipped = e.what();
    }
    out.push_back(c);
  }
  return out;
}

void write_personal_csv(const fs::path& path, const std::vector<UserComparison>& rows) {
  auto out = open_out(path);
  csv::write_row(out, {"user_id", "events", "records", "n_train", "n_test", "mae_population", "mae_personal",
                       "delta_mae", "skipped"});
  for (const auto& r : rows)
    csv::write_row(out, {r.user_id, std::to_string(r.events), std::to_string(r.records), std::to_string(r.n_train),
                         std::to_string(r.n_test), opt_text(r.mae_population), opt_text(r.mae_personal),
                         opt_text(r.delta_mae), r.skipped});
}

// ---- subject-agnostic vs. subject-specific training -------------------------------------

SubjectSplitResult subject_split_experiment(const Dataset& data, const ModelSpec& spec, double split,
                                            std::uint64_t seed) {
  auto [tr, te] = split_indices(data.size(), split, seed);
  auto of_area = [&](const std::vector<int>& idx, KnowledgeArea a) {
    std::vector<int> out;
    for (int i : idx)
      if (data.areas[static_cast<std::size_t>(i)] == a) out.push_back(i);
    return out;
  };
  const std::vector<int> train_sets[3] = {tr, of_area(tr, KnowledgeArea::stem), of_area(tr, KnowledgeArea::miscellaneous)};
  const std::vector<int> test_sets[2] = {of_area(te, KnowledgeArea::stem), of_area(te, KnowledgeArea::miscellaneous)};
  const char* names[] = {"all", "STEM", "Miscellaneous"};
  for (int s = 1; s < 3; ++s)
    if (train_sets[s].size() < 2) throw ValidationError(std::string("subject split: too few ") + names[s] + " training lectures");
  for (int s = 0; s < 2; ++s)
    if (test_sets[s].size() < 2) throw ValidationError(std::string("subject split: too few ") + names[s + 1] + " test lectures");

  SubjectSplitResult r;
  for (int s = 0; s < 3; ++s) {
    r.n_train[s] = train_sets[s].size();
    const TrainedModel m =
        train({take_rows(data.X.values, train_sets[s]), data.X.columns}, take(data.y, train_sets[s]), spec);
    for (int t = 0; t < 2; ++t) {
      r.n_test[t] = test_sets[t].size();
      Eigen::VectorXd p = predict(m, {take_rows(data.X.values, test_sets[t]), data.X.columns});
      Eigen::VectorXd y = take(data.y, test_sets[t]);
      r.accuracy[s][t] = pairwise_accuracy(as_span(y), as_span(p));
    }
  }
  return r;
}

json to_json(const SubjectSplitResult& r) {
  return {{"subject_agnostic", {{"STEM", r.accuracy[0][0]}, {"Miscellaneous", r.accuracy[0][1]}}},
          {"subject_specific", {{"STEM", r.accuracy[1][0]}, {"Miscellaneous", r.accuracy[2][1]}}},
          {"cross_area", {{"STEM_on_Miscellaneous", r.accuracy[1][1]}, {"Miscellaneous_on_STEM", r.accuracy[2][0]}}},
          {"n_train", {{"all", r.n_train[0]}, {"STEM", r.n_train[1]}, {"Miscellaneous", r.n_train[2]}}},
          {"n_test", {{"STEM", r.n_test[0]}, {"Miscellaneous", r.n_test[1]}}}};
}

void write_subject_split_csv(const fs::path& path, const SubjectSplitResult& r) {
  auto out = open_out(path);
  csv::write_row(out, {"training", "STEM", "Miscellaneous"});
  csv::write_row(out, {"subject_agnostic", csv::format_double(r.accuracy[0][0]), csv::format_double(r.accuracy[0][1])});
  csv::write_row(out, {"subject_specific", csv::format_double(r.accuracy[1][0]), csv::format_double(r.accuracy[2][1])});
}

}  // namespace engage
