#include "engage/explain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "engage/csv.hpp"
#include "engage/error.hpp"
#include "engage/parallel.hpp"
#include "engage/random.hpp"

namespace engage {

namespace fs = std::filesystem;

PredictFn predictor(const TrainedModel& model) {
  return [&model](const Eigen::MatrixXd& X) { return predict_values(model, X); };
}

namespace {

void check_inputs(const Eigen::MatrixXd& background, Eigen::Index features, int permutations) {
  if (background.rows() == 0) throw ValidationError("shapley: empty background");
  if (background.cols() != features) throw ValidationError("shapley: background width differs from x");
  if (permutations < 1) throw ValidationError("shapley: need at least one permutation");
}

double base_value(const PredictFn& f, const Eigen::MatrixXd& background) { return f(background).mean(); }

ShapleyResult shapley_row(const PredictFn& f, const Eigen::RowVectorXd& x, const Eigen::MatrixXd& background,
                          double base, int M, std::mt19937_64 rng) {
  const Eigen::Index F = x.size();
  const Eigen::Index block = F + 1;
  std::vector<std::vector<Eigen::Index>> perms(static_cast<std::size_t>(M));
  Eigen::MatrixXd walk(M * block, F);
  // Background rows are drawn stratified: every run of B permutations uses each row once,
  // in a fresh random order. Unbiased like iid draws, with less variance.
  const Eigen::Index B = background.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(B));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  auto shuffle = [&](auto& v) {
    for (std::size_t i = v.size() - 1; i > 0; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i);
      std::swap(v[i], v[pick(rng)]);
    }
  };
  for (int m = 0; m < M; ++m) {
    if (m % B == 0 && B > 1) shuffle(order);
    auto& perm = perms[static_cast<std::size_t>(m)];
    perm.resize(static_cast<std::size_t>(F));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    for (Eigen::Index i = F - 1; i > 0; --i) {
      std::uniform_int_distribution<Eigen::Index> pick(0, i);
      std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(pick(rng))]);
    }
    Eigen::RowVectorXd z = background.row(order[static_cast<std::size_t>(m % B)]);
    walk.row(m * block) = z;
    for (Eigen::Index k = 0; k < F; ++k) {
      Eigen::Index feat = perm[static_cast<std::size_t>(k)];
      z[feat] = x[feat];
      walk.row(m * block + k + 1) = z;
    }
  }
  const Eigen::VectorXd v = f(walk);

  Eigen::MatrixXd contrib(M, F);
  for (int m = 0; m < M; ++m)
    for (Eigen::Index k = 0; k < F; ++k)
      contrib(m, perms[static_cast<std::size_t>(m)][static_cast<std::size_t>(k)]) =
          v[m * block + k + 1] - v[m * block + k];

  ShapleyResult r;
  r.prediction = v[block - 1];
  r.base_value = base;
  r.values = contrib.colwise().mean().transpose();
  r.std_error = Eigen::VectorXd::Zero(F);
  if (M > 1) {
    for (Eigen::Index j = 0; j < F; ++j) {
      double ss = (contrib.col(j).array() - r.values[j]).square().sum();
      r.std_error[j] = std::sqrt(ss / (M - 1) / M);
    }
  }
  const double gap = (r.prediction - base) - r.values.sum();
  r.values.array() += gap / static_cast<double>(F);
  return r;
}

}  // namespace

ShapleyResult shapley_sample(const PredictFn& f, const Eigen::RowVectorXd& x, const Eigen::MatrixXd& background,
                             const ShapleyOptions& o) {
  check_inputs(background, x.size(), o.permutations);
  return shapley_row(f, x, background, base_value(f, background), o.permutations, seeded_rng({o.seed}));
}

Eigen::MatrixXd shapley_matrix(const PredictFn& f, const Eigen::MatrixXd& X, const Eigen::MatrixXd& background,
                               const ShapleyOptions& o) {
  check_inputs(background, X.cols(), o.permutations);
  const double base = base_value(f, background);
  Eigen::MatrixXd out(X.rows(), X.cols());
  parallel_for(X.rows(), [&](std::ptrdiff_t i) {
    out.row(i) = shapley_row(f, X.row(i), background, base, o.permutations,
                             seeded_rng({o.seed, static_cast<std::uint64_t>(i)}))
                     .values.transpose();
  });
  return out;
}

Eigen::MatrixXd serial::shapley_matrix(const PredictFn& f, const Eigen::MatrixXd& X, const Eigen::MatrixXd& background,
                                       const ShapleyOptions& o) {
  check_inputs(background, X.cols(), o.permutations);
  const double base = base_value(f, background);
  Eigen::MatrixXd out(X.rows(), X.cols());
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    out.row(i) = shapley_row(f, X.row(i), background, base, o.permutations,
                             seeded_rng({o.seed, static_cast<std::uint64_t>(i)}))
                     .values.transpose();
  return out;
}

Eigen::MatrixXd sample_background(const Eigen::MatrixXd& X, int rows, std::uint64_t seed) {
  if (rows < 1) throw ValidationError("background needs at least one row");
  if (X.rows() <= rows) return X;
  std::vector<int> idx(static_cast<std::size_t>(X.rows()));
  std::iota(idx.begin(), idx.end(), 0);
  auto rng = seeded_rng({seed, 0x626b67ULL});
  for (int i = 0; i < rows; ++i) {
    std::uniform_int_distribution<int> pick(i, static_cast<int>(X.rows()) - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
  }
  idx.resize(static_cast<std::size_t>(rows));
  std::sort(idx.begin(), idx.end());
  return take_rows(X, idx);
}

MasResult mas(const Eigen::MatrixXd& shap) {
  if (shap.rows() == 0) throw ValidationError("mas needs at least one observation");
  MasResult r;
  r.mas = shap.cwiseAbs().colwise().mean().transpose();
  const double total = r.mas.sum();
  if (!(total > 0.0)) throw UndefinedError("mas: all attributions are zero, shares undefined");
  r.share = r.mas / total;
  return r;
}

std::map<std::string, VerticalInfo> load_verticals(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  csv::Reader reader(in, path.string());
  std::map<std::string, VerticalInfo> out;
  if (!reader.read_header()) return out;
  const int cf = reader.require("feature"), cd = reader.require("display_name"), cv = reader.require("vertical");
  csv::Row row;
  while (reader.next(row)) {
    if (row.fields.size() != reader.header().size()) throw ParseError(path.string(), row.line, "wrong field count");
    out[row.fields[static_cast<std::size_t>(cf)]] = {row.fields[static_cast<std::size_t>(cd)],
                                                     row.fields[static_cast<std::size_t>(cv)]};
  }
  return out;
}

std::vector<int> ImportanceReport::ranking() const {
  std::vector<int> order(static_cast<std::size_t>(mas.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return mas[a] > mas[b]; });
  return order;
}

std::map<std::string, double> ImportanceReport::vertical_shares() const {
  std::map<std::string, double> out;
  for (std::size_t j = 0; j < vertical.size(); ++j) out[vertical[j]] += mas_share[static_cast<Eigen::Index>(j)];
  return out;
}

ImportanceReport importance_report(const std::vector<std::string>& columns, Eigen::MatrixXd shap,
                                   const std::map<std::string, VerticalInfo>& verticals) {
  if (static_cast<std::size_t>(shap.cols()) != columns.size())
    throw ValidationError("importance report: shap width differs from column count");
  ImportanceReport r;
  r.columns = columns;
  auto m = mas(shap);
  r.shap = std::move(shap);
  r.mas = std::move(m.mas);
  r.mas_share = std::move(m.share);
  for (const auto& c : columns) {
    auto it = verticals.find(c);
    r.vertical.push_back(it == verticals.end() ? "unknown" : it->second.vertical);
  }
  return r;
}

void summary_export(const fs::path& dir, const ImportanceReport& report, const Eigen::MatrixXd& raw) {
  if (raw.rows() != report.shap.rows() || raw.cols() != report.shap.cols())
    throw ValidationError("summary export: raw feature matrix shape differs from the shap matrix");
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "shap_summary.csv", std::ios::binary);
    if (!out) throw Error("cannot write '" + (dir / "shap_summary.csv").string() + "'");
    csv::write_row(out, {"feature", "observation_index", "shap_value", "raw_feature_value"});
    for (Eigen::Index j = 0; j < report.shap.cols(); ++j)
      for (Eigen::Index i = 0; i < report.shap.rows(); ++i)
        csv::write_row(out, {report.columns[static_cast<std::size_t>(j)], std::to_string(i),
                             csv::format_double(report.shap(i, j)), csv::format_double(raw(i, j))});
  }
  std::ofstream out(dir / "mas.csv", std::ios::binary);
  if (!out) throw Error("cannot write '" + (dir / "mas.csv").string() + "'");
  csv::write_row(out, {"feature", "vertical", "mas", "mas_share"});
  for (int j : report.ranking())
    csv::write_row(out, {report.columns[static_cast<std::size_t>(j)], report.vertical[static_cast<std::size_t>(j)],
                         csv::format_double(report.mas[j]), csv::format_double(report.mas_share[j])});
}

ShapSummary read_shap_summary(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  csv::Reader reader(in, path.string());
  if (!reader.read_header()) throw ParseError(path.string(), 1, "empty file");
  const int cf = reader.require("feature"), ci = reader.require("observation_index"),
            cs = reader.require("shap_value"), cr = reader.require("raw_feature_value");
  struct Cell {
    long long row;
    double shap, raw;
  };
  std::vector<std::string> columns;
  std::map<std::string, std::vector<Cell>> cells;
  long long rows = 0;
  csv::Row row;
  while (reader.next(row)) {
    if (row.fields.size() != reader.header().size()) throw ParseError(path.string(), row.line, "wrong field count");
    const auto& f = row.fields;
    const std::string& name = f[static_cast<std::size_t>(cf)];
    if (!cells.count(name)) columns.push_back(name);
    Cell c{csv::parse_int(f[static_cast<std::size_t>(ci)], path.string(), row.line, "observation_index"),
           csv::parse_double(f[static_cast<std::size_t>(cs)], path.string(), row.line, "shap_value"),
           csv::parse_double(f[static_cast<std::size_t>(cr)], path.string(), row.line, "raw_feature_value")};
    if (c.row < 0) throw ParseError(path.string(), row.line, "negative observation_index");
    rows = std::max(rows, c.row + 1);
    cells[name].push_back(c);
  }
  ShapSummary s;
  s.columns = columns;
  s.shap = Eigen::MatrixXd::Constant(rows, static_cast<Eigen::Index>(columns.size()), std::nan(""));
  s.raw = s.shap;
  for (std::size_t j = 0; j < columns.size(); ++j)
    for (const auto& c : cells[columns[j]]) {
      s.shap(c.row, static_cast<Eigen::Index>(j)) = c.shap;
      s.raw(c.row, static_cast<Eigen::Index>(j)) = c.raw;
    }
  if (!s.shap.allFinite()) throw ParseError(path.string(), 0, "summary does not cover every (feature, observation)");
  return s;
}

std::vector<MasRow> read_mas_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  csv::Reader reader(in, path.string());
  if (!reader.read_header()) throw ParseError(path.string(), 1, "empty file");
  const int cf = reader.require("feature"), cv = reader.require("vertical"), cm = reader.require("mas"),
            cs = reader.require("mas_share");
  std::vector<MasRow> out;
  csv::Row row;
  while (reader.next(row)) {
    if (row.fields.size() != reader.header().size()) throw ParseError(path.string(), row.line, "wrong field count");
    const auto& f = row.fields;
    out.push_back({f[static_cast<std::size_t>(cf)], f[static_cast<std::size_t>(cv)],
                   csv::parse_double(f[static_cast<std::size_t>(cm)], path.string(), row.line, "mas"),
                   csv::parse_double(f[static_cast<std::size_t>(cs)], path.string(), row.line, "mas_share")});
  }
  return out;
}

}  // namespace engage
