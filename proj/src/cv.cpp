#include "engage/cv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "engage/error.hpp"
#include "engage/parallel.hpp"
#include "engage/random.hpp"

namespace engage {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::span<const double> as_span(const Eigen::VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

}  // namespace

std::vector<int> kfold_assignment(std::size_t n, int k, std::uint64_t seed) {
  if (k < 2) throw ValidationError("k-fold needs k >= 2");
  if (n < static_cast<std::size_t>(k)) throw ValidationError("k-fold needs at least k observations");
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto rng = seeded_rng({seed, 0x6b666f6c64ULL});
  for (std::size_t i = n - 1; i > 0; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i);
    std::swap(order[i], order[pick(rng)]);
  }
  std::vector<int> fold(n);
  for (std::size_t p = 0; p < n; ++p) fold[static_cast<std::size_t>(order[p])] = static_cast<int>(p % static_cast<std::size_t>(k));
  return fold;
}

Summary summarize(const std::vector<double>& values) {
  std::vector<double> v;
  for (double x : values)
    if (std::isfinite(x)) v.push_back(x);
  Summary s;
  s.folds = static_cast<int>(v.size());
  if (v.empty()) {
    s.mean = s.std_error = kNaN;
    return s;
  }
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() < 2) {
    s.std_error = kNaN;
    return s;
  }
  double ss = 0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.std_error = std::sqrt(ss / static_cast<double>(v.size() - 1)) / std::sqrt(static_cast<double>(v.size()));
  return s;
}

CVReport cross_validate(const FeatureMatrix& X, const Eigen::VectorXd& y, const ModelSpec& spec,
                        const CVOptions& options, const PairAttributes& attrs) {
  if (X.rows() != y.size()) throw ValidationError("cross_validate: rows(X) != len(y)");
  spec.validate();
  const auto n = static_cast<std::size_t>(y.size());
  options.filter.check(attrs, n);

  CVReport r;
  r.spec = spec;
  r.k = options.k;
  r.seed = options.seed;
  r.filter = options.filter.name();
  r.fold_of = kfold_assignment(n, options.k, options.seed);
  r.out_of_fold = Eigen::VectorXd::Constant(y.size(), kNaN);
  r.folds.resize(static_cast<std::size_t>(options.k));

  parallel_for(options.k, [&](std::ptrdiff_t f) {
    std::vector<int> tr, te;
    for (std::size_t i = 0; i < n; ++i) (r.fold_of[i] == f ? te : tr).push_back(static_cast<int>(i));
    FeatureMatrix Xtr{take_rows(X.values, tr), X.columns};
    FeatureMatrix Xte{take_rows(X.values, te), X.columns};
    Eigen::VectorXd ytr = take(y, tr), yte = take(y, te);
    TrainedModel m = train(Xtr, ytr, spec);
    Eigen::VectorXd p = predict(m, Xte);
    for (std::size_t i = 0; i < te.size(); ++i) r.out_of_fold[te[i]] = p[static_cast<Eigen::Index>(i)];

    FoldScore s;
    s.fold = static_cast<int>(f);
    s.n_train = tr.size();
    s.n_test = te.size();
    PairAttributes sub = attrs.subset(te);
    auto t = pairwise_tally(as_span(yte), as_span(p), options.filter, sub);
    s.pairwise_accuracy = t.pairs > 0 ? t.accuracy() : kNaN;
    try {
      s.srocc = srocc(as_span(yte), as_span(p));
    } catch (const UndefinedError&) {
      s.srocc = kNaN;
    }
    s.mae = mae(as_span(yte), as_span(p));
    r.folds[static_cast<std::size_t>(f)] = s;
  });

  std::vector<double> pa, sr, ma;
  for (const auto& s : r.folds) {
    pa.push_back(s.pairwise_accuracy);
    sr.push_back(s.srocc);
    ma.push_back(s.mae);
  }
  r.pairwise_accuracy = summarize(pa);
  r.srocc = summarize(sr);
  r.mae = summarize(ma);
  return r;
}

Selection select_hyperparameters(const FeatureMatrix& X, const Eigen::VectorXd& y, const std::vector<ModelSpec>& grid,
                                 int inner_k, std::uint64_t seed) {
  if (grid.empty()) throw ValidationError("select_hyperparameters: empty grid");
  Selection sel;
  sel.scores.resize(grid.size());
  if (grid.size() == 1) {
    sel.spec = grid.front();
    sel.scores[0] = kNaN;
    return sel;
  }
  CVOptions o;
  o.k = inner_k;
  o.seed = seed;
  for (std::size_t g = 0; g < grid.size(); ++g) sel.scores[g] = cross_validate(X, y, grid[g], o).pairwise_accuracy.mean;

  // Scores within this distance are treated as tied (averaging can differ in the last ulp).
  constexpr double kTie = 1e-12;
  std::size_t best = 0;
  for (std::size_t g = 1; g < grid.size(); ++g) {
    double a = sel.scores[g], b = sel.scores[best];
    if (!std::isfinite(a)) continue;
    if (!std::isfinite(b) || a > b + kTie) {
      best = g;
    } else if (std::abs(a - b) <= kTie && complexity_key(grid[g]) < complexity_key(grid[best])) {
      best = g;
    }
  }
  sel.index = best;
  sel.spec = grid[best];
  return sel;
}

}  // namespace engage
