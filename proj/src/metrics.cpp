#include "engage/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "engage/error.hpp"

namespace engage {

namespace {

void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw ValidationError(std::string(what) + ": length mismatch");
}

}  // namespace

PairAttributes PairAttributes::subset(const std::vector<int>& idx) const {
  PairAttributes out;
  auto pick = [&](const auto& src, auto& dst) {
    if (src.empty()) return;
    for (int i : idx) dst.push_back(src[static_cast<std::size_t>(i)]);
  };
  pick(subjects, out.subjects);
  pick(mnet, out.mnet);
  pick(word_counts, out.word_counts);
  return out;
}

PairFilter PairFilter::mnet_diff(double lo, double hi) {
  if (!(lo >= 0.0 && lo < hi && hi <= 1.0)) throw ValidationError("mnet_diff_bin needs 0 <= lo < hi <= 1");
  PairFilter f;
  f.mode = Mode::mnet_diff_bin;
  f.lo = lo;
  f.hi = hi;
  return f;
}

PairFilter PairFilter::length(LengthPreset p, double cutoff) {
  if (!(cutoff > 0.0)) throw ValidationError("length cutoff must be positive");
  PairFilter f;
  f.mode = Mode::length;
  f.preset = p;
  f.word_cutoff = cutoff;
  return f;
}

LengthPreset parse_length_preset(std::string_view name) {
  if (name == "short_short") return LengthPreset::short_short;
  if (name == "long_long") return LengthPreset::long_long;
  if (name == "short_long") return LengthPreset::short_long;
  throw ValidationError("unknown length preset '" + std::string(name) + "'");
}

std::string_view to_string(LengthPreset p) {
  switch (p) {
    case LengthPreset::short_short: return "short_short";
    case LengthPreset::long_long: return "long_long";
    case LengthPreset::short_long: return "short_long";
  }
  return "?";
}

std::string PairFilter::name() const {
  switch (mode) {
    case Mode::all_pairs: return "all_pairs";
    case Mode::same_subject: return "same_subject";
    case Mode::mnet_diff_bin: return "mnet_diff_bin";
    case Mode::length: return std::string(to_string(preset));
  }
  return "?";
}

void PairFilter::check(const PairAttributes& a, std::size_t n) const {
  auto need = [&](std::size_t have, const char* what) {
    if (have != n) throw ValidationError(name() + " filter needs " + what + " for every observation");
  };
  switch (mode) {
    case Mode::all_pairs: break;
    case Mode::same_subject: need(a.subjects.size(), "subjects"); break;
    case Mode::mnet_diff_bin: need(a.mnet.size(), "MNET values"); break;
    case Mode::length: need(a.word_counts.size(), "word counts"); break;
  }
}

bool PairFilter::accept(const PairAttributes& a, std::ptrdiff_t i, std::ptrdiff_t j) const {
  const auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j);
  switch (mode) {
    case Mode::all_pairs: return true;
    case Mode::same_subject: return a.subjects[ui] == a.subjects[uj];
    case Mode::mnet_diff_bin: {
      double d = std::abs(a.mnet[ui] - a.mnet[uj]);
      return d >= lo && (d < hi || (hi == 1.0 && d <= 1.0));
    }
    case Mode::length: {
      bool si = a.word_counts[ui] < word_cutoff, sj = a.word_counts[uj] < word_cutoff;
      switch (preset) {
        case LengthPreset::short_short: return si && sj;
        case LengthPreset::long_long: return !si && !sj;
        case LengthPreset::short_long: return si != sj;
      }
    }
  }
  return false;
}

kernels::PairTally pairwise_tally(std::span<const double> y, std::span<const double> pred,
                                  const PairFilter& filter, const PairAttributes& attrs) {
  require_same_length(y.size(), pred.size(), "pairwise accuracy");
  filter.check(attrs, y.size());
  if (filter.mode == PairFilter::Mode::all_pairs)
    return kernels::tally_pairs(y, pred, [](std::ptrdiff_t, std::ptrdiff_t) { return true; });
  return kernels::tally_pairs(y, pred, [&](std::ptrdiff_t i, std::ptrdiff_t j) { return filter.accept(attrs, i, j); });
}

double pairwise_accuracy(std::span<const double> y, std::span<const double> pred, const PairFilter& filter,
                         const PairAttributes& attrs) {
  if (y.size() < 2) throw ValidationError("pairwise accuracy needs at least 2 observations");
  auto t = pairwise_tally(y, pred, filter, attrs);
  if (t.pairs == 0) throw UndefinedError("pairwise accuracy: no eligible pairs");
  return t.accuracy();
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double srocc(std::span<const double> a, std::span<const double> b) {
  require_same_length(a.size(), b.size(), "srocc");
  if (a.size() < 2) throw ValidationError("srocc needs at least 2 observations");
  auto ra = average_ranks(a), rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) throw UndefinedError("srocc: zero rank variance");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double mae(std::span<const double> y, std::span<const double> pred) {
  require_same_length(y.size(), pred.size(), "mae");
  if (y.empty()) throw ValidationError("mae needs at least 1 observation");
  double s = 0;
  for (std::size_t i = 0; i < y.size(); ++i) s += std::abs(y[i] - pred[i]);
  return s / static_cast<double>(y.size());
}

Misranking binned_misranking(std::span<const double> y_mnet, std::span<const double> pred, double bin_width) {
  require_same_length(y_mnet.size(), pred.size(), "binned misranking");
  if (!(bin_width > 0.0 && bin_width <= 1.0)) throw ValidationError("bin width must be in (0, 1]");
  for (double m : y_mnet)
    if (!(m >= 0.0 && m <= 1.0)) throw ValidationError("binned misranking needs MNET values in [0, 1]");

  const int nb = std::max(1, static_cast<int>(std::ceil(1.0 / bin_width - 1e-9)));
  auto lower = [&](int k) { return k * bin_width; };
  // MNET gaps carry rounding error (0.75 - 0.15 != 0.6); gaps this close to an edge sit on it.
  constexpr double kEdgeTol = 1e-9;

  // Bin: largest k with lower(k) <= d, capped at the last bin.
  auto bin_index = [&](double d) {
    int k = std::min(nb - 1, static_cast<int>(std::floor(d / bin_width)));
    while (k > 0 && lower(k) > d + kEdgeTol) --k;
    while (k + 1 < nb && lower(k + 1) <= d + kEdgeTol) ++k;
    return k;
  };
  // Cumulative slot: largest k with lower(k) < d; the pair counts towards every lb <= that.
  auto cum_index = [&](double d) {
    int k = std::min(nb - 1, static_cast<int>(std::ceil(d / bin_width)));
    while (k >= 0 && lower(k) >= d - kEdgeTol) --k;
    while (k + 1 < nb && lower(k + 1) < d - kEdgeTol) ++k;
    return k;
  };

  std::vector<kernels::PairTally> bins(static_cast<std::size_t>(nb)), slots(static_cast<std::size_t>(nb));
  kernels::tally_pairs_binned(
      y_mnet, pred, [&](std::ptrdiff_t i, std::ptrdiff_t j) { return bin_index(std::abs(y_mnet[i] - y_mnet[j])); },
      std::span(bins));
  kernels::tally_pairs_binned(
      y_mnet, pred, [&](std::ptrdiff_t i, std::ptrdiff_t j) { return cum_index(std::abs(y_mnet[i] - y_mnet[j])); },
      std::span(slots));

  Misranking out;
  for (int k = 0; k < nb; ++k) {
    BinAccuracy b{lower(k), k + 1 == nb ? 1.0 : lower(k + 1), std::nullopt, bins[k].pairs};
    if (b.pairs > 0) b.accuracy = bins[k].accuracy();
    out.bins.push_back(b);
  }
  kernels::PairTally run;
  std::vector<CumulativeAccuracy> cum(static_cast<std::size_t>(nb));
  for (int k = nb - 1; k >= 0; --k) {
    run += slots[static_cast<std::size_t>(k)];
    CumulativeAccuracy c{lower(k), std::nullopt, run.pairs};
    if (run.pairs > 0) c.accuracy = run.accuracy();
    cum[static_cast<std::size_t>(k)] = c;
  }
  out.cumulative = std::move(cum);
  return out;
}

EvaluationReport evaluate(std::span<const double> y, std::span<const double> pred, std::span<const double> mnet,
                          const PairFilter& filter, const PairAttributes& attrs) {
  EvaluationReport r;
  auto t = pairwise_tally(y, pred, filter, attrs);
  if (t.pairs == 0) throw UndefinedError("evaluation: no eligible pairs");
  r.pairwise_accuracy = t.accuracy();
  r.pairs = t.pairs;
  r.srocc = srocc(y, pred);
  r.mae = mae(y, pred);
  if (!mnet.empty()) r.misranking = binned_misranking(mnet, pred);
  return r;
}

}  // namespace engage
