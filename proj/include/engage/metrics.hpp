#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "engage/kernels.hpp"

namespace engage {

/// Per-observation attributes some pair filters look at. Empty vectors are fine as long as
/// the active filter does not need them.
struct PairAttributes {
  std::vector<std::string> subjects;
  std::vector<double> mnet;
  std::vector<double> word_counts;

  PairAttributes subset(const std::vector<int>& idx) const;
};

enum class LengthPreset { short_short, long_long, short_long };

struct PairFilter {
  enum class Mode { all_pairs, same_subject, mnet_diff_bin, length };

  Mode mode = Mode::all_pairs;
  double lo = 0.0, hi = 1.0;  // mnet_diff_bin: lo <= |Δmnet| < hi
  LengthPreset preset = LengthPreset::short_short;
  double word_cutoff = 5000.0;  // "short" means fewer words than this

  static PairFilter all() { return {}; }
  static PairFilter same_subject() { return {Mode::same_subject}; }
  /// Throws ValidationError unless 0 <= lo < hi <= 1.
  static PairFilter mnet_diff(double lo, double hi);
  static PairFilter length(LengthPreset p, double cutoff = 5000.0);

  std::string name() const;
  /// Throws ValidationError when `attrs` lacks what this filter needs for n observations.
  void check(const PairAttributes& attrs, std::size_t n) const;
  bool accept(const PairAttributes& attrs, std::ptrdiff_t i, std::ptrdiff_t j) const;
};

LengthPreset parse_length_preset(std::string_view name);
std::string_view to_string(LengthPreset p);

kernels::PairTally pairwise_tally(std::span<const double> y, std::span<const double> pred,
                                  const PairFilter& filter = {}, const PairAttributes& attrs = {});

/// Fraction of eligible pairs ordered like the labels; label ties are skipped, prediction ties
/// score one half. Throws UndefinedError when no pair is eligible.
double pairwise_accuracy(std::span<const double> y, std::span<const double> pred,
                         const PairFilter& filter = {}, const PairAttributes& attrs = {});

/// 1-based ranks; ties share their average rank.
std::vector<double> average_ranks(std::span<const double> v);

/// Spearman correlation. Throws UndefinedError when either side has zero rank variance.
double srocc(std::span<const double> a, std::span<const double> b);

double mae(std::span<const double> y, std::span<const double> pred);

struct BinAccuracy {
  double lo = 0.0, hi = 0.0;
  std::optional<double> accuracy;
  long long pairs = 0;
};

struct CumulativeAccuracy {
  double lower_bound = 0.0;
  std::optional<double> accuracy;
  long long pairs = 0;
};

struct Misranking {
  std::vector<BinAccuracy> bins;
  std::vector<CumulativeAccuracy> cumulative;
};

/// Pairs binned by |Δmnet| into [lo, hi) bins of `bin_width` (the last bin also takes Δ = 1);
/// cumulative(lb) covers every pair with Δ in (lb, 1]. Gaps within 1e-9 of an edge count as on it.
Misranking binned_misranking(std::span<const double> y_mnet, std::span<const double> pred,
                             double bin_width = 0.1);

struct EvaluationReport {
  double pairwise_accuracy = 0.0;
  double srocc = 0.0;
  double mae = 0.0;
  long long pairs = 0;
  Misranking misranking;
};

/// All headline metrics for one prediction vector. Misranking needs mnet; it is left empty
/// when `mnet` is empty.
EvaluationReport evaluate(std::span<const double> y, std::span<const double> pred,
                          std::span<const double> mnet, const PairFilter& filter = {},
                          const PairAttributes& attrs = {});

}  // namespace engage
