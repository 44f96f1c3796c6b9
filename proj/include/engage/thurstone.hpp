#pragma once

#include <span>
#include <vector>

namespace engage {

/// Aggregated outcome counts between two items: `wins` times `winner` beat `loser`.
struct PairCount {
  int winner = 0;
  int loser = 0;
  double wins = 0.0;
};

struct ThurstoneOptions {
  double penalty = 1e-3;        // weight of (1/2)·penalty·||s||²
  double step = 0.5;            // fixed step on the degree-preconditioned gradient
  double tolerance = 1e-8;      // stop once the per-comparison objective gain drops below this
  int max_iterations = 200000;
};

struct ThurstoneFit {
  /// Scale value per item; NaN for items that took part in no comparison.
  std::vector<double> scale;
  /// Connected component id per item (-1 when isolated). Each component has mean-zero scale.
  std::vector<int> component;
  int components = 0;
  int iterations = 0;  // max over components
  bool converged = true;
};

/// Standard normal CDF and the log of it, stable far into the lower tail.
double normal_cdf(double x);
double log_normal_cdf(double x);
/// phi(x) / Phi(x).
double inverse_mills(double x);

/// Case V paired-comparison scaling: maximises
///   sum wins(a,b) · log Phi(s_a - s_b) - (penalty/2) ||s||²
/// separately on each connected component of the comparison graph, anchored to mean zero.
/// Throws UndefinedError when there are no comparisons.
ThurstoneFit fit_thurstone(int n_items, std::span<const PairCount> counts,
                           const ThurstoneOptions& options = {});

/// The penalised log-likelihood maximised by fit_thurstone (all components together).
double thurstone_objective(std::span<const double> scale, std::span<const PairCount> counts,
                           double penalty);

}  // namespace engage
