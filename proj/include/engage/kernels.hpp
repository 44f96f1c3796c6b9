#pragma once

// Data-parallel hot loops. Every OpenMP kernel has a plain serial twin in
// engage::kernels::serial that the tests and the benchmark compare against.

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace engage::kernels {

enum class KernelKind { rbf, linear };

/// k(a,b) = exp(-gamma ||a-b||²) for rbf, a·b for linear.
double kernel_value(const Eigen::Ref<const Eigen::RowVectorXd>& a,
                    const Eigen::Ref<const Eigen::RowVectorXd>& b, KernelKind kind, double gamma);

/// Symmetric Gram matrix of the rows of X.
Eigen::MatrixXd gram(const Eigen::MatrixXd& X, KernelKind kind, double gamma);
/// out(i,j) = k(A_i, B_j).
Eigen::MatrixXd cross(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, KernelKind kind, double gamma);

/// Pairwise ranking tally in half-points: 2 for a correctly ordered pair, 1 for a tied
/// prediction, 0 otherwise. Only pairs with distinct labels are counted.
struct PairTally {
  long long half_points = 0;
  long long pairs = 0;

  double accuracy() const { return 0.5 * static_cast<double>(half_points) / static_cast<double>(pairs); }
  PairTally& operator+=(const PairTally& o) {
    half_points += o.half_points;
    pairs += o.pairs;
    return *this;
  }
};

inline int pair_score(double yi, double yj, double pi, double pj) {
  if (pi == pj) return 1;
  return ((yi < yj) == (pi < pj)) ? 2 : 0;
}

/// Tallies every unordered pair (i<j) with y_i != y_j and accept(i, j) true.
/// Integer reduction, so the result does not depend on thread count.
template <class Accept>
PairTally tally_pairs(std::span<const double> y, std::span<const double> pred, Accept accept) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(y.size());
  long long half = 0, pairs = 0;
#pragma omp parallel for schedule(dynamic, 16) reduction(+ : half, pairs)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    for (std::ptrdiff_t j = i + 1; j < n; ++j) {
      if (y[i] == y[j] || !accept(i, j)) continue;
      half += pair_score(y[i], y[j], pred[i], pred[j]);
      ++pairs;
    }
  }
  return {half, pairs};
}

/// Same as tally_pairs but splits pairs into `bins` groups by `bin_of(i, j)` (-1 = skip).
template <class BinOf>
void tally_pairs_binned(std::span<const double> y, std::span<const double> pred, BinOf bin_of,
                        std::span<PairTally> bins) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(y.size());
  const std::size_t nb = bins.size();
#pragma omp parallel
  {
    std::vector<PairTally> local(nb);
#pragma omp for schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      for (std::ptrdiff_t j = i + 1; j < n; ++j) {
        if (y[i] == y[j]) continue;
        int b = bin_of(i, j);
        if (b < 0) continue;
        local[static_cast<std::size_t>(b)].half_points += pair_score(y[i], y[j], pred[i], pred[j]);
        ++local[static_cast<std::size_t>(b)].pairs;
      }
    }
#pragma omp critical(engage_tally_binned)
    for (std::size_t b = 0; b < nb; ++b) bins[b] += local[b];
  }
}

namespace serial {

Eigen::MatrixXd gram(const Eigen::MatrixXd& X, KernelKind kind, double gamma);
Eigen::MatrixXd cross(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, KernelKind kind, double gamma);

template <class Accept>
PairTally tally_pairs(std::span<const double> y, std::span<const double> pred, Accept accept) {
  PairTally t;
  for (std::size_t i = 0; i < y.size(); ++i)
    for (std::size_t j = i + 1; j < y.size(); ++j) {
      if (y[i] == y[j] || !accept(static_cast<std::ptrdiff_t>(i), static_cast<std::ptrdiff_t>(j))) continue;
      t.half_points += pair_score(y[i], y[j], pred[i], pred[j]);
      ++t.pairs;
    }
  return t;
}

}  // namespace serial

}  // namespace engage::kernels
