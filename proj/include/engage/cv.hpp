#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "engage/matrix.hpp"
#include "engage/metrics.hpp"
#include "engage/models.hpp"

namespace engage {

/// Shuffles 0..n-1 with `seed` and assigns position p to fold p % k, so fold sizes differ
/// by at most one. Throws ValidationError unless 2 <= k <= n.
std::vector<int> kfold_assignment(std::size_t n, int k, std::uint64_t seed);

struct FoldScore {
  int fold = 0;
  std::size_t n_train = 0, n_test = 0;
  double pairwise_accuracy = 0.0;  // NaN when the fold has no eligible pair
  double srocc = 0.0;              // NaN when undefined on the fold
  double mae = 0.0;
};

struct Summary {
  double mean = 0.0;
  double std_error = 0.0;  // sample std / sqrt(folds used)
  int folds = 0;
};

/// Mean and standard error over the finite entries.
Summary summarize(const std::vector<double>& fold_values);

struct CVOptions {
  int k = 5;
  std::uint64_t seed = 0;
  PairFilter filter;
};

struct CVReport {
  ModelSpec spec;
  int k = 0;
  std::uint64_t seed = 0;
  std::string filter;
  std::vector<FoldScore> folds;
  Summary pairwise_accuracy, srocc, mae;
  std::vector<int> fold_of;           // per observation
  Eigen::VectorXd out_of_fold;        // prediction for each observation from the fold holding it out
};

/// Fits on k-1 folds and scores the held-out fold, for every fold (folds run in parallel).
CVReport cross_validate(const FeatureMatrix& X, const Eigen::VectorXd& y, const ModelSpec& spec,
                        const CVOptions& options = {}, const PairAttributes& attrs = {});

struct Selection {
  ModelSpec spec;
  std::vector<double> scores;  // inner-CV mean pairwise accuracy per grid point
  std::size_t index = 0;
};

/// Grid point with the best inner-CV pairwise accuracy; ties go to the lower complexity_key,
/// then to the earlier grid entry.
Selection select_hyperparameters(const FeatureMatrix& X, const Eigen::VectorXd& y,
                                 const std::vector<ModelSpec>& grid, int inner_k = 3,
                                 std::uint64_t seed = 0);

}  // namespace engage
