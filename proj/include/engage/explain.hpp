#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "engage/matrix.hpp"
#include "engage/models.hpp"

namespace engage {

/// Batch model evaluation: one prediction per row.
using PredictFn = std::function<Eigen::VectorXd(const Eigen::MatrixXd&)>;

PredictFn predictor(const TrainedModel& model);

struct ShapleyOptions {
  int permutations = 128;
  std::uint64_t seed = 0;
};

struct ShapleyResult {
  Eigen::VectorXd values;     // per feature, after the efficiency shift
  Eigen::VectorXd std_error;  // Monte-Carlo standard error per feature
  double prediction = 0.0;    // f(x)
  double base_value = 0.0;    // mean of f over the background
};

/// Permutation-sampling Shapley values. Each permutation takes one background row for the
/// absent features (stratified: each block of rows() permutations uses every row once), then
/// inserts x's features in permutation order and credits each feature with the change in f. Attributions are finally shifted uniformly so they sum to
/// f(x) - mean_background f.
ShapleyResult shapley_sample(const PredictFn& f, const Eigen::RowVectorXd& x, const Eigen::MatrixXd& background,
                             const ShapleyOptions& options);

/// Attributions for every row of X (rows × features); row i is seeded from (seed, i).
Eigen::MatrixXd shapley_matrix(const PredictFn& f, const Eigen::MatrixXd& X, const Eigen::MatrixXd& background,
                               const ShapleyOptions& options);

namespace serial {
Eigen::MatrixXd shapley_matrix(const PredictFn& f, const Eigen::MatrixXd& X, const Eigen::MatrixXd& background,
                               const ShapleyOptions& options);
}

/// Up to `rows` rows of X sampled without replacement with `seed` (all rows when X is smaller).
Eigen::MatrixXd sample_background(const Eigen::MatrixXd& X, int rows, std::uint64_t seed);

struct MasResult {
  Eigen::VectorXd mas;
  Eigen::VectorXd share;
};

/// Per-column mean |value| and its share of the total. Throws UndefinedError on an all-zero
/// matrix.
MasResult mas(const Eigen::MatrixXd& shap);

struct VerticalInfo {
  std::string display_name;
  std::string vertical;
};

/// feature -> (display name, vertical), from feature_verticals.csv.
std::map<std::string, VerticalInfo> load_verticals(const std::filesystem::path& path);

struct ImportanceReport {
  std::vector<std::string> columns;
  Eigen::MatrixXd shap;
  Eigen::VectorXd mas;
  Eigen::VectorXd mas_share;
  std::vector<std::string> vertical;  // "unknown" when the feature has no entry

  /// Column indices by MAS descending (ties keep column order).
  std::vector<int> ranking() const;
  /// Summed share per vertical.
  std::map<std::string, double> vertical_shares() const;
};

ImportanceReport importance_report(const std::vector<std::string>& columns, Eigen::MatrixXd shap,
                                   const std::map<std::string, VerticalInfo>& verticals);

/// Writes shap_summary.csv (feature,observation_index,shap_value,raw_feature_value) and mas.csv
/// (feature,vertical,mas,mas_share) ordered by MAS descending.
void summary_export(const std::filesystem::path& dir, const ImportanceReport& report, const Eigen::MatrixXd& raw);

struct ShapSummary {
  std::vector<std::string> columns;
  Eigen::MatrixXd shap;
  Eigen::MatrixXd raw;
};
ShapSummary read_shap_summary(const std::filesystem::path& path);

struct MasRow {
  std::string feature;
  std::string vertical;
  double mas = 0.0;
  double share = 0.0;
};
std::vector<MasRow> read_mas_csv(const std::filesystem::path& path);

}  // namespace engage
