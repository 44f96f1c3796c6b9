#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "engage/forest.hpp"
#include "engage/kernels.hpp"
#include "engage/matrix.hpp"

namespace engage {

enum class Family { RR, SVR, KRR, KSVR, RF };

/// Accepts "rr", "svr", "krr", "ksvr", "rf" in any case.
Family parse_family(std::string_view name);
std::string_view to_string(Family f);

/// Superset of the per-family knobs; each family reads only its own.
struct Hyperparameters {
  double lambda = 1.0;                 // RR, KRR
  double C = 1.0;                      // SVR, KSVR
  double epsilon = 0.1;                // SVR, KSVR insensitive zone
  std::optional<double> gamma;         // KRR, KSVR; unset means 1 / feature count
  kernels::KernelKind kernel = kernels::KernelKind::rbf;  // linear is for testing
  int trees = 500;                     // RF
  std::optional<int> max_features;     // RF; unset means ceil(p / 3)
  int min_leaf = 1;                    // RF
  bool bootstrap = true;               // RF
  std::optional<int> max_depth;        // RF
  int max_epochs = 10000;              // SVR, KSVR
  double tolerance = 1e-8;             // SVR, KSVR
};

struct ModelSpec {
  Family family = Family::RR;
  Hyperparameters hp;
  std::uint64_t seed = 0;

  /// Throws ValidationError when a hyperparameter is out of range for the family.
  void validate() const;
  std::string describe() const;
};

/// Per-column z-scoring; constant columns keep std 1 so they map to 0.
struct Scaler {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;

  static Scaler fit(const Eigen::MatrixXd& X);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const;
  Eigen::MatrixXd invert(const Eigen::MatrixXd& Z) const;
};

struct TrainedModel {
  ModelSpec spec;
  Scaler scaler;
  std::vector<std::string> features;

  // RR / SVR
  Eigen::VectorXd weights;
  double intercept = 0.0;
  // KRR / KSVR
  Eigen::VectorXd alpha;
  Eigen::MatrixXd support;  // scaled training inputs
  double gamma = 0.0;
  // RF
  std::vector<RegressionTree> trees;

  // SVR diagnostics
  std::vector<double> objective_trace;

  Family family() const { return spec.family; }
};

/// Fits the scaler, then the family-specific model on the scaled inputs.
TrainedModel train(const FeatureMatrix& X, const Eigen::VectorXd& y, const ModelSpec& spec);

/// Checks the column signature, then predicts.
Eigen::VectorXd predict(const TrainedModel& model, const FeatureMatrix& X);
/// Predicts from raw (unscaled) rows laid out like the training matrix.
Eigen::VectorXd predict_values(const TrainedModel& model, const Eigen::MatrixXd& X);

nlohmann::json to_json(const TrainedModel& model);
TrainedModel model_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ModelSpec& spec);
ModelSpec spec_from_json(const nlohmann::json& j);

void save_model(const std::filesystem::path& path, const TrainedModel& model);
TrainedModel load_model(const std::filesystem::path& path);

/// Conventional grid per family for p features.
std::vector<ModelSpec> default_grid(Family family, int feature_count, std::uint64_t seed);

/// Lower means simpler; used to break ties during model selection.
std::vector<double> complexity_key(const ModelSpec& spec);

}  // namespace engage
