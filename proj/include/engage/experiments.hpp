#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "engage/cv.hpp"
#include "engage/labels.hpp"
#include "engage/metrics.hpp"
#include "engage/models.hpp"
#include "engage/pipeline.hpp"

namespace engage {

// ---- cross-validated evaluation ---------------------------------------------------------

/// Re-scores a finished CV run's out-of-fold predictions fold by fold under another filter.
Summary filtered_fold_summary(const CVReport& cv, const Eigen::VectorXd& y, const PairFilter& filter,
                              const PairAttributes& attrs);

struct EvalResult {
  CVReport cv;
  EvaluationReport pooled;  // over all out-of-fold predictions
  std::vector<std::pair<std::string, Summary>> filtered;  // extra pair filters, in request order
};

EvalResult evaluate_cv(const Dataset& data, const ModelSpec& spec, const CVOptions& options,
                       const std::vector<PairFilter>& extra_filters);

nlohmann::json to_json(const Summary& s);
nlohmann::json to_json(const CVReport& cv);
nlohmann::json to_json(const EvalResult& r);

void write_bins_csv(const std::filesystem::path& path, const Misranking& m);
void write_cumulative_csv(const std::filesystem::path& path, const Misranking& m);

// ---- engagement vs. popularity signals --------------------------------------------------

struct SignalPair {
  std::string a, b;
  std::optional<double> srocc;  // absent when overlap < 2 or a side is constant
  std::size_t n = 0;
};

struct SignalReport {
  std::vector<SignalPair> pairs;  // (mnet, views), (mnet, rating), (views, rating)
  struct Row {
    std::string lecture_id;
    double mnet = 0.0;
    std::optional<std::int64_t> views;
    std::optional<double> rating;
  };
  std::vector<Row> scatter;
};

/// Spearman correlation between MNET, view count and mean star rating over the lectures where
/// both signals exist. Throws UndefinedError when no pair is defined.
SignalReport correlate_signals(std::span<const Lecture> lectures, const LabelTable& labels);

nlohmann::json to_json(const SignalReport& r);
void write_scatter_csv(const std::filesystem::path& path, const SignalReport& r);

// ---- personalised vs. population models -------------------------------------------------

struct PersonalOptions {
  int top_k = 20;
  double split = 0.7;
  int min_records = 10;
  std::uint64_t seed = 0;
  double epsilon = 1e-3;
};

struct UserComparison {
  std::string user_id;
  long long events = 0;
  std::size_t records = 0, n_train = 0, n_test = 0;
  std::optional<double> mae_population, mae_personal, delta_mae;  // delta = population - personal
  std::string skipped;  // reason, empty when evaluated
};

/// The population model (spec, all columns) is fit on a seeded 70:30 lecture split. Each of
/// the top_k users by event count (ties by user_id) gets a personal model on content features
/// only, trained on their earliest 70% of lectures; both are scored on the user's last 30%
/// against ln(clamp(watch fraction, eps, 1)).
std::vector<UserComparison> personalised_comparison(const Dataset& data, std::span<const Lecture> lectures,
                                                    std::span<const ViewEvent> events, const ModelSpec& spec,
                                                    const PersonalOptions& options = {});

void write_personal_csv(const std::filesystem::path& path, const std::vector<UserComparison>& rows);

// ---- subject-agnostic vs. subject-specific training -------------------------------------

struct SubjectSplitResult {
  // accuracy[train][test]; train ∈ {all, stem, misc}, test ∈ {stem, misc}
  double accuracy[3][2] = {};
  std::size_t n_train[3] = {}, n_test[2] = {};
};

/// Seeded lecture split; throws ValidationError when a knowledge area is empty on either side.
SubjectSplitResult subject_split_experiment(const Dataset& data, const ModelSpec& spec, double split = 0.7,
                                            std::uint64_t seed = 0);

nlohmann::json to_json(const SubjectSplitResult& r);
void write_subject_split_csv(const std::filesystem::path& path, const SubjectSplitResult& r);

/// Seeded shuffle of 0..n-1 cut at round(split * n): (train, test), each sorted.
std::pair<std::vector<int>, std::vector<int>> split_indices(std::size_t n, double split, std::uint64_t seed);

}  // namespace engage
