#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "engage/corpus.hpp"
#include "engage/thurstone.hpp"

namespace engage {

/// Watch fraction of one user on one lecture, all of their events summed and capped at 1.
struct EngagementRecord {
  std::string user_id;
  std::string lecture_id;
  double normalized_engagement = 0.0;
  Timestamp first_seen{};
  int event_count = 0;
};

/// min(1, sum(watch_time_s) / duration_s). Throws ValidationError when duration_s <= 0.
double user_lecture_engagement(std::span<const ViewEvent> events, double duration_s);

/// One record per (user, lecture), ordered by (lecture, user). Events naming unknown lectures
/// are ignored.
std::vector<EngagementRecord> engagement_records(std::span<const Lecture> lectures,
                                                 std::span<const ViewEvent> events);

/// Median; even counts average the middle two. Throws UndefinedError when empty.
double median(std::vector<double> values);

/// Median watch fraction over a lecture's viewers, clamped to [0,1].
double mnet(std::span<const double> user_fractions);
double mnet(std::span<const EngagementRecord> lecture_records);

/// ln(clamp(mnet, epsilon, 1)).
double lmnet(double mnet_value, double epsilon);

struct CleanResult {
  std::vector<ViewEvent> events;
  std::vector<std::string> removed_users;
};

/// Drops every event of users whose mean watch fraction over their (user, lecture) records is
/// strictly below `threshold`.
CleanResult clean_bot_users(std::span<const ViewEvent> events, std::span<const Lecture> lectures,
                            double threshold);

enum class Encoding { raw_lmnet, cleaned_lmnet, standardised_lmnet, comparative };

/// Accepts "raw", "cleaned", "standardised" (or "standardized"), "comparative" and the full
/// encoding names.
Encoding parse_encoding(std::string_view name);
std::string_view to_string(Encoding e);

struct LabelEntry {
  std::string lecture_id;
  std::optional<double> mnet;
  double target = 0.0;

  bool operator==(const LabelEntry&) const = default;
};

struct LabelTable {
  Encoding encoding = Encoding::raw_lmnet;
  std::vector<LabelEntry> entries;
  /// Lectures that could not be labelled, with the reason.
  std::vector<std::pair<std::string, std::string>> excluded;

  const LabelEntry* find(std::string_view lecture_id) const;
};

struct LabelOptions {
  double epsilon = 1e-3;
  double bot_threshold = 0.05;
  ThurstoneOptions thurstone;
};

LabelTable raw_labels(std::span<const Lecture> lectures, std::span<const ViewEvent> events,
                      double epsilon, Encoding tag = Encoding::raw_lmnet);

/// Per-user z-scores of log engagement (population std), lecture target = median z-score.
/// Users with a single record or zero spread contribute nothing.
LabelTable standardised_labels(std::span<const ViewEvent> events, std::span<const Lecture> lectures,
                               double epsilon = 1e-3);

/// Wins counted per user over every pair of lectures they watched (strictly higher watch
/// fraction wins, ties skipped), then scaled with fit_thurstone.
std::vector<PairCount> user_comparisons(std::span<const EngagementRecord> records,
                                        const std::map<std::string, int>& lecture_index);
LabelTable comparative_scale(std::span<const ViewEvent> events, std::span<const Lecture> lectures,
                             const ThurstoneOptions& options = {});

LabelTable build_label_table(std::span<const Lecture> lectures, std::span<const ViewEvent> events,
                             Encoding encoding, const LabelOptions& options = {});

/// labels.csv: lecture_id,encoding,mnet,target (mnet empty where not applicable).
void write_labels_csv(const std::filesystem::path& path, const LabelTable& table);
LabelTable read_labels_csv(const std::filesystem::path& path);

}  // namespace engage
