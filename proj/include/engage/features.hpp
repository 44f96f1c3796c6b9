#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "engage/corpus.hpp"
#include "engage/matrix.hpp"

namespace engage {

/// Closed-class word lists used by the lexical features. All entries lowercase.
struct Lexicons {
  std::set<std::string> stopwords;
  std::set<std::string> prepositions;
  std::set<std::string> auxiliaries;
  std::set<std::string> tobe_forms;
  std::set<std::string> conjunctions;
  std::set<std::string> pronouns;
  std::vector<std::string> normalization_suffixes;

  /// Reads stopwords.txt, prepositions.txt, ... from `dir` (one word per line).
  static Lexicons load(const std::filesystem::path& dir);
  static Lexicons builtin();
  void validate() const;
};

/// Reads a one-word-per-line list; blank lines are skipped, uppercase entries rejected.
std::set<std::string> load_word_list(const std::filesystem::path& path);

enum class FeatureMode { content_only, content_plus_video };

struct VideoFeatures {
  double duration_s = 0.0;
  int is_chunked = 0;
  std::array<int, kLectureTypeCount> lecture_type_onehot{};
  double speaker_speed_wpm = 0.0;
  double silence_period_rate = 0.0;

  bool operator==(const VideoFeatures&) const = default;
};

struct FeatureVector {
  double fk_easiness = 0.0;
  double stopword_presence_rate = 0.0;
  double stopword_coverage_rate = 0.0;
  double document_entropy = 0.0;
  long long word_count = 0;
  long long title_word_count = 0;
  double preposition_rate = 0.0;
  double auxiliary_rate = 0.0;
  double tobe_rate = 0.0;
  double conjunction_rate = 0.0;
  double normalization_rate = 0.0;
  double pronoun_rate = 0.0;
  long long published_days = 0;
  std::optional<VideoFeatures> video;

  bool operator==(const FeatureVector&) const = default;
};

inline constexpr std::size_t kContentFeatureCount = 13;

/// Column names in FeatureVector order.
const std::vector<std::string>& content_feature_names();
const std::vector<std::string>& video_feature_names();
std::vector<std::string> feature_names(FeatureMode mode);

/// Flesch Reading Ease. Throws UndefinedError for text without words.
double fk_easiness(std::string_view text);

struct StopwordRates {
  double presence = 0.0;
  double coverage = 0.0;
};
StopwordRates stopword_rates(std::span<const std::string> tokens, const std::set<std::string>& stopwords);

/// Shannon entropy of the token distribution, in bits.
double document_entropy(std::span<const std::string> tokens);

struct LexicalRates {
  double preposition = 0.0;
  double auxiliary = 0.0;
  double tobe = 0.0;
  double conjunction = 0.0;
  double pronoun = 0.0;
  double normalization = 0.0;
};
/// Normalization matches tokens ending in a suffix with a stem of at least 3 characters.
LexicalRates lexical_rates(std::span<const std::string> tokens, const Lexicons& lex);

/// Days since 1970-01-01; throws ValidationError for earlier dates.
long long published_days(const Date& date);

double silence_period_rate(const Lecture& lecture);

VideoFeatures video_features(const Lecture& lecture, long long word_count);

FeatureVector extract_all(const Lecture& lecture, const Lexicons& lex, FeatureMode mode);

/// Extracts every lecture in parallel; the first failing lecture's error is rethrown.
std::vector<FeatureVector> extract_corpus(std::span<const Lecture> lectures, const Lexicons& lex,
                                          FeatureMode mode);

std::vector<double> to_row(const FeatureVector& fv, FeatureMode mode);
FeatureMatrix design_matrix(std::span<const FeatureVector> features, FeatureMode mode);

/// features.csv: lecture_id followed by every FeatureVector column; video columns are empty
/// when absent.
void write_features_csv(const std::filesystem::path& path, std::span<const std::string> ids,
                        std::span<const FeatureVector> features);
struct FeatureTable {
  std::vector<std::string> ids;
  std::vector<FeatureVector> features;
};
FeatureTable read_features_csv(const std::filesystem::path& path);

}  // namespace engage
