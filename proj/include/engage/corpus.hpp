#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "engage/dates.hpp"

namespace engage {

enum class KnowledgeArea { stem, miscellaneous };

enum class LectureType { tutorial, workshop, invited_talk, keynote, lecture, other };
inline constexpr std::size_t kLectureTypeCount = 6;

std::string_view to_string(KnowledgeArea a);
std::string_view to_string(LectureType t);
/// Accepts the canonical names ("invited talk") and underscore forms ("invited_talk").
LectureType parse_lecture_type(std::string_view name);
KnowledgeArea parse_knowledge_area(std::string_view name);

enum class SegmentKind { speech, silence };

struct Segment {
  double start_s = 0.0;
  double end_s = 0.0;
  SegmentKind kind = SegmentKind::speech;
  std::string text;  // empty for silence

  double duration() const { return end_s - start_s; }
  bool operator==(const Segment&) const = default;
};

struct Transcript {
  std::vector<Segment> segments;

  /// Speech segment texts joined by single spaces.
  std::string speech_text() const;
  bool operator==(const Transcript&) const = default;
};

struct Lecture {
  std::string id;
  std::string title;
  std::string subject;
  KnowledgeArea knowledge_area = KnowledgeArea::miscellaneous;
  LectureType lecture_type = LectureType::lecture;
  Date published_date{};
  double duration_s = 0.0;
  int num_parts = 1;
  Transcript transcript;
  std::optional<double> mean_star_rating;
  std::optional<std::int64_t> view_count;

  bool operator==(const Lecture&) const = default;
};

struct ViewEvent {
  std::string user_id;
  std::string lecture_id;
  Timestamp timestamp{};
  double watch_time_s = 0.0;

  bool operator==(const ViewEvent&) const = default;
};

/// Subject name -> knowledge area, loaded from a two-column CSV (subject,knowledge_area).
class SubjectMap {
 public:
  SubjectMap() = default;
  explicit SubjectMap(std::map<std::string, KnowledgeArea> table) : table_(std::move(table)) {}

  static SubjectMap load(const std::filesystem::path& path);
  /// The table shipped in the data directory.
  static SubjectMap builtin();

  KnowledgeArea area_of(std::string_view subject) const;
  bool contains(std::string_view subject) const;
  const std::map<std::string, KnowledgeArea>& table() const { return table_; }

 private:
  std::map<std::string, KnowledgeArea> table_;
};

/// Directory holding lexicons and mapping tables: $ENGAGE_DATA_DIR or the install default.
std::filesystem::path default_data_dir();

/// Checks every Lecture/Transcript invariant; throws ValidationError naming the lecture.
void validate(const Lecture& lecture);
/// Sorts segments by start time, then checks bounds, disjointness and silence-has-no-text.
void normalize_transcript(Transcript& t, double duration_s, std::string_view lecture_id);

enum class LectureFormat { csv, json };

/// Loads lecture metadata; transcripts are read from `transcripts_dir/<id>.json` when that
/// directory exists (JSON input may also embed them). Missing transcripts stay empty.
std::vector<Lecture> load_lectures(const std::filesystem::path& path, LectureFormat format,
                                   const SubjectMap& subjects,
                                   std::optional<std::filesystem::path> transcripts_dir = {});

Transcript load_transcript(const std::filesystem::path& path, double duration_s,
                           std::string_view lecture_id);

struct RowIssue {
  std::size_t line = 0;
  std::string message;
};

struct EventLoad {
  std::vector<ViewEvent> events;
  std::vector<RowIssue> rejected;
  std::vector<std::string> warnings;
};

EventLoad load_events(const std::filesystem::path& path);

struct FilterResult {
  std::vector<Lecture> lectures;
  std::vector<ViewEvent> events;
  std::size_t dropped_lectures = 0;
  std::size_t dropped_events = 0;
};

/// Keeps lectures with at least k distinct viewers, and only events that belong to them.
FilterResult filter_min_viewers(const std::vector<Lecture>& lectures,
                                const std::vector<ViewEvent>& events, int k);

struct Corpus {
  std::vector<Lecture> lectures;
  std::vector<ViewEvent> events;
  std::vector<RowIssue> rejected_events;
  std::vector<std::string> warnings;
};

/// Reads `dir/lectures.csv` (or lectures.json), `dir/transcripts/` and `dir/events.csv`.
Corpus load_corpus(const std::filesystem::path& dir, const SubjectMap& subjects);

void write_lectures_csv(const std::filesystem::path& path, const std::vector<Lecture>& lectures);
void write_lectures_json(const std::filesystem::path& path, const std::vector<Lecture>& lectures,
                         bool embed_transcripts);
void write_transcript(const std::filesystem::path& path, const Transcript& t);
void write_events_csv(const std::filesystem::path& path, const std::vector<ViewEvent>& events);
/// Writes the directory layout understood by load_corpus (CSV lectures + transcript files).
void write_corpus(const std::filesystem::path& dir, const std::vector<Lecture>& lectures,
                  const std::vector<ViewEvent>& events);

}  // namespace engage
