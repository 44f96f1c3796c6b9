#include "engage/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "engage/csv.hpp"
#include "engage/error.hpp"

namespace engage {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kLectureTypeNames[kLectureTypeCount] = {
    "tutorial", "workshop", "invited talk", "keynote", "lecture", "other"};

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  return in;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  return out;
}

SegmentKind parse_kind(std::string_view s) {
  if (s == "speech") return SegmentKind::speech;
  if (s == "silence") return SegmentKind::silence;
  throw ValidationError("segment kind must be 'speech' or 'silence', got '" + std::string(s) + "'");
}

json transcript_to_json(const Transcript& t) {
  json segs = json::array();
  for (const auto& s : t.segments) {
    segs.push_back({{"start_s", s.start_s},
                    {"end_s", s.end_s},
                    {"kind", s.kind == SegmentKind::speech ? "speech" : "silence"},
                    {"text", s.text}});
  }
  return json{{"segments", segs}};
}

Transcript transcript_from_json(const json& j, const std::string& source) {
  Transcript t;
  if (!j.is_object() || !j.contains("segments") || !j["segments"].is_array())
    throw ParseError(source, 0, "transcript must be an object with a 'segments' array");
  for (const auto& s : j["segments"]) {
    Segment seg;
    try {
      seg.start_s = s.at("start_s").get<double>();
      seg.end_s = s.at("end_s").get<double>();
      seg.kind = parse_kind(s.at("kind").get<std::string>());
      if (s.contains("text") && !s["text"].is_null()) seg.text = s["text"].get<std::string>();
    } catch (const json::exception& e) {
      throw ParseError(source, 0, std::string("bad segment: ") + e.what());
    }
    t.segments.push_back(std::move(seg));
  }
  return t;
}

}  // namespace

std::string_view to_string(KnowledgeArea a) {
  return a == KnowledgeArea::stem ? "STEM" : "Miscellaneous";
}

std::string_view to_string(LectureType t) { return kLectureTypeNames[static_cast<int>(t)]; }

LectureType parse_lecture_type(std::string_view name) {
  std::string n = lower(name);
  std::replace(n.begin(), n.end(), '_', ' ');
  for (std::size_t i = 0; i < kLectureTypeCount; ++i)
    if (n == kLectureTypeNames[i]) return static_cast<LectureType>(i);
  throw ValidationError("unknown lecture_type '" + std::string(name) + "'");
}

KnowledgeArea parse_knowledge_area(std::string_view name) {
  std::string n = lower(name);
  if (n == "stem") return KnowledgeArea::stem;
  if (n == "miscellaneous" || n == "misc") return KnowledgeArea::miscellaneous;
  throw ValidationError("unknown knowledge area '" + std::string(name) + "'");
}

std::string Transcript::speech_text() const {
  std::string out;
  for (const auto& s : segments) {
    if (s.kind != SegmentKind::speech || s.text.empty()) continue;
    if (!out.empty()) out.push_back(' ');
    out += s.text;
  }
  return out;
}

SubjectMap SubjectMap::load(const fs::path& path) {
  auto in = open_in(path);
  csv::Reader reader(in, path.string());
  if (!reader.read_header()) throw ParseError(path.string(), 0, "empty subject map");
  int subj = reader.require("subject");
  int area = reader.require("knowledge_area");
  std::map<std::string, KnowledgeArea> table;
  csv::Row row;
  while (reader.next(row)) {
    if (row.fields.size() != reader.header().size())
      throw ParseError(path.string(), row.line, "wrong number of fields");
    try {
      table[row.fields[subj]] = parse_knowledge_area(row.fields[area]);
    } catch (const ValidationError& e) {
      throw ParseError(path.string(), row.line, e.what());
    }
  }
  return SubjectMap(std::move(table));
}

SubjectMap SubjectMap::builtin() { return load(default_data_dir() / "subject_areas.csv"); }

KnowledgeArea SubjectMap::area_of(std::string_view subject) const {
  auto it = table_.find(std::string(subject));
  if (it == table_.end()) throw ValidationError("unknown subject '" + std::string(subject) + "'");
  return it->second;
}

bool SubjectMap::contains(std::string_view subject) const {
  return table_.count(std::string(subject)) > 0;
}

fs::path default_data_dir() {
  if (const char* env = std::getenv("ENGAGE_DATA_DIR"); env && *env) return env;
  return ENGAGE_DEFAULT_DATA_DIR;
}

void normalize_transcript(Transcript& t, double duration_s, std::string_view lecture_id) {
  auto fail = [&](const std::string& what) {
    throw ValidationError("lecture '" + std::string(lecture_id) + "': transcript " + what);
  };
  std::stable_sort(t.segments.begin(), t.segments.end(),
                   [](const Segment& a, const Segment& b) { return a.start_s < b.start_s; });
  for (std::size_t i = 0; i < t.segments.size(); ++i) {
    const auto& s = t.segments[i];
    if (!(s.start_s >= 0.0) || !(s.start_s < s.end_s) || !(s.end_s <= duration_s))
      fail("segment " + std::to_string(i) + " must satisfy 0 <= start < end <= duration");
    if (s.kind == SegmentKind::silence && !s.text.empty())
      fail("silence segment " + std::to_string(i) + " carries text");
    if (i > 0 && s.start_s < t.segments[i - 1].end_s)
      fail("segments " + std::to_string(i - 1) + " and " + std::to_string(i) + " overlap");
  }
}

void validate(const Lecture& l) {
  auto fail = [&](const std::string& what) {
    throw ValidationError("lecture '" + l.id + "': " + what);
  };
  if (l.id.empty()) throw ValidationError("lecture with empty id");
  if (!(l.duration_s > 0.0) || !std::isfinite(l.duration_s)) fail("duration_s must be > 0");
  if (l.num_parts < 1) fail("num_parts must be >= 1");
  if (!l.published_date.ok()) fail("invalid published_date");
  if (l.mean_star_rating && !(*l.mean_star_rating >= 1.0 && *l.mean_star_rating <= 5.0))
    fail("mean_star_rating must lie in [1,5]");
  if (l.view_count && *l.view_count < 0) fail("view_count must be >= 0");
  Transcript copy = l.transcript;
  normalize_transcript(copy, l.duration_s, l.id);
  if (!(copy == l.transcript)) fail("transcript segments are not in start order");
}

Transcript load_transcript(const fs::path& path, double duration_s, std::string_view lecture_id) {
  auto in = open_in(path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string(), 0, e.what());
  }
  Transcript t = transcript_from_json(j, path.string());
  normalize_transcript(t, duration_s, lecture_id);
  return t;
}

namespace {

std::optional<double> optional_double(const csv::Row& row, int col, const std::string& src,
                                      std::string_view name) {
  if (col < 0 || static_cast<std::size_t>(col) >= row.fields.size() || row.fields[col].empty())
    return std::nullopt;
  return csv::parse_double(row.fields[col], src, row.line, name);
}

std::optional<std::int64_t> optional_int(const csv::Row& row, int col, const std::string& src,
                                         std::string_view name) {
  if (col < 0 || static_cast<std::size_t>(col) >= row.fields.size() || row.fields[col].empty())
    return std::nullopt;
  return csv::parse_int(row.fields[col], src, row.line, name);
}

std::vector<Lecture> lectures_from_csv(const fs::path& path, const SubjectMap& subjects) {
  auto in = open_in(path);
  const std::string src = path.string();
  csv::Reader reader(in, src);
  if (!reader.read_header()) return {};
  const int c_id = reader.require("id"), c_title = reader.require("title"),
            c_subject = reader.require("subject"), c_type = reader.require("lecture_type"),
            c_date = reader.require("published_date"), c_dur = reader.require("duration_s"),
            c_parts = reader.require("num_parts"), c_rating = reader.column("mean_star_rating"),
            c_views = reader.column("view_count");

  std::vector<Lecture> out;
  csv::Row row;
  while (reader.next(row)) {
    if (row.fields.size() != reader.header().size())
      throw ParseError(src, row.line,
                       "expected " + std::to_string(reader.header().size()) + " fields, got " +
                           std::to_string(row.fields.size()));
    Lecture l;
    try {
      l.id = row.fields[c_id];
      l.title = row.fields[c_title];
      l.subject = row.fields[c_subject];
      l.knowledge_area = subjects.area_of(l.subject);
      l.lecture_type = parse_lecture_type(row.fields[c_type]);
      l.published_date = parse_date(row.fields[c_date]);
      l.duration_s = csv::parse_double(row.fields[c_dur], src, row.line, "duration_s");
      l.num_parts = static_cast<int>(csv::parse_int(row.fields[c_parts], src, row.line, "num_parts"));
      l.mean_star_rating = optional_double(row, c_rating, src, "mean_star_rating");
      l.view_count = optional_int(row, c_views, src, "view_count");
      validate(l);
    } catch (const ValidationError& e) {
      throw ParseError(src, row.line, e.what());
    }
    out.push_back(std::move(l));
  }
  return out;
}

std::vector<Lecture> lectures_from_json(const fs::path& path, const SubjectMap& subjects,
                                        std::vector<bool>& has_transcript) {
  auto in = open_in(path);
  const std::string src = path.string();
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(src, 0, e.what());
  }
  if (j.is_object() && j.contains("lectures")) j = j["lectures"];
  if (!j.is_array()) throw ParseError(src, 0, "expected an array of lecture objects");
  std::vector<Lecture> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& o = j[i];
    // Records are numbered from 1 so messages read like line numbers.
    const std::size_t rec = i + 1;
    Lecture l;
    try {
      l.id = o.at("id").get<std::string>();
      l.title = o.value("title", "");
      l.subject = o.at("subject").get<std::string>();
      l.knowledge_area = subjects.area_of(l.subject);
      l.lecture_type = parse_lecture_type(o.at("lecture_type").get<std::string>());
      l.published_date = parse_date(o.at("published_date").get<std::string>());
      l.duration_s = o.at("duration_s").get<double>();
      l.num_parts = o.at("num_parts").get<int>();
      if (o.contains("mean_star_rating") && !o["mean_star_rating"].is_null())
        l.mean_star_rating = o["mean_star_rating"].get<double>();
      if (o.contains("view_count") && !o["view_count"].is_null())
        l.view_count = o["view_count"].get<std::int64_t>();
      bool embedded = o.contains("transcript") && !o["transcript"].is_null();
      if (embedded) l.transcript = transcript_from_json(o["transcript"], src);
      has_transcript.push_back(embedded);
      normalize_transcript(l.transcript, l.duration_s, l.id);
      validate(l);
    } catch (const json::exception& e) {
      throw ParseError(src, rec, std::string("record ") + std::to_string(rec) + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ParseError(src, rec, e.what());
    }
    out.push_back(std::move(l));
  }
  return out;
}

}  // namespace

std::vector<Lecture> load_lectures(const fs::path& path, LectureFormat format,
                                   const SubjectMap& subjects,
                                   std::optional<fs::path> transcripts_dir) {
  std::vector<bool> has_transcript;
  std::vector<Lecture> lectures = format == LectureFormat::csv
                                      ? lectures_from_csv(path, subjects)
                                      : lectures_from_json(path, subjects, has_transcript);
  has_transcript.resize(lectures.size(), false);

  std::unordered_set<std::string> seen;
  for (const auto& l : lectures)
    if (!seen.insert(l.id).second)
      throw ValidationError(path.string() + ": duplicate lecture id '" + l.id + "'");

  fs::path tdir = transcripts_dir ? *transcripts_dir : path.parent_path() / "transcripts";
  if (fs::is_directory(tdir)) {
    for (std::size_t i = 0; i < lectures.size(); ++i) {
      if (has_transcript[i]) continue;
      fs::path tp = tdir / (lectures[i].id + ".json");
      if (fs::exists(tp))
        lectures[i].transcript = load_transcript(tp, lectures[i].duration_s, lectures[i].id);
    }
  }
  return lectures;
}

EventLoad load_events(const fs::path& path) {
  EventLoad result;
  auto in = open_in(path);
  const std::string src = path.string();
  csv::Reader reader(in, src);
  if (!reader.read_header()) {
    result.warnings.push_back(src + ": empty events file");
    return result;
  }
  const int c_user = reader.require("user_id"), c_lec = reader.require("lecture_id"),
            c_ts = reader.require("timestamp"), c_watch = reader.require("watch_time_s");
  csv::Row row;
  while (reader.next(row)) {
    if (row.fields.size() != reader.header().size())
      throw ParseError(src, row.line,
                       "expected " + std::to_string(reader.header().size()) + " fields, got " +
                           std::to_string(row.fields.size()));
    ViewEvent e;
    e.user_id = row.fields[c_user];
    e.lecture_id = row.fields[c_lec];
    try {
      e.timestamp = parse_timestamp(row.fields[c_ts]);
    } catch (const ValidationError& err) {
      throw ParseError(src, row.line, err.what());
    }
    e.watch_time_s = csv::parse_double(row.fields[c_watch], src, row.line, "watch_time_s");
    if (!(e.watch_time_s >= 0.0) || !std::isfinite(e.watch_time_s)) {
      result.rejected.push_back({row.line, "watch_time_s must be a finite value >= 0, got " +
                                               row.fields[c_watch]});
      continue;
    }
    if (e.user_id.empty() || e.lecture_id.empty()) {
      result.rejected.push_back({row.line, "empty user_id or lecture_id"});
      continue;
    }
    result.events.push_back(std::move(e));
  }
  if (result.events.empty() && result.rejected.empty())
    result.warnings.push_back(src + ": no events");
  return result;
}

FilterResult filter_min_viewers(const std::vector<Lecture>& lectures,
                                const std::vector<ViewEvent>& events, int k) {
  if (k < 1) throw ValidationError("min viewers must be >= 1");
  std::unordered_map<std::string, std::unordered_set<std::string>> viewers;
  for (const auto& e : events) viewers[e.lecture_id].insert(e.user_id);

  FilterResult r;
  std::unordered_set<std::string> kept;
  for (const auto& l : lectures) {
    auto it = viewers.find(l.id);
    if (it != viewers.end() && it->second.size() >= static_cast<std::size_t>(k)) {
      r.lectures.push_back(l);
      kept.insert(l.id);
    } else {
      ++r.dropped_lectures;
    }
  }
  for (const auto& e : events) {
    if (kept.count(e.lecture_id))
      r.events.push_back(e);
    else
      ++r.dropped_events;
  }
  return r;
}

Corpus load_corpus(const fs::path& dir, const SubjectMap& subjects) {
  Corpus c;
  if (fs::exists(dir / "lectures.csv"))
    c.lectures = load_lectures(dir / "lectures.csv", LectureFormat::csv, subjects, dir / "transcripts");
  else if (fs::exists(dir / "lectures.json"))
    c.lectures = load_lectures(dir / "lectures.json", LectureFormat::json, subjects, dir / "transcripts");
  else
    throw Error("no lectures.csv or lectures.json in '" + dir.string() + "'");
  auto ev = load_events(dir / "events.csv");
  c.events = std::move(ev.events);
  c.rejected_events = std::move(ev.rejected);
  c.warnings = std::move(ev.warnings);
  return c;
}

void write_lectures_csv(const fs::path& path, const std::vector<Lecture>& lectures) {
  auto out = open_out(path);
  csv::write_row(out, {"id", "title", "subject", "lecture_type", "published_date", "duration_s",
                       "num_parts", "mean_star_rating", "view_count"});
  for (const auto& l : lectures) {
    csv::write_row(out, {l.id, l.title, l.subject, std::string(to_string(l.lecture_type)),
                         format_date(l.published_date), csv::format_double(l.duration_s),
                         std::to_string(l.num_parts),
                         l.mean_star_rating ? csv::format_double(*l.mean_star_rating) : "",
                         l.view_count ? std::to_string(*l.view_count) : ""});
  }
}

void write_lectures_json(const fs::path& path, const std::vector<Lecture>& lectures,
                         bool embed_transcripts) {
  json arr = json::array();
  for (const auto& l : lectures) {
    json o = {{"id", l.id},
              {"title", l.title},
              {"subject", l.subject},
              {"lecture_type", std::string(to_string(l.lecture_type))},
              {"published_date", format_date(l.published_date)},
              {"duration_s", l.duration_s},
              {"num_parts", l.num_parts},
              {"mean_star_rating", l.mean_star_rating ? json(*l.mean_star_rating) : json(nullptr)},
              {"view_count", l.view_count ? json(*l.view_count) : json(nullptr)}};
    if (embed_transcripts) o["transcript"] = transcript_to_json(l.transcript);
    arr.push_back(std::move(o));
  }
  auto out = open_out(path);
  out << arr.dump(1) << '\n';
}

void write_transcript(const fs::path& path, const Transcript& t) {
  auto out = open_out(path);
  out << transcript_to_json(t).dump() << '\n';
}

void write_events_csv(const fs::path& path, const std::vector<ViewEvent>& events) {
  auto out = open_out(path);
  csv::write_row(out, {"user_id", "lecture_id", "timestamp", "watch_time_s"});
  for (const auto& e : events)
    csv::write_row(out, {e.user_id, e.lecture_id, format_timestamp(e.timestamp),
                         csv::format_double(e.watch_time_s)});
}

void write_corpus(const fs::path& dir, const std::vector<Lecture>& lectures,
                  const std::vector<ViewEvent>& events) {
  fs::create_directories(dir / "transcripts");
  write_lectures_csv(dir / "lectures.csv", lectures);
  for (const auto& l : lectures) write_transcript(dir / "transcripts" / (l.id + ".json"), l.transcript);
  write_events_csv(dir / "events.csv", events);
}

}  // namespace engage
