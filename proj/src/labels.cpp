#include "engage/labels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include "engage/csv.hpp"
#include "engage/error.hpp"

namespace engage {

namespace fs = std::filesystem;

double user_lecture_engagement(std::span<const ViewEvent> events, double duration_s) {
  if (!(duration_s > 0.0)) throw ValidationError("duration_s must be > 0");
  double total = 0.0;
  for (const auto& e : events) total += e.watch_time_s;
  return std::min(1.0, total / duration_s);
}

std::vector<EngagementRecord> engagement_records(std::span<const Lecture> lectures,
                                                 std::span<const ViewEvent> events) {
  std::unordered_map<std::string, double> duration;
  for (const auto& l : lectures) duration[l.id] = l.duration_s;

  struct Acc {
    double watch = 0.0;
    Timestamp first = Timestamp::max();
    int count = 0;
  };
  std::map<std::pair<std::string, std::string>, Acc> acc;
  for (const auto& e : events) {
    if (!duration.count(e.lecture_id)) continue;
    auto& a = acc[{e.lecture_id, e.user_id}];
    a.watch += e.watch_time_s;
    a.first = std::min(a.first, e.timestamp);
    ++a.count;
  }
  std::vector<EngagementRecord> out;
  out.reserve(acc.size());
  for (const auto& [key, a] : acc) {
    double d = duration.at(key.first);
    if (!(d > 0.0)) throw ValidationError("lecture '" + key.first + "': duration_s must be > 0");
    out.push_back({key.second, key.first, std::min(1.0, a.watch / d), a.first, a.count});
  }
  return out;
}

double median(std::vector<double> v) {
  if (v.empty()) throw UndefinedError("median of an empty set");
  const std::size_t n = v.size();
  std::sort(v.begin(), v.end());
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mnet(std::span<const double> user_fractions) {
  if (user_fractions.empty()) throw UndefinedError("MNET needs at least one record");
  return std::clamp(median({user_fractions.begin(), user_fractions.end()}), 0.0, 1.0);
}

double mnet(std::span<const EngagementRecord> lecture_records) {
  std::vector<double> v;
  v.reserve(lecture_records.size());
  for (const auto& r : lecture_records) v.push_back(r.normalized_engagement);
  return mnet(v);
}

double lmnet(double mnet_value, double epsilon) {
  return std::log(std::clamp(mnet_value, epsilon, 1.0));
}

CleanResult clean_bot_users(std::span<const ViewEvent> events, std::span<const Lecture> lectures,
                            double threshold) {
  auto records = engagement_records(lectures, events);
  std::map<std::string, std::pair<double, int>> per_user;
  for (const auto& r : records) {
    auto& [sum, n] = per_user[r.user_id];
    sum += r.normalized_engagement;
    ++n;
  }
  std::map<std::string, bool> bot;
  CleanResult out;
  for (const auto& [user, s] : per_user) {
    bool is_bot = s.first / s.second < threshold;
    bot[user] = is_bot;
    if (is_bot) out.removed_users.push_back(user);
  }
  for (const auto& e : events) {
    auto it = bot.find(e.user_id);
    if (it == bot.end() || !it->second) out.events.push_back(e);
  }
  return out;
}

Encoding parse_encoding(std::string_view name) {
  if (name == "raw" || name == "raw_lmnet") return Encoding::raw_lmnet;
  if (name == "cleaned" || name == "cleaned_lmnet") return Encoding::cleaned_lmnet;
  if (name == "standardised" || name == "standardized" || name == "standardised_lmnet")
    return Encoding::standardised_lmnet;
  if (name == "comparative" || name == "comparative_mnet") return Encoding::comparative;
  throw ValidationError("unknown encoding '" + std::string(name) + "'");
}

std::string_view to_string(Encoding e) {
  switch (e) {
    case Encoding::raw_lmnet: return "raw_lmnet";
    case Encoding::cleaned_lmnet: return "cleaned_lmnet";
    case Encoding::standardised_lmnet: return "standardised_lmnet";
    case Encoding::comparative: return "comparative";
  }
  return "?";
}

const LabelEntry* LabelTable::find(std::string_view lecture_id) const {
  for (const auto& e : entries)
    if (e.lecture_id == lecture_id) return &e;
  return nullptr;
}

namespace {

std::map<std::string, std::vector<double>> fractions_by_lecture(std::span<const EngagementRecord> records) {
  std::map<std::string, std::vector<double>> by;
  for (const auto& r : records) by[r.lecture_id].push_back(r.normalized_engagement);
  return by;
}

}  // namespace

LabelTable raw_labels(std::span<const Lecture> lectures, std::span<const ViewEvent> events,
                      double epsilon, Encoding tag) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ValidationError("epsilon must lie in (0,1)");
  auto by = fractions_by_lecture(engagement_records(lectures, events));
  LabelTable t;
  t.encoding = tag;
  for (const auto& l : lectures) {
    auto it = by.find(l.id);
    if (it == by.end()) {
      t.excluded.emplace_back(l.id, "no engagement records");
      continue;
    }
    double m = mnet(it->second);
    t.entries.push_back({l.id, m, lmnet(m, epsilon)});
  }
  return t;
}

LabelTable standardised_labels(std::span<const ViewEvent> events, std::span<const Lecture> lectures,
                               double epsilon) {
  auto records = engagement_records(lectures, events);
  std::map<std::string, std::vector<const EngagementRecord*>> by_user;
  for (const auto& r : records) by_user[r.user_id].push_back(&r);

  std::map<std::string, std::vector<double>> z_by_lecture;
  for (const auto& [user, recs] : by_user) {
    if (recs.size() < 2) continue;
    std::vector<double> v;
    for (const auto* r : recs) v.push_back(lmnet(r->normalized_engagement, epsilon));
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    double sd = std::sqrt(var / static_cast<double>(v.size()));
    if (!(sd > 1e-12)) continue;
    for (std::size_t i = 0; i < v.size(); ++i) z_by_lecture[recs[i]->lecture_id].push_back((v[i] - mean) / sd);
  }

  LabelTable t;
  t.encoding = Encoding::standardised_lmnet;
  for (const auto& l : lectures) {
    auto it = z_by_lecture.find(l.id);
    if (it == z_by_lecture.end()) {
      t.excluded.emplace_back(l.id, "no contributing users after standardisation");
      continue;
    }
    t.entries.push_back({l.id, std::nullopt, median(it->second)});
  }
  return t;
}

std::vector<PairCount> user_comparisons(std::span<const EngagementRecord> records,
                                        const std::map<std::string, int>& lecture_index) {
  std::map<std::string, std::vector<std::pair<int, double>>> by_user;
  for (const auto& r : records) {
    auto it = lecture_index.find(r.lecture_id);
    if (it != lecture_index.end()) by_user[r.user_id].emplace_back(it->second, r.normalized_engagement);
  }
  std::map<std::pair<int, int>, double> wins;
  for (const auto& [user, recs] : by_user) {
    for (std::size_t i = 0; i < recs.size(); ++i) {
      for (std::size_t j = i + 1; j < recs.size(); ++j) {
        if (recs[i].second > recs[j].second)
          wins[{recs[i].first, recs[j].first}] += 1.0;
        else if (recs[j].second > recs[i].second)
          wins[{recs[j].first, recs[i].first}] += 1.0;
      }
    }
  }
  std::vector<PairCount> out;
  out.reserve(wins.size());
  for (const auto& [key, w] : wins) out.push_back({key.first, key.second, w});
  return out;
}

LabelTable comparative_scale(std::span<const ViewEvent> events, std::span<const Lecture> lectures,
                             const ThurstoneOptions& options) {
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < lectures.size(); ++i) index[lectures[i].id] = static_cast<int>(i);
  auto counts = user_comparisons(engagement_records(lectures, events), index);
  auto fit = fit_thurstone(static_cast<int>(lectures.size()), counts, options);

  LabelTable t;
  t.encoding = Encoding::comparative;
  for (std::size_t i = 0; i < lectures.size(); ++i) {
    if (fit.component[i] < 0) {
      t.excluded.emplace_back(lectures[i].id, "no pairwise comparisons");
      continue;
    }
    t.entries.push_back({lectures[i].id, std::nullopt, fit.scale[i]});
  }
  return t;
}

LabelTable build_label_table(std::span<const Lecture> lectures, std::span<const ViewEvent> events,
                             Encoding encoding, const LabelOptions& options) {
  switch (encoding) {
    case Encoding::raw_lmnet:
      return raw_labels(lectures, events, options.epsilon);
    case Encoding::cleaned_lmnet: {
      auto cleaned = clean_bot_users(events, lectures, options.bot_threshold);
      return raw_labels(lectures, cleaned.events, options.epsilon, Encoding::cleaned_lmnet);
    }
    case Encoding::standardised_lmnet:
      return standardised_labels(events, lectures, options.epsilon);
    case Encoding::comparative:
      return comparative_scale(events, lectures, options.thurstone);
  }
  throw ValidationError("unknown encoding");
}

void write_labels_csv(const fs::path& path, const LabelTable& table) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  csv::write_row(out, {"lecture_id", "encoding", "mnet", "target"});
  for (const auto& e : table.entries)
    csv::write_row(out, {e.lecture_id, std::string(to_string(table.encoding)),
                         e.mnet ? csv::format_double(*e.mnet) : "", csv::format_double(e.target)});
}

LabelTable read_labels_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  const std::string src = path.string();
  csv::Reader reader(in, src);
  LabelTable t;
  if (!reader.read_header()) return t;
  int c_id = reader.require("lecture_id"), c_enc = reader.require("encoding"),
      c_mnet = reader.require("mnet"), c_target = reader.require("target");
  csv::Row row;
  bool first = true;
  while (reader.next(row)) {
    if (row.fields.size() != reader.header().size()) throw ParseError(src, row.line, "wrong number of fields");
    Encoding enc;
    try {
      enc = parse_encoding(row.fields[c_enc]);
    } catch (const ValidationError& e) {
      throw ParseError(src, row.line, e.what());
    }
    if (first) t.encoding = enc;
    else if (enc != t.encoding) throw ParseError(src, row.line, "mixed encodings in one labels file");
    first = false;
    LabelEntry e;
    e.lecture_id = row.fields[c_id];
    if (!row.fields[c_mnet].empty()) e.mnet = csv::parse_double(row.fields[c_mnet], src, row.line, "mnet");
    e.target = csv::parse_double(row.fields[c_target], src, row.line, "target");
    t.entries.push_back(std::move(e));
  }
  return t;
}

}  // namespace engage
