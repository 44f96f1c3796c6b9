#include "engage/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include "engage/csv.hpp"
#include "engage/error.hpp"
#include "engage/parallel.hpp"
#include "engage/text.hpp"

namespace engage {

namespace fs = std::filesystem;

std::set<std::string> load_word_list(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open lexicon '" + path.string() + "'");
  std::set<std::string> words;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
      line.pop_back();
    std::size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos) continue;
    line.erase(0, start);
    for (char c : line)
      if (c >= 'A' && c <= 'Z') throw ParseError(path.string(), n, "lexicon entries must be lowercase");
    words.insert(line);
  }
  return words;
}

Lexicons Lexicons::load(const fs::path& dir) {
  Lexicons lex;
  lex.stopwords = load_word_list(dir / "stopwords.txt");
  lex.prepositions = load_word_list(dir / "prepositions.txt");
  lex.auxiliaries = load_word_list(dir / "auxiliaries.txt");
  lex.tobe_forms = load_word_list(dir / "tobe.txt");
  lex.conjunctions = load_word_list(dir / "conjunctions.txt");
  lex.pronouns = load_word_list(dir / "pronouns.txt");
  auto suffixes = load_word_list(dir / "normalization_suffixes.txt");
  lex.normalization_suffixes.assign(suffixes.begin(), suffixes.end());
  lex.validate();
  return lex;
}

Lexicons Lexicons::builtin() { return load(default_data_dir() / "lexicons"); }

void Lexicons::validate() const {
  auto check = [](const auto& set, const char* name) {
    if (set.empty()) throw ValidationError(std::string("lexicon '") + name + "' is empty");
    for (const auto& w : set)
      for (char c : w)
        if (c >= 'A' && c <= 'Z')
          throw ValidationError(std::string("lexicon '") + name + "' has non-lowercase entry '" + w + "'");
  };
  check(stopwords, "stopwords");
  check(prepositions, "prepositions");
  check(auxiliaries, "auxiliaries");
  check(tobe_forms, "tobe");
  check(conjunctions, "conjunctions");
  check(pronouns, "pronouns");
  check(normalization_suffixes, "normalization_suffixes");
}

const std::vector<std::string>& content_feature_names() {
  static const std::vector<std::string> names = {
      "fk_easiness",      "stopword_presence_rate", "stopword_coverage_rate", "document_entropy",
      "word_count",       "title_word_count",       "preposition_rate",       "auxiliary_rate",
      "tobe_rate",        "conjunction_rate",       "normalization_rate",     "pronoun_rate",
      "published_days"};
  return names;
}

const std::vector<std::string>& video_feature_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v = {"duration_s", "is_chunked"};
    for (std::size_t i = 0; i < kLectureTypeCount; ++i) {
      std::string t(to_string(static_cast<LectureType>(i)));
      for (auto& c : t)
        if (c == ' ') c = '_';
      v.push_back("type_" + t);
    }
    v.push_back("speaker_speed_wpm");
    v.push_back("silence_period_rate");
    return v;
  }();
  return names;
}

std::vector<std::string> feature_names(FeatureMode mode) {
  auto names = content_feature_names();
  if (mode == FeatureMode::content_plus_video)
    names.insert(names.end(), video_feature_names().begin(), video_feature_names().end());
  return names;
}

double fk_easiness(std::string_view text) {
  auto tokens = text::tokenize(text);
  std::size_t sentences = text::count_sentences(text);
  if (tokens.empty() || sentences == 0)
    throw UndefinedError("FK easiness undefined: text has no words");
  double syllables = 0.0;
  for (const auto& t : tokens) syllables += text::count_syllables(t);
  const double words = static_cast<double>(tokens.size());
  return 206.835 - 1.015 * (words / static_cast<double>(sentences)) - 84.6 * (syllables / words);
}

StopwordRates stopword_rates(std::span<const std::string> tokens, const std::set<std::string>& stopwords) {
  if (tokens.empty()) throw UndefinedError("stop-word rates undefined for empty token list");
  if (stopwords.empty()) throw ValidationError("empty stop-word list");
  std::size_t hits = 0;
  std::set<std::string_view> seen;
  for (const auto& t : tokens) {
    auto it = stopwords.find(t);
    if (it != stopwords.end()) {
      ++hits;
      seen.insert(*it);
    }
  }
  return {static_cast<double>(hits) / static_cast<double>(tokens.size()),
          static_cast<double>(seen.size()) / static_cast<double>(stopwords.size())};
}

double document_entropy(std::span<const std::string> tokens) {
  if (tokens.empty()) throw UndefinedError("document entropy undefined for empty token list");
  std::unordered_map<std::string_view, std::size_t> counts;
  for (const auto& t : tokens) ++counts[t];
  // Sum in a fixed (sorted) order so the result is bit-reproducible.
  std::vector<std::size_t> c;
  c.reserve(counts.size());
  for (const auto& [w, n] : counts) c.push_back(n);
  std::sort(c.begin(), c.end());
  const double total = static_cast<double>(tokens.size());
  double h = 0.0;
  for (std::size_t n : c) {
    double p = static_cast<double>(n) / total;
    h -= p * std::log2(p);
  }
  return h < 0.0 ? 0.0 : h;
}

LexicalRates lexical_rates(std::span<const std::string> tokens, const Lexicons& lex) {
  if (tokens.empty()) throw UndefinedError("lexical rates undefined for empty token list");
  std::size_t prep = 0, aux = 0, tobe = 0, conj = 0, pron = 0, norm = 0;
  for (const auto& t : tokens) {
    prep += lex.prepositions.count(t);
    aux += lex.auxiliaries.count(t);
    tobe += lex.tobe_forms.count(t);
    conj += lex.conjunctions.count(t);
    pron += lex.pronouns.count(t);
    for (const auto& s : lex.normalization_suffixes) {
      if (t.size() >= s.size() + 3 && t.compare(t.size() - s.size(), s.size(), s) == 0) {
        ++norm;
        break;
      }
    }
  }
  const double n = static_cast<double>(tokens.size());
  return {prep / n, aux / n, tobe / n, conj / n, pron / n, norm / n};
}

long long published_days(const Date& date) {
  long long d = days_since_epoch(date);
  if (d < 0) throw ValidationError("published date " + format_date(date) + " is before 1970-01-01");
  return d;
}

double silence_period_rate(const Lecture& lecture) {
  if (!(lecture.duration_s > 0.0)) throw ValidationError("lecture '" + lecture.id + "': duration_s must be > 0");
  double silence = 0.0;
  for (const auto& s : lecture.transcript.segments)
    if (s.kind == SegmentKind::silence) silence += s.duration();
  return std::clamp(silence / lecture.duration_s, 0.0, 1.0);
}

VideoFeatures video_features(const Lecture& lecture, long long word_count) {
  if (!(lecture.duration_s > 0.0)) throw ValidationError("lecture '" + lecture.id + "': duration_s must be > 0");
  VideoFeatures v;
  v.duration_s = lecture.duration_s;
  v.is_chunked = lecture.num_parts > 1 ? 1 : 0;
  v.lecture_type_onehot[static_cast<std::size_t>(lecture.lecture_type)] = 1;
  v.speaker_speed_wpm = static_cast<double>(word_count) / (lecture.duration_s / 60.0);
  v.silence_period_rate = silence_period_rate(lecture);
  return v;
}

FeatureVector extract_all(const Lecture& lecture, const Lexicons& lex, FeatureMode mode) {
  const std::string body = lecture.transcript.speech_text();
  const auto tokens = text::tokenize(body);
  if (tokens.empty())
    throw UndefinedError("lecture '" + lecture.id + "': transcript has no speech words");

  FeatureVector fv;
  fv.fk_easiness = fk_easiness(body);
  auto sw = stopword_rates(tokens, lex.stopwords);
  fv.stopword_presence_rate = sw.presence;
  fv.stopword_coverage_rate = sw.coverage;
  fv.document_entropy = document_entropy(tokens);
  fv.word_count = static_cast<long long>(tokens.size());
  fv.title_word_count = static_cast<long long>(text::tokenize(lecture.title).size());
  auto lr = lexical_rates(tokens, lex);
  fv.preposition_rate = lr.preposition;
  fv.auxiliary_rate = lr.auxiliary;
  fv.tobe_rate = lr.tobe;
  fv.conjunction_rate = lr.conjunction;
  fv.normalization_rate = lr.normalization;
  fv.pronoun_rate = lr.pronoun;
  fv.published_days = published_days(lecture.published_date);
  if (mode == FeatureMode::content_plus_video) fv.video = video_features(lecture, fv.word_count);
  return fv;
}

std::vector<FeatureVector> extract_corpus(std::span<const Lecture> lectures, const Lexicons& lex,
                                          FeatureMode mode) {
  std::vector<FeatureVector> out(lectures.size());
  parallel_for(static_cast<std::ptrdiff_t>(lectures.size()),
               [&](std::ptrdiff_t i) { out[i] = extract_all(lectures[i], lex, mode); });
  return out;
}

std::vector<double> to_row(const FeatureVector& fv, FeatureMode mode) {
  std::vector<double> r = {fv.fk_easiness,
                           fv.stopword_presence_rate,
                           fv.stopword_coverage_rate,
                           fv.document_entropy,
                           static_cast<double>(fv.word_count),
                           static_cast<double>(fv.title_word_count),
                           fv.preposition_rate,
                           fv.auxiliary_rate,
                           fv.tobe_rate,
                           fv.conjunction_rate,
                           fv.normalization_rate,
                           fv.pronoun_rate,
                           static_cast<double>(fv.published_days)};
  if (mode == FeatureMode::content_plus_video) {
    if (!fv.video) throw ValidationError("feature vector lacks video features");
    const auto& v = *fv.video;
    r.push_back(v.duration_s);
    r.push_back(v.is_chunked);
    for (int x : v.lecture_type_onehot) r.push_back(x);
    r.push_back(v.speaker_speed_wpm);
    r.push_back(v.silence_period_rate);
  }
  return r;
}

FeatureMatrix design_matrix(std::span<const FeatureVector> features, FeatureMode mode) {
  FeatureMatrix m;
  m.columns = feature_names(mode);
  m.values.resize(static_cast<Eigen::Index>(features.size()), static_cast<Eigen::Index>(m.columns.size()));
  for (std::size_t i = 0; i < features.size(); ++i) {
    auto row = to_row(features[i], mode);
    for (std::size_t j = 0; j < row.size(); ++j)
      m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
  }
  return m;
}

void write_features_csv(const fs::path& path, std::span<const std::string> ids,
                        std::span<const FeatureVector> features) {
  if (ids.size() != features.size()) throw ValidationError("ids and features differ in length");
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  std::vector<std::string> header = {"lecture_id"};
  auto names = feature_names(FeatureMode::content_plus_video);
  header.insert(header.end(), names.begin(), names.end());
  csv::write_row(out, header);
  for (std::size_t i = 0; i < features.size(); ++i) {
    std::vector<std::string> row = {ids[i]};
    for (double v : to_row(features[i], FeatureMode::content_only)) row.push_back(csv::format_double(v));
    if (features[i].video) {
      auto full = to_row(features[i], FeatureMode::content_plus_video);
      for (std::size_t j = kContentFeatureCount; j < full.size(); ++j) row.push_back(csv::format_double(full[j]));
    } else {
      row.resize(header.size());
    }
    csv::write_row(out, row);
  }
}

FeatureTable read_features_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  const std::string src = path.string();
  csv::Reader reader(in, src);
  FeatureTable t;
  if (!reader.read_header()) return t;
  std::vector<std::string> expect = {"lecture_id"};
  auto names = feature_names(FeatureMode::content_plus_video);
  expect.insert(expect.end(), names.begin(), names.end());
  if (reader.header() != expect) throw ParseError(src, 1, "unexpected features.csv header");
  csv::Row row;
  while (reader.next(row)) {
    if (row.fields.size() != expect.size()) throw ParseError(src, row.line, "wrong number of fields");
    auto num = [&](std::size_t j) { return csv::parse_double(row.fields[j], src, row.line, expect[j]); };
    auto integer = [&](std::size_t j) { return csv::parse_int(row.fields[j], src, row.line, expect[j]); };
    FeatureVector fv;
    fv.fk_easiness = num(1);
    fv.stopword_presence_rate = num(2);
    fv.stopword_coverage_rate = num(3);
    fv.document_entropy = num(4);
    fv.word_count = integer(5);
    fv.title_word_count = integer(6);
    fv.preposition_rate = num(7);
    fv.auxiliary_rate = num(8);
    fv.tobe_rate = num(9);
    fv.conjunction_rate = num(10);
    fv.normalization_rate = num(11);
    fv.pronoun_rate = num(12);
    fv.published_days = integer(13);
    if (!row.fields[14].empty()) {
      VideoFeatures v;
      v.duration_s = num(14);
      v.is_chunked = static_cast<int>(integer(15));
      for (std::size_t k = 0; k < kLectureTypeCount; ++k) v.lecture_type_onehot[k] = static_cast<int>(integer(16 + k));
      v.speaker_speed_wpm = num(16 + kLectureTypeCount);
      v.silence_period_rate = num(17 + kLectureTypeCount);
      fv.video = v;
    }
    t.ids.push_back(row.fields[0]);
    t.features.push_back(fv);
  }
  return t;
}

}  // namespace engage
