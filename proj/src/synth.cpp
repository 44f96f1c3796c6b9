#include "engage/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "engage/error.hpp"
#include "engage/parallel.hpp"
#include "engage/random.hpp"

namespace engage {

namespace {

constexpr double kLowTarget = 0.05, kHighTarget = 0.95;

double beta(std::mt19937_64& rng, double a, double b) {
  std::gamma_distribution<double> ga(a, 1.0), gb(b, 1.0);
  double x = ga(rng), y = gb(rng);
  return x / (x + y);
}

double uniform(std::mt19937_64& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

int uniform_int(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

/// Pronounceable pseudo-words so no pool word collides with a lexicon entry by accident.
std::vector<std::string> content_pool(const Lexicons& lex, std::size_t size) {
  static const char* onsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "tr", "st"};
  static const char* nuclei[] = {"a", "e", "i", "o", "u", "ai", "ou"};
  auto rng = seeded_rng({0x706f6f6cULL});
  std::vector<std::string> pool;
  std::set<std::string> seen;
  while (pool.size() < size) {
    int syl = uniform_int(rng, 1, 4);
    std::string w;
    for (int s = 0; s < syl; ++s) {
      w += onsets[uniform_int(rng, 0, 16)];
      w += nuclei[uniform_int(rng, 0, 6)];
    }
    if (uniform_int(rng, 0, 2) == 0) w += "n";
    bool clash = lex.stopwords.count(w) || lex.prepositions.count(w) || lex.auxiliaries.count(w) ||
                 lex.tobe_forms.count(w) || lex.conjunctions.count(w) || lex.pronouns.count(w);
    for (const auto& suf : lex.normalization_suffixes)
      if (w.size() >= suf.size() && w.compare(w.size() - suf.size(), suf.size(), suf) == 0) clash = true;
    if (clash || !seen.insert(w).second) continue;
    pool.push_back(w);
  }
  return pool;
}

std::vector<std::string> as_vector(const std::set<std::string>& s) { return {s.begin(), s.end()}; }

struct Pools {
  std::vector<std::string> content, stop, function_words;
  std::vector<std::string> suffixes;
};

/// Lecture text: sentences of 5-18 words mixing content words, stop-words and nominalisations
/// at per-lecture rates.
Lecture make_lecture(int index, const GeneratorSpec& spec, const Pools& pools,
                     const std::vector<std::pair<std::string, KnowledgeArea>>& subjects) {
  auto rng = seeded_rng({spec.seed, static_cast<std::uint64_t>(index), 0x6c6563ULL});
  Lecture l;
  char id[32];
  std::snprintf(id, sizeof id, "L%05d", index);
  l.id = id;

  // Alternate areas so both are always populated.
  const KnowledgeArea want = index % 2 == 0 ? KnowledgeArea::stem : KnowledgeArea::miscellaneous;
  std::vector<std::size_t> cands;
  for (std::size_t s = 0; s < subjects.size(); ++s)
    if (subjects[s].second == want) cands.push_back(s);
  if (cands.empty())
    for (std::size_t s = 0; s < subjects.size(); ++s) cands.push_back(s);
  const auto& subj = subjects[cands[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(cands.size()) - 1))]];
  l.subject = subj.first;
  l.knowledge_area = subj.second;
  l.lecture_type = static_cast<LectureType>(uniform_int(rng, 0, static_cast<int>(kLectureTypeCount) - 1));
  l.num_parts = uniform_int(rng, 0, 3) == 0 ? uniform_int(rng, 2, 4) : 1;
  l.published_date = std::chrono::sys_days{std::chrono::year{2005} / 1 / 1} + std::chrono::days{uniform_int(rng, 0, 4380)};

  const int words = uniform_int(rng, spec.min_words, spec.max_words);
  const double p_stop = uniform(rng, 0.25, 0.55);
  const double p_func = uniform(rng, 0.02, 0.12);
  const double p_norm = uniform(rng, 0.0, 0.08);
  const int vocab = uniform_int(rng, 40, static_cast<int>(pools.content.size()));
  const double wpm = uniform(rng, 100.0, 170.0);
  const double silence_scale = uniform(rng, 0.0, 4.0);

  auto pick = [&](const std::vector<std::string>& v, int limit) {
    return v[static_cast<std::size_t>(uniform_int(rng, 0, std::min(limit, static_cast<int>(v.size())) - 1))];
  };
  auto word = [&]() -> std::string {
    double u = uniform(rng, 0.0, 1.0);
    if (u < p_stop) return pick(pools.stop, static_cast<int>(pools.stop.size()));
    if (u < p_stop + p_func) return pick(pools.function_words, static_cast<int>(pools.function_words.size()));
    if (u < p_stop + p_func + p_norm) return pick(pools.content, vocab) + pick(pools.suffixes, 100);
    return pick(pools.content, vocab);
  };

  const int title_words = uniform_int(rng, 2, 9);
  for (int i = 0; i < title_words; ++i) {
    if (i) l.title += ' ';
    std::string w = pick(pools.content, static_cast<int>(pools.content.size()));
    if (i == 0) w[0] = static_cast<char>(w[0] - 'a' + 'A');
    l.title += w;
  }

  double cursor = uniform(rng, 0.0, 2.0) * silence_scale;
  if (cursor > 0) l.transcript.segments.push_back({0.0, cursor, SegmentKind::silence, {}});
  int written = 0;
  while (written < words) {
    const int sentences = uniform_int(rng, 1, 4);
    std::string text;
    int seg_words = 0;
    for (int s = 0; s < sentences && written < words; ++s) {
      const int len = std::min(uniform_int(rng, 5, 18), words - written);
      for (int k = 0; k < len; ++k) {
        if (!text.empty()) text += ' ';
        text += word();
      }
      text += '.';
      written += len;
      seg_words += len;
    }
    const double speak = seg_words * 60.0 / wpm;
    l.transcript.segments.push_back({cursor, cursor + speak, SegmentKind::speech, std::move(text)});
    cursor += speak;
    if (written < words && uniform_int(rng, 0, 2) == 0) {
      const double gap = uniform(rng, 0.2, 1.0) * silence_scale + 0.05;
      l.transcript.segments.push_back({cursor, cursor + gap, SegmentKind::silence, {}});
      cursor += gap;
    }
  }
  l.duration_s = cursor;
  if (uniform_int(rng, 0, 1)) l.mean_star_rating = std::round(uniform(rng, 1.0, 5.0) * 100.0) / 100.0;
  l.view_count = static_cast<std::int64_t>(std::exp(uniform(rng, 3.0, 10.0)));
  return l;
}

double zscore_of(const std::vector<double>& v, std::size_t i, double mean, double sd) {
  return sd > 0 ? (v[i] - mean) / sd : 0.0;
}

}  // namespace

LatentForm parse_latent_form(std::string_view name) {
  if (name == "linear") return LatentForm::linear;
  if (name == "step") return LatentForm::step;
  if (name == "nonlinear") return LatentForm::nonlinear;
  throw ValidationError("unknown latent form '" + std::string(name) + "'");
}

std::string_view to_string(LatentForm f) {
  switch (f) {
    case LatentForm::linear: return "linear";
    case LatentForm::step: return "step";
    case LatentForm::nonlinear: return "nonlinear";
  }
  return "?";
}

void GeneratorSpec::validate() const {
  if (n_lectures < 1) throw ValidationError("n_lectures must be >= 1");
  if (n_users < 1) throw ValidationError("n_users must be >= 1");
  if (!(noise_sd >= 0.0)) throw ValidationError("noise_sd must be >= 0");
  if (min_words < 1 || max_words < min_words) throw ValidationError("need 1 <= min_words <= max_words");
  if (max_viewers < 1) throw ValidationError("max_viewers must be >= 1");
}

SyntheticCorpus generate(const GeneratorSpec& spec, const Lexicons& lex, const SubjectMap& subject_map) {
  spec.validate();
  lex.validate();
  if (subject_map.table().empty()) throw ValidationError("synth needs at least one subject");
  std::vector<std::pair<std::string, KnowledgeArea>> subjects(subject_map.table().begin(), subject_map.table().end());

  Pools pools;
  pools.content = content_pool(lex, 600);
  pools.stop = as_vector(lex.stopwords);
  for (const auto* s : {&lex.prepositions, &lex.auxiliaries, &lex.tobe_forms, &lex.conjunctions, &lex.pronouns})
    for (const auto& w : *s) pools.function_words.push_back(w);
  pools.suffixes = lex.normalization_suffixes;

  SyntheticCorpus out;
  const auto n = static_cast<std::size_t>(spec.n_lectures);
  out.lectures.resize(n);
  parallel_for(spec.n_lectures, [&](std::ptrdiff_t i) {
    out.lectures[static_cast<std::size_t>(i)] = make_lecture(static_cast<int>(i), spec, pools, subjects);
  });

  // Latent engagement is defined on the extracted features, so models see the true signal.
  const auto fv = extract_corpus(out.lectures, lex, FeatureMode::content_only);
  auto column = [&](auto get) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<double>(get(fv[i]));
    return v;
  };
  auto moments = [](const std::vector<double>& v) {
    double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()), ss = 0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::pair{m, std::sqrt(ss / static_cast<double>(v.size()))};
  };
  const auto wc = column([](const FeatureVector& f) { return f.word_count; });
  const auto pd = column([](const FeatureVector& f) { return f.published_days; });
  const auto fk = column([](const FeatureVector& f) { return f.fk_easiness; });
  const auto sp = column([](const FeatureVector& f) { return f.stopword_presence_rate; });
  const auto [wc_m, wc_s] = moments(wc);
  const auto [pd_m, pd_s] = moments(pd);
  const auto [fk_m, fk_s] = moments(fk);
  const auto [sp_m, sp_s] = moments(sp);
  std::vector<double> sorted_wc = wc;
  std::sort(sorted_wc.begin(), sorted_wc.end());
  const double wc_median = sorted_wc[n / 2];

  std::vector<double> score(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double zw = zscore_of(wc, i, wc_m, wc_s), zp = zscore_of(pd, i, pd_m, pd_s);
    switch (spec.form) {
      case LatentForm::linear:
        score[i] = 1.0 * zw + 0.6 * zp + 0.4 * zscore_of(fk, i, fk_m, fk_s) - 0.3 * zscore_of(sp, i, sp_m, sp_s);
        break;
      case LatentForm::step: score[i] = (wc[i] >= wc_median ? 1.0 : 0.0) + 0.1 * zp; break;
      case LatentForm::nonlinear: score[i] = zw * zp; break;
    }
  }
  // Affine map of the score onto [ln 0.05, ln 0.95] keeps the log target linear in the score.
  const auto [lo, hi] = std::minmax_element(score.begin(), score.end());
  const double span = *hi - *lo;
  out.latent.resize(n);
  out.target.resize(n);
  auto noise_rng = seeded_rng({spec.seed, 0x6e6f697365ULL});
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = span > 0 ? (score[i] - *lo) / span : 0.5;
    out.latent[i] = std::exp(std::log(kLowTarget) + u * (std::log(kHighTarget) - std::log(kLowTarget)));
    const double eps = noise(noise_rng);
    out.target[i] = spec.noise_sd > 0 ? std::clamp(out.latent[i] + spec.noise_sd * eps, 0.01, 1.0) : out.latent[i];
  }

  // Viewers: half below the target, half above, and the middle one(s) exactly at it.
  std::vector<std::string> users(static_cast<std::size_t>(spec.n_users));
  for (int u = 0; u < spec.n_users; ++u) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "U%05d", u);
    users[static_cast<std::size_t>(u)] = buf;
  }
  const int min_v = std::min(5, spec.n_users);
  const int max_v = std::max(min_v, std::min(spec.max_viewers, spec.n_users));
  std::vector<std::vector<ViewEvent>> per_lecture(n);
  parallel_for(spec.n_lectures, [&](std::ptrdiff_t li) {
    const auto i = static_cast<std::size_t>(li);
    auto rng = seeded_rng({spec.seed, static_cast<std::uint64_t>(i), 0x76696577ULL});
    const Lecture& l = out.lectures[i];
    const double t = out.target[i];
    const int v = uniform_int(rng, min_v, max_v);
    std::vector<int> idx(users.size());
    std::iota(idx.begin(), idx.end(), 0);
    for (int k = 0; k < v; ++k) std::swap(idx[static_cast<std::size_t>(k)], idx[static_cast<std::size_t>(uniform_int(rng, k, static_cast<int>(idx.size()) - 1))]);

    const int mid_lo = (v - 1) / 2, mid_hi = v / 2;
    const auto published = std::chrono::sys_days{l.published_date};
    for (int k = 0; k < v; ++k) {
      double frac;
      if (k < mid_lo) frac = t * beta(rng, 2.0, 2.0);
      else if (k > mid_hi) frac = t + (1.0 - t) * beta(rng, 2.0, 2.0);
      else frac = t;
      ViewEvent e;
      e.user_id = users[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])];
      e.lecture_id = l.id;
      e.timestamp = std::chrono::time_point_cast<std::chrono::seconds>(published) +
                    std::chrono::seconds{static_cast<long long>(uniform_int(rng, 0, 3 * 365)) * 86400 + uniform_int(rng, 0, 86399)};
      e.watch_time_s = frac * l.duration_s;
      per_lecture[i].push_back(std::move(e));
    }
  });
  for (auto& evs : per_lecture)
    for (auto& e : evs) out.events.push_back(std::move(e));
  return out;
}

}  // namespace engage
