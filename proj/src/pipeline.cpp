#include "engage/pipeline.hpp"

#include <map>

#include "engage/error.hpp"

namespace engage {

PairAttributes Dataset::attributes() const { return {subjects, mnet, word_counts}; }

Dataset Dataset::subset(const std::vector<int>& idx) const {
  Dataset d;
  d.ids = take(ids, idx);
  d.X = {take_rows(X.values, idx), X.columns};
  d.y = take(y, idx);
  d.mnet = take(mnet, idx);
  d.subjects = take(subjects, idx);
  d.areas = take(areas, idx);
  d.word_counts = take(word_counts, idx);
  d.encoding = encoding;
  return d;
}

PreparedCorpus prepare(const Corpus& corpus, const Lexicons& lex, FeatureMode mode, int min_viewers) {
  PreparedCorpus p;
  auto kept = filter_min_viewers(corpus.lectures, corpus.events, min_viewers);
  p.lectures = std::move(kept.lectures);
  p.events = std::move(kept.events);
  p.dropped_lectures = kept.dropped_lectures;
  p.features = extract_corpus(p.lectures, lex, mode);
  return p;
}

Dataset assemble(const PreparedCorpus& p, const DatasetOptions& options) {
  if (p.lectures.size() != p.features.size()) throw ValidationError("lectures and features are not aligned");
  LabelTable table = build_label_table(p.lectures, p.events, options.encoding, options.labels);
  LabelTable raw = options.encoding == Encoding::raw_lmnet
                       ? table
                       : raw_labels(p.lectures, p.events, options.labels.epsilon);

  Dataset d;
  d.encoding = options.encoding;
  d.excluded = table.excluded;
  std::vector<FeatureVector> rows;
  std::vector<double> ys;
  for (std::size_t i = 0; i < p.lectures.size(); ++i) {
    const Lecture& l = p.lectures[i];
    const LabelEntry* e = table.find(l.id);
    const LabelEntry* r = raw.find(l.id);
    if (!e || !r || !r->mnet) continue;
    d.ids.push_back(l.id);
    ys.push_back(e->target);
    d.mnet.push_back(*r->mnet);
    d.subjects.push_back(l.subject);
    d.areas.push_back(l.knowledge_area);
    d.word_counts.push_back(static_cast<double>(p.features[i].word_count));
    rows.push_back(p.features[i]);
  }
  if (d.ids.empty()) throw ValidationError("no labelled lectures left to model");
  d.X = design_matrix(rows, options.mode);
  d.y = Eigen::Map<Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size()));
  return d;
}

Dataset build_dataset(const Corpus& corpus, const Lexicons& lex, const DatasetOptions& options) {
  return assemble(prepare(corpus, lex, options.mode, options.min_viewers), options);
}

}  // namespace engage
