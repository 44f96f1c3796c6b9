#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "engage/corpus.hpp"
#include "engage/features.hpp"
#include "engage/labels.hpp"
#include "engage/matrix.hpp"
#include "engage/metrics.hpp"

namespace engage {

struct DatasetOptions {
  FeatureMode mode = FeatureMode::content_only;
  Encoding encoding = Encoding::raw_lmnet;
  LabelOptions labels;
  int min_viewers = 5;
};

/// Row-aligned modelling table: one entry per labelled lecture, in corpus order.
struct Dataset {
  std::vector<std::string> ids;
  FeatureMatrix X;
  Eigen::VectorXd y;
  std::vector<double> mnet;  // raw MNET, always present
  std::vector<std::string> subjects;
  std::vector<KnowledgeArea> areas;
  std::vector<double> word_counts;
  Encoding encoding = Encoding::raw_lmnet;
  std::vector<std::pair<std::string, std::string>> excluded;

  std::size_t size() const { return ids.size(); }
  PairAttributes attributes() const;
  Dataset subset(const std::vector<int>& idx) const;
};

/// Lectures kept by the viewer filter, their events, and the per-lecture features.
struct PreparedCorpus {
  std::vector<Lecture> lectures;
  std::vector<ViewEvent> events;
  std::vector<FeatureVector> features;
  std::size_t dropped_lectures = 0;
};

PreparedCorpus prepare(const Corpus& corpus, const Lexicons& lex, FeatureMode mode, int min_viewers);

Dataset assemble(const PreparedCorpus& prepared, const DatasetOptions& options);

Dataset build_dataset(const Corpus& corpus, const Lexicons& lex, const DatasetOptions& options);

}  // namespace engage
