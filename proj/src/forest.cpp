#include "engage/forest.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "engage/error.hpp"
#include "engage/parallel.hpp"
#include "engage/random.hpp"

namespace engage {

double RegressionTree::predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  int i = 0;
  while (!nodes[i].is_leaf()) i = x[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
  return nodes[i].value;
}

int RegressionTree::depth() const {
  std::vector<int> d(nodes.size(), 0);
  int best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    best = std::max(best, d[i]);
    if (!nodes[i].is_leaf()) d[nodes[i].left] = d[nodes[i].right] = d[i] + 1;
  }
  return best;
}

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double score = -1.0;  // S_L²/n_L + S_R²/n_R, larger is better
  std::size_t n_left = 0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const ForestParams& p, std::uint64_t seed)
      : X_(X), y_(y), p_(p), rng_(seeded_rng({seed})) {
    features_.resize(static_cast<std::size_t>(X.cols()));
    std::iota(features_.begin(), features_.end(), 0);
  }

  RegressionTree build(std::vector<int> sample) {
    RegressionTree t;
    tree_ = &t;
    node(sample, 0, sample.size(), 0);
    return t;
  }

 private:
  int node(std::vector<int>& idx, std::size_t lo, std::size_t hi, int depth) {
    const int id = static_cast<int>(tree_->nodes.size());
    tree_->nodes.emplace_back();
    const std::size_t n = hi - lo;
    double sum = 0.0;
    bool constant = true;
    for (std::size_t k = lo; k < hi; ++k) {
      sum += y_[idx[k]];
      if (y_[idx[k]] != y_[idx[lo]]) constant = false;
    }
    tree_->nodes[id].value = sum / static_cast<double>(n);

    const bool depth_ok = !p_.max_depth || depth < *p_.max_depth;
    if (constant || !depth_ok || n < 2 * static_cast<std::size_t>(p_.min_leaf)) return id;

    Split best = find_split(idx, lo, hi, sum);
    if (best.feature < 0) return id;

    auto mid = std::partition(idx.begin() + static_cast<std::ptrdiff_t>(lo), idx.begin() + static_cast<std::ptrdiff_t>(hi),
                              [&](int r) { return X_(r, best.feature) <= best.threshold; });
    const std::size_t split_at = static_cast<std::size_t>(mid - idx.begin());
    tree_->nodes[id].feature = best.feature;
    tree_->nodes[id].threshold = best.threshold;
    int left = node(idx, lo, split_at, depth + 1);
    int right = node(idx, split_at, hi, depth + 1);
    tree_->nodes[id].left = left;
    tree_->nodes[id].right = right;
    return id;
  }

  Split find_split(const std::vector<int>& idx, std::size_t lo, std::size_t hi, double total) {
    const std::size_t n = hi - lo;
    const std::size_t p = features_.size();
    const std::size_t m = std::min<std::size_t>(p, static_cast<std::size_t>(p_.max_features));
    // Partial Fisher-Yates: the first m entries become the candidate features.
    for (std::size_t k = 0; k < m; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, p - 1);
      std::swap(features_[k], features_[pick(rng_)]);
    }
    const double parent = total * total / static_cast<double>(n);
    Split best;
    best.score = parent;
    order_.resize(n);
    const std::size_t min_leaf = static_cast<std::size_t>(p_.min_leaf);
    for (std::size_t k = 0; k < m; ++k) {
      const int f = features_[k];
      for (std::size_t t = 0; t < n; ++t) order_[t] = {X_(idx[lo + t], f), y_[idx[lo + t]]};
      std::sort(order_.begin(), order_.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      double left_sum = 0.0;
      for (std::size_t t = 0; t + 1 < n; ++t) {
        left_sum += order_[t].second;
        const std::size_t nl = t + 1, nr = n - nl;
        if (order_[t].first == order_[t + 1].first) continue;
        if (nl < min_leaf || nr < min_leaf) continue;
        const double right_sum = total - left_sum;
        const double score = left_sum * left_sum / static_cast<double>(nl) + right_sum * right_sum / static_cast<double>(nr);
        if (score > best.score + 1e-12 * std::abs(best.score)) {
          best.score = score;
          best.feature = f;
          double a = order_[t].first, b = order_[t + 1].first;
          double mid = a + 0.5 * (b - a);
          best.threshold = mid < b ? mid : a;
          best.n_left = nl;
        }
      }
    }
    return best;
  }

  const Eigen::MatrixXd& X_;
  const Eigen::VectorXd& y_;
  const ForestParams& p_;
  std::mt19937_64 rng_;
  std::vector<int> features_;
  std::vector<std::pair<double, double>> order_;
  RegressionTree* tree_ = nullptr;
};

}  // namespace

RegressionTree grow_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::vector<int> sample,
                         const ForestParams& params, std::uint64_t tree_seed) {
  if (sample.empty()) throw ValidationError("cannot grow a tree on an empty sample");
  TreeBuilder b(X, y, params, tree_seed);
  return b.build(std::move(sample));
}

std::vector<RegressionTree> grow_forest(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                        const ForestParams& params) {
  if (params.trees < 1) throw ValidationError("forest needs trees >= 1");
  if (params.min_leaf < 1 || params.max_features < 1) throw ValidationError("forest needs min_leaf, max_features >= 1");
  if (X.rows() != y.size() || X.rows() == 0) throw ValidationError("forest: X and y disagree or are empty");
  const int n = static_cast<int>(X.rows());
  std::vector<RegressionTree> forest(static_cast<std::size_t>(params.trees));
  parallel_for(params.trees, [&](std::ptrdiff_t t) {
    std::uint64_t tree_seed = params.seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(t) + 1;
    std::vector<int> sample(static_cast<std::size_t>(n));
    if (params.bootstrap) {
      auto rng = seeded_rng({tree_seed, 7});
      std::uniform_int_distribution<int> pick(0, n - 1);
      for (auto& s : sample) s = pick(rng);
    } else {
      std::iota(sample.begin(), sample.end(), 0);
    }
    forest[static_cast<std::size_t>(t)] = grow_tree(X, y, std::move(sample), params, tree_seed);
  });
  return forest;
}

double predict_forest(const std::vector<RegressionTree>& forest, const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  double s = 0.0;
  for (const auto& t : forest) s += t.predict(x);
  return s / static_cast<double>(forest.size());
}

}  // namespace engage
