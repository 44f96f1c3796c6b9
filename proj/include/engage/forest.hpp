#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace engage {

/// Flat CART node. Leaves have feature == -1.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  /// Goes left when x[feature] <= threshold.
  double predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  int depth() const;
  bool operator==(const RegressionTree&) const = default;
};

struct ForestParams {
  int trees = 500;
  int max_features = 1;
  int min_leaf = 1;
  bool bootstrap = true;
  std::optional<int> max_depth;
  std::uint64_t seed = 0;
};

/// Grows one variance-reduction tree on the rows listed in `sample` (repeats allowed).
RegressionTree grow_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::vector<int> sample,
                         const ForestParams& params, std::uint64_t tree_seed);

/// Trees are grown in parallel; tree t is seeded from (seed, t) so the forest does not depend
/// on the thread count.
std::vector<RegressionTree> grow_forest(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                        const ForestParams& params);

/// Mean of the per-tree predictions, accumulated in tree order.
double predict_forest(const std::vector<RegressionTree>& forest, const Eigen::Ref<const Eigen::RowVectorXd>& x);

}  // namespace engage
