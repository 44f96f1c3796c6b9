#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "engage/cv.hpp"
#include "engage/error.hpp"

using namespace engage;

namespace {

struct Problem {
  FeatureMatrix X;
  Eigen::VectorXd y;
};

Problem linear_problem(int n, std::uint64_t seed, double noise = 0.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Problem p;
  p.X.values.resize(n, 3);
  p.X.columns = {"a", "b", "c"};
  p.y.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 3; ++j) p.X.values(i, j) = g(rng);
    p.y[i] = 2 * p.X.values(i, 0) - p.X.values(i, 1) + 0.5 * p.X.values(i, 2) + noise * g(rng);
  }
  return p;
}

ModelSpec rr(double lambda) {
  ModelSpec s;
  s.family = Family::RR;
  s.hp.lambda = lambda;
  return s;
}

}  // namespace

TEST(CrossValidate, PerfectLinearModel) {
  auto p = linear_problem(60, 1);
  CVOptions o;
  o.seed = 7;
  auto r = cross_validate(p.X, p.y, rr(1e-9), o);
  ASSERT_EQ(r.folds.size(), 5u);
  EXPECT_EQ(r.pairwise_accuracy.mean, 1.0);
  EXPECT_EQ(r.pairwise_accuracy.std_error, 0.0);
  EXPECT_NEAR(r.srocc.mean, 1.0, 1e-12);
  EXPECT_LT(r.mae.mean, 1e-6);
  std::size_t total = 0;
  for (const auto& f : r.folds) {
    total += f.n_test;
    EXPECT_EQ(f.n_train + f.n_test, 60u);
  }
  EXPECT_EQ(total, 60u);
}

TEST(CrossValidate, DeterministicAndOutOfFoldConsistent) {
  auto p = linear_problem(50, 2, 0.5);
  CVOptions o;
  o.seed = 3;
  auto a = cross_validate(p.X, p.y, rr(1.0), o);
  auto b = cross_validate(p.X, p.y, rr(1.0), o);
  EXPECT_TRUE(a.out_of_fold == b.out_of_fold);
  EXPECT_EQ(a.fold_of, b.fold_of);
  EXPECT_EQ(a.pairwise_accuracy.mean, b.pairwise_accuracy.mean);
  EXPECT_EQ(a.fold_of, kfold_assignment(50, 5, 3));

  // Each fold's prediction equals a model trained on the other folds.
  for (int k = 0; k < 5; ++k) {
    std::vector<int> tr, te;
    for (int i = 0; i < 50; ++i) (a.fold_of[static_cast<std::size_t>(i)] == k ? te : tr).push_back(i);
    FeatureMatrix Xt{take_rows(p.X.values, tr), p.X.columns};
    auto m = train(Xt, take(p.y, tr), rr(1.0));
    auto pred = predict_values(m, take_rows(p.X.values, te));
    for (std::size_t i = 0; i < te.size(); ++i)
      EXPECT_DOUBLE_EQ(pred[static_cast<Eigen::Index>(i)], a.out_of_fold[te[i]]);
  }
}

TEST(CrossValidate, RejectsBadInputs) {
  auto p = linear_problem(4, 3);
  EXPECT_THROW(cross_validate(p.X, p.y, rr(1.0)), ValidationError);
  Eigen::VectorXd y3 = p.y.head(3);
  EXPECT_THROW(cross_validate(p.X, y3, rr(1.0), CVOptions{.k = 2}), ValidationError);
}

TEST(SelectHyperparameters, SingleGridPoint) {
  auto p = linear_problem(30, 4, 1.0);
  auto s = select_hyperparameters(p.X, p.y, {rr(3.0)});
  EXPECT_EQ(s.index, 0u);
  EXPECT_EQ(s.spec.hp.lambda, 3.0);
}

TEST(SelectHyperparameters, PicksDominatingPoint) {
  auto p = linear_problem(60, 5, 0.1);
  // An absurd penalty shrinks predictions to near-constant and loses pair ordering.
  auto s = select_hyperparameters(p.X, p.y, {rr(1e9), rr(0.01)}, 3, 1);
  EXPECT_EQ(s.index, 1u);
  ASSERT_EQ(s.scores.size(), 2u);
  EXPECT_GT(s.scores[1], s.scores[0]);
}

TEST(SelectHyperparameters, TiesGoToLargerPenalty) {
  // Noise-free data ranks perfectly under both settings.
  auto p = linear_problem(60, 6);
  auto s = select_hyperparameters(p.X, p.y, {rr(0.001), rr(0.01)}, 3, 1);
  ASSERT_EQ(s.scores[0], s.scores[1]);
  EXPECT_EQ(s.index, 1u);
  EXPECT_EQ(s.spec.hp.lambda, 0.01);
}
