#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "engage/cv.hpp"
#include "engage/error.hpp"
#include "engage/metrics.hpp"
#include "oracles/pairs.hpp"

using namespace engage;

namespace {

std::vector<double> random_values(int n, int levels, std::mt19937_64& rng) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (auto& x : v) x = static_cast<double>(rng() % static_cast<unsigned>(levels)) / (levels - 1);
  return v;
}

}  // namespace

TEST(PairwiseAccuracy, Examples) {
  std::vector<double> y = {0.1, 0.5, 0.3, 0.9};
  std::vector<double> mono, neg, flat(4, 2.0);
  for (double v : y) {
    mono.push_back(std::exp(3 * v));
    neg.push_back(-v);
  }
  EXPECT_EQ(pairwise_accuracy(y, mono), 1.0);
  EXPECT_EQ(pairwise_accuracy(y, neg), 0.0);
  EXPECT_EQ(pairwise_accuracy(y, flat), 0.5);
  std::vector<double> tied = {1, 1};
  EXPECT_THROW(pairwise_accuracy(tied, tied), UndefinedError);
}

TEST(PairwiseAccuracy, ComplementUnderNegation) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    auto y = random_values(30, 10, rng);
    std::vector<double> p(30), q(30);
    std::normal_distribution<double> g;
    for (int i = 0; i < 30; ++i) {
      p[static_cast<std::size_t>(i)] = g(rng);
      q[static_cast<std::size_t>(i)] = -p[static_cast<std::size_t>(i)];
    }
    EXPECT_NEAR(pairwise_accuracy(y, p) + pairwise_accuracy(y, q), 1.0, 1e-12);
  }
}

TEST(PairwiseAccuracy, MatchesBruteForceWithFilters) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    int n = 2 + static_cast<int>(rng() % 49);
    auto y = random_values(n, 6, rng), p = random_values(n, 5, rng), m = random_values(n, 11, rng);
    PairAttributes attrs;
    for (int i = 0; i < n; ++i) {
      attrs.subjects.push_back(std::string(1, static_cast<char>('a' + rng() % 3)));
      attrs.word_counts.push_back(static_cast<double>(rng() % 10000));
    }
    attrs.mnet = m;
    struct Case {
      PairFilter f;
      std::function<bool(int, int)> keep;
    };
    std::vector<Case> cases = {
        {PairFilter::all(), nullptr},
        {PairFilter::same_subject(), [&](int i, int j) { return attrs.subjects[i] == attrs.subjects[j]; }},
        {PairFilter::mnet_diff(0.2, 0.5),
         [&](int i, int j) {
           double d = std::abs(m[i] - m[j]);
           return d >= 0.2 && d < 0.5;
         }},
        {PairFilter::length(LengthPreset::short_long),
         [&](int i, int j) { return (attrs.word_counts[i] < 5000) != (attrs.word_counts[j] < 5000); }},
        {PairFilter::length(LengthPreset::long_long),
         [&](int i, int j) { return attrs.word_counts[i] >= 5000 && attrs.word_counts[j] >= 5000; }},
    };
    for (const auto& c : cases) {
      auto ref = oracle::pairwise(y, p, c.keep);
      auto t = pairwise_tally(y, p, c.f, attrs);
      ASSERT_EQ(t.pairs, ref.pairs) << c.f.name();
      if (ref.pairs > 0) EXPECT_EQ(t.accuracy(), ref.accuracy()) << c.f.name();
    }
  }
}

TEST(PairFilter, Validation) {
  EXPECT_THROW(PairFilter::mnet_diff(0.5, 0.5), ValidationError);
  EXPECT_THROW(PairFilter::mnet_diff(-0.1, 0.5), ValidationError);
  EXPECT_THROW(PairFilter::mnet_diff(0.1, 1.1), ValidationError);
  std::vector<double> y = {1, 2, 3};
  EXPECT_THROW(pairwise_accuracy(y, y, PairFilter::same_subject(), {}), ValidationError);
}

TEST(Srocc, Examples) {
  std::vector<double> a = {1, 2, 3}, b = {1, 3, 2}, r = {3, 2, 1};
  EXPECT_NEAR(srocc(a, a), 1.0, 1e-15);
  EXPECT_NEAR(srocc(a, r), -1.0, 1e-15);
  EXPECT_NEAR(srocc(a, b), 0.5, 1e-15);
  std::vector<double> c = {4, 4, 4};
  EXPECT_THROW(srocc(a, c), UndefinedError);
}

TEST(Srocc, InvariantUnderMonotoneTransformsAndMatchesOracle) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    auto a = random_values(40, 8, rng), b = random_values(40, 6, rng);
    std::vector<double> ta, tb;
    for (double x : a) ta.push_back(std::exp(5 * x) - 3);
    for (double x : b) tb.push_back(x * x * x + 2 * x);
    EXPECT_NEAR(srocc(a, b), srocc(ta, tb), 1e-12);
    EXPECT_NEAR(srocc(a, b), oracle::spearman(a, b), 1e-12);
    EXPECT_NEAR(srocc(a, ta), 1.0, 1e-12);
  }
}

TEST(AverageRanks, TiesShareRank) {
  std::vector<double> v = {10, 20, 10, 30};
  EXPECT_EQ(average_ranks(v), (std::vector<double>{1.5, 3, 1.5, 4}));
}

TEST(Mae, Examples) {
  std::vector<double> y = {0, 1}, half = {0.5, 0.5}, shifted = {1, 2};
  EXPECT_EQ(mae(y, y), 0.0);
  EXPECT_EQ(mae(y, shifted), 1.0);
  EXPECT_EQ(mae(y, half), 0.5);
}

TEST(BinnedMisranking, PerfectPredictor) {
  std::mt19937_64 rng(4);
  auto m = random_values(40, 21, rng);
  auto r = binned_misranking(m, m);
  ASSERT_EQ(r.bins.size(), 10u);
  for (const auto& b : r.bins)
    if (b.pairs > 0) EXPECT_EQ(*b.accuracy, 1.0);
  for (const auto& c : r.cumulative)
    if (c.pairs > 0) EXPECT_EQ(*c.accuracy, 1.0);
}

TEST(BinnedMisranking, ThreeLectureToy) {
  // Δ(0,1)=0.05 → bin 0; Δ(0,2)=0.65 → bin 6; Δ(1,2)=0.6 → bin 6.
  std::vector<double> m = {0.1, 0.15, 0.75}, p = {2.0, 1.0, 3.0};
  auto r = binned_misranking(m, p);
  EXPECT_EQ(r.bins[0].pairs, 1);
  EXPECT_EQ(*r.bins[0].accuracy, 0.0);
  EXPECT_EQ(r.bins[6].pairs, 2);
  EXPECT_EQ(*r.bins[6].accuracy, 1.0);
  EXPECT_FALSE(r.bins[3].accuracy.has_value());
  EXPECT_EQ(r.cumulative[0].pairs, 3);
  EXPECT_NEAR(*r.cumulative[0].accuracy, 2.0 / 3, 1e-15);
  EXPECT_EQ(r.cumulative[5].pairs, 2);
  EXPECT_EQ(r.cumulative[6].pairs, 1);  // strictly above 0.6
  EXPECT_EQ(r.cumulative[7].pairs, 0);
}

TEST(BinnedMisranking, MatchesBruteForceAndWeightedAverage) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 25; ++trial) {
    int n = 2 + static_cast<int>(rng() % 49);
    auto m = random_values(n, 41, rng), p = random_values(n, 7, rng);
    auto r = binned_misranking(m, p);
    double weighted = 0;
    long long total = 0;
    for (std::size_t k = 0; k < r.bins.size(); ++k) {
      const double lo = static_cast<double>(k) * 0.1;
      const double hi = k + 1 == r.bins.size() ? 1.0 : static_cast<double>(k + 1) * 0.1;
      auto ref = oracle::pairwise(m, p, [&](int i, int j) {
        double d = std::abs(m[i] - m[j]);
        return d >= lo - 1e-9 && (d < hi - 1e-9 || k + 1 == r.bins.size());
      });
      ASSERT_EQ(r.bins[k].pairs, ref.pairs) << "bin " << k;
      if (ref.pairs) {
        EXPECT_EQ(*r.bins[k].accuracy, ref.accuracy());
        weighted += *r.bins[k].accuracy * static_cast<double>(ref.pairs);
      }
      total += ref.pairs;

      auto cum = oracle::pairwise(m, p, [&](int i, int j) { return std::abs(m[i] - m[j]) > lo + 1e-9; });
      ASSERT_EQ(r.cumulative[k].pairs, cum.pairs) << "cumulative " << k;
      if (cum.pairs) EXPECT_EQ(*r.cumulative[k].accuracy, cum.accuracy());
    }
    auto all = oracle::pairwise(m, p);
    ASSERT_EQ(total, all.pairs);
    if (total) EXPECT_NEAR(weighted / static_cast<double>(total), all.accuracy(), 1e-12);
  }
}

TEST(KFold, PartitionAndDeterminism) {
  for (std::size_t n : {5u, 17u, 100u}) {
    auto f = kfold_assignment(n, 5, 42);
    std::vector<int> sizes(5, 0);
    for (int x : f) ++sizes[static_cast<std::size_t>(x)];
    EXPECT_LE(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()), 1);
    EXPECT_EQ(f, kfold_assignment(n, 5, 42));
  }
  EXPECT_NE(kfold_assignment(100, 5, 1), kfold_assignment(100, 5, 2));
  EXPECT_THROW(kfold_assignment(3, 5, 0), ValidationError);
  EXPECT_THROW(kfold_assignment(10, 1, 0), ValidationError);
}

TEST(Summary, StandardErrorIsSampleStdOverRootK) {
  auto s = summarize({0.6, 0.7, 0.8, 0.9, 1.0});
  EXPECT_NEAR(s.mean, 0.8, 1e-15);
  EXPECT_NEAR(s.std_error, std::sqrt(0.025) / std::sqrt(5.0), 1e-15);
  auto t = summarize({1.0, NAN, 3.0});
  EXPECT_EQ(t.folds, 2);
  EXPECT_EQ(t.mean, 2.0);
}
