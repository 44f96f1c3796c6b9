#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "engage/error.hpp"
#include "engage/labels.hpp"
#include "engage/metrics.hpp"
#include "engage/thurstone.hpp"
#include "oracles/probit.hpp"
#include "test_util.hpp"

using namespace engage;

namespace {

Lecture lec(std::string id, double duration = 100.0) {
  Lecture l;
  l.id = std::move(id);
  l.duration_s = duration;
  return l;
}

ViewEvent ev(std::string user, std::string lecture, double watch, int minute = 0) {
  ViewEvent e{std::move(user), std::move(lecture), {}, watch};
  e.timestamp = Timestamp{std::chrono::seconds{60 * minute}};
  return e;
}

}  // namespace

TEST(UserLectureEngagement, Examples) {
  std::vector<ViewEvent> one = {ev("u", "a", 30)};
  EXPECT_DOUBLE_EQ(user_lecture_engagement(one, 120), 0.25);
  std::vector<ViewEvent> two = {ev("u", "a", 100), ev("u", "a", 56)};
  EXPECT_EQ(user_lecture_engagement(two, 120), 1.0);
  std::vector<ViewEvent> zero = {ev("u", "a", 0)};
  EXPECT_EQ(user_lecture_engagement(zero, 120), 0.0);
  EXPECT_THROW(user_lecture_engagement(one, 0), ValidationError);
}

TEST(Mnet, MedianConventions) {
  EXPECT_DOUBLE_EQ(mnet(std::vector<double>{0.2, 0.4, 0.9}), 0.4);
  EXPECT_DOUBLE_EQ(mnet(std::vector<double>{0.2, 0.4}), 0.30000000000000004);
  EXPECT_NEAR(mnet(std::vector<double>{0.2, 0.4}), 0.3, 1e-15);
  EXPECT_EQ(mnet(std::vector<double>{1.0, 1.0, 1.0}), 1.0);
  EXPECT_THROW(mnet(std::vector<double>{}), UndefinedError);
}

TEST(Lmnet, Examples) {
  EXPECT_EQ(lmnet(1.0, 1e-3), 0.0);
  EXPECT_NEAR(lmnet(0.5, 1e-3), -0.6931, 1e-4);
  EXPECT_NEAR(lmnet(0.0, 1e-3), -6.9078, 1e-4);
}

TEST(Lmnet, BoundedAndMonotone) {
  double prev = -INFINITY;
  for (int i = 0; i <= 1000; ++i) {
    double m = i / 1000.0, v = lmnet(m, 1e-3);
    EXPECT_GE(v, std::log(1e-3));
    EXPECT_LE(v, 0.0);
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(EngagementRecords, SumsEventsPerUserAndIgnoresUnknownLectures) {
  std::vector<Lecture> ls = {lec("a")};
  std::vector<ViewEvent> es = {ev("u", "a", 20, 5), ev("u", "a", 30, 1), ev("v", "a", 10), ev("u", "zzz", 10)};
  auto rs = engagement_records(ls, es);
  ASSERT_EQ(rs.size(), 2u);
  EXPECT_EQ(rs[0].user_id, "u");
  EXPECT_DOUBLE_EQ(rs[0].normalized_engagement, 0.5);
  EXPECT_EQ(rs[0].event_count, 2);
  EXPECT_EQ(rs[0].first_seen, Timestamp{std::chrono::seconds{60}});
}

TEST(CleanBotUsers, StrictThresholdAndIdempotence) {
  std::vector<Lecture> ls = {lec("a"), lec("b")};
  std::vector<ViewEvent> es = {ev("bot", "a", 2), ev("bot", "b", 4),    // mean 0.03
                               ev("edge", "a", 5),                       // mean exactly 0.05
                               ev("human", "a", 60), ev("human", "b", 80)};
  auto r = clean_bot_users(es, ls, 0.05);
  EXPECT_EQ(r.removed_users, std::vector<std::string>{"bot"});
  EXPECT_EQ(r.events.size(), 3u);
  auto again = clean_bot_users(r.events, ls, 0.05);
  EXPECT_EQ(again.events, r.events);
  EXPECT_TRUE(again.removed_users.empty());
}

TEST(StandardisedLabels, PopulationZScores) {
  std::vector<Lecture> ls = {lec("a"), lec("b"), lec("c")};
  // One user with log-engagements {-1, -0.5}; z-scores {-1, +1}.
  std::vector<ViewEvent> es = {ev("u", "a", 100 * std::exp(-1.0)), ev("u", "b", 100 * std::exp(-0.5)),
                               ev("flat", "a", 50), ev("flat", "b", 50), ev("single", "c", 70)};
  auto t = standardised_labels(es, ls);
  ASSERT_NE(t.find("a"), nullptr);
  EXPECT_NEAR(t.find("a")->target, -1.0, 1e-12);
  EXPECT_NEAR(t.find("b")->target, 1.0, 1e-12);
  EXPECT_EQ(t.find("c"), nullptr);  // its only viewer has one record
  ASSERT_EQ(t.excluded.size(), 1u);
  EXPECT_EQ(t.excluded[0].first, "c");
}

TEST(StandardisedLabels, SingleUserLectureTakesThatUsersZ) {
  std::vector<Lecture> ls = {lec("a"), lec("b"), lec("c")};
  std::vector<ViewEvent> es = {ev("u", "a", 10), ev("u", "b", 20), ev("u", "c", 40)};
  auto t = standardised_labels(es, ls);
  std::vector<double> logs = {std::log(0.1), std::log(0.2), std::log(0.4)};
  double m = (logs[0] + logs[1] + logs[2]) / 3, v = 0;
  for (double x : logs) v += (x - m) * (x - m) / 3;
  EXPECT_NEAR(t.find("c")->target, (logs[2] - m) / std::sqrt(v), 1e-12);
}

TEST(Thurstone, EightyFourPercentPair) {
  std::vector<PairCount> c = {{0, 1, 84}, {1, 0, 16}};
  auto fit = fit_thurstone(2, c);
  double d = fit.scale[0] - fit.scale[1];
  EXPECT_NEAR(d, 0.994, 0.05);
  EXPECT_NEAR(d, oracle::probit_difference(84, 100, 1e-3), 1e-4);
  EXPECT_NEAR(oracle::Phi_inv(0.84), 0.9945, 1e-4);
  EXPECT_NEAR(fit.scale[0] + fit.scale[1], 0.0, 1e-12);
}

TEST(Thurstone, SymmetricWinsGiveEqualScale) {
  std::vector<PairCount> c = {{0, 1, 50}, {1, 0, 50}};
  auto fit = fit_thurstone(2, c);
  EXPECT_NEAR(fit.scale[0], fit.scale[1], 1e-9);
}

TEST(Thurstone, EmptyComparisonsThrow) {
  EXPECT_THROW(fit_thurstone(3, std::vector<PairCount>{}), UndefinedError);
}

namespace {

std::vector<PairCount> probit_sample(const std::vector<double>& latent, int per_pair, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<PairCount> out;
  for (int a = 0; a < static_cast<int>(latent.size()); ++a)
    for (int b = a + 1; b < static_cast<int>(latent.size()); ++b) {
      int wins = 0;
      for (int k = 0; k < per_pair; ++k)
        if (latent[static_cast<std::size_t>(a)] - latent[static_cast<std::size_t>(b)] + noise(rng) > 0) ++wins;
      out.push_back({a, b, static_cast<double>(wins)});
      out.push_back({b, a, static_cast<double>(per_pair - wins)});
    }
  return out;
}

}  // namespace

TEST(Thurstone, RecoversProbitLatentOrdering) {
  std::vector<double> latent = {-1.0, -0.4, 0.1, 0.5, 1.3};
  auto fit = fit_thurstone(5, probit_sample(latent, 1000, 17));
  EXPECT_TRUE(fit.converged);
  EXPECT_GE(srocc(fit.scale, latent), 0.95);
  for (std::size_t i = 0; i + 1 < latent.size(); ++i) EXPECT_LT(fit.scale[i], fit.scale[i + 1]);
}

TEST(Thurstone, RelabellingAndComponents) {
  std::vector<double> latent = {0.3, -0.2, 0.8};
  auto counts = probit_sample(latent, 200, 4);
  auto fit = fit_thurstone(3, counts);
  std::vector<int> perm = {2, 0, 1};
  std::vector<PairCount> relabelled;
  for (auto c : counts) relabelled.push_back({perm[static_cast<std::size_t>(c.winner)], perm[static_cast<std::size_t>(c.loser)], c.wins});
  auto refit = fit_thurstone(3, relabelled);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(fit.scale[static_cast<std::size_t>(i)], refit.scale[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])], 1e-6);

  // Two components plus an isolated item: each component is mean-zero.
  std::vector<PairCount> split = {{0, 1, 7}, {1, 0, 3}, {2, 3, 1}, {3, 2, 9}};
  auto f2 = fit_thurstone(5, split);
  EXPECT_EQ(f2.components, 2);
  EXPECT_NEAR(f2.scale[0] + f2.scale[1], 0.0, 1e-12);
  EXPECT_NEAR(f2.scale[2] + f2.scale[3], 0.0, 1e-12);
  EXPECT_TRUE(std::isnan(f2.scale[4]));
  EXPECT_EQ(f2.component[4], -1);
}

TEST(ComparativeScale, OrdersLecturesByPairwisePreference) {
  std::vector<Lecture> ls = {lec("a"), lec("b"), lec("c")};
  std::vector<ViewEvent> es;
  for (int u = 0; u < 6; ++u) {
    std::string id = "u" + std::to_string(u);
    es.push_back(ev(id, "a", 20 + u));
    es.push_back(ev(id, "b", 50 + u));
    es.push_back(ev(id, "c", u < 5 ? 80 : 10));
  }
  auto t = comparative_scale(es, ls);
  EXPECT_LT(t.find("a")->target, t.find("b")->target);
  EXPECT_LT(t.find("b")->target, t.find("c")->target);
}

TEST(BuildLabelTable, RawMatchesComposedOracles) {
  std::vector<Lecture> ls = {lec("a"), lec("b", 200), lec("c")};
  std::vector<ViewEvent> es = {ev("u", "a", 20), ev("v", "a", 40), ev("w", "a", 90), ev("u", "b", 100),
                               ev("v", "b", 10), ev("u", "c", 100), ev("v", "c", 100)};
  auto t = build_label_table(ls, es, Encoding::raw_lmnet);
  ASSERT_EQ(t.entries.size(), 3u);
  EXPECT_DOUBLE_EQ(*t.find("a")->mnet, 0.4);
  EXPECT_DOUBLE_EQ(t.find("a")->target, std::log(0.4));
  EXPECT_NEAR(*t.find("b")->mnet, (0.5 + 0.05) / 2, 1e-15);
  EXPECT_EQ(t.find("c")->target, 0.0);

  auto cleaned = build_label_table(ls, es, Encoding::cleaned_lmnet);
  ASSERT_EQ(cleaned.entries.size(), t.entries.size());
  for (std::size_t i = 0; i < t.entries.size(); ++i) {
    EXPECT_EQ(cleaned.entries[i].target, t.entries[i].target);
    EXPECT_EQ(cleaned.entries[i].mnet, t.entries[i].mnet);
  }
  EXPECT_THROW(parse_encoding("bogus"), ValidationError);
  EXPECT_EQ(parse_encoding("standardized"), Encoding::standardised_lmnet);
}

TEST(LabelsCsv, RoundTrip) {
  std::vector<Lecture> ls = {lec("a"), lec("b")};
  std::vector<ViewEvent> es = {ev("u", "a", 1.0 / 3), ev("u", "b", 77), ev("v", "a", 12), ev("v", "b", 3)};
  engage::testing::TempDir d;
  for (auto enc : {Encoding::raw_lmnet, Encoding::standardised_lmnet, Encoding::comparative}) {
    auto t = build_label_table(ls, es, enc);
    write_labels_csv(d / "labels.csv", t);
    auto back = read_labels_csv(d / "labels.csv");
    EXPECT_EQ(back.encoding, t.encoding);
    EXPECT_EQ(back.entries, t.entries);
  }
}
