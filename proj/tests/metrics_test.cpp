#include <cmath>

#include <gtest/gtest.h>

#include "support.hpp"

using namespace inquire;
using namespace inquire::metrics;

namespace {

Transcript with_rank(int rank) {
  Transcript t;
  t.correct_rank = rank;
  return t;
}

std::vector<CalibrationRecord> records(double conf, int n, int correct) {
  std::vector<CalibrationRecord> out;
  for (int i = 0; i < n; ++i) out.push_back({conf, i < correct});
  return out;
}

}  // namespace

TEST(Accuracy, TopKCounting) {
  std::vector<Transcript> ts;
  for (int i = 0; i < 10; ++i) ts.push_back(with_rank(i < 3 ? 1 : 0));
  EXPECT_DOUBLE_EQ(top_k_accuracy(ts, 1), 0.3);
  ts[5].correct_rank = 3;
  EXPECT_DOUBLE_EQ(top_k_accuracy(ts, 1), 0.3);
  EXPECT_DOUBLE_EQ(top_k_accuracy(ts, 3), 0.4);
}

TEST(Mrr, Contributions) {
  std::vector<Transcript> all{with_rank(1), with_rank(1)};
  EXPECT_DOUBLE_EQ(mrr(all), 1.0);
  std::vector<Transcript> one{with_rank(3)};
  EXPECT_DOUBLE_EQ(mrr(one), 1.0 / 3.0);
  std::vector<Transcript> none{with_rank(0)};
  EXPECT_DOUBLE_EQ(mrr(none), 0.0);
}

TEST(Ece, HandCases) {
  EXPECT_NEAR(ece(records(0.8, 10, 8)), 0.0, 1e-9);
  EXPECT_NEAR(ece(records(1.0, 10, 0)), 1.0, 1e-9);
  auto two = records(0.3, 10, 5);
  auto high = records(0.9, 10, 7);
  two.insert(two.end(), high.begin(), high.end());
  EXPECT_NEAR(ece(two), 0.2, 1e-9);
}

TEST(Ece, TableBinsAndEdge) {
  auto t = calibration_table(records(1.0, 4, 4));
  ASSERT_EQ(t.size(), 10u);
  EXPECT_EQ(t[9].count, 4u);
  EXPECT_DOUBLE_EQ(t[9].accuracy, 1.0);
  EXPECT_DOUBLE_EQ(t[0].lower, 0.0);
  EXPECT_DOUBLE_EQ(t[9].upper, 1.0);
}

TEST(EntropyCurve, BaselineAndPointMass) {
  Transcript t;
  t.initial_belief = testing_support::belief({{"A", 0.2}, {"B", 0.2}, {"C", 0.2}, {"D", 0.2}, {"E", 0.2}});
  TurnRecord r;
  r.turn = 1;
  r.entropy_before = std::log2(5.0);
  r.entropy_after = 0.0;
  t.turns.push_back(r);
  std::vector<Transcript> ts{t};
  auto c = entropy_curve(ts, 5, 3);
  ASSERT_EQ(c.size(), 4u);
  EXPECT_DOUBLE_EQ(c[0], 0.0);
  EXPECT_NEAR(c[1], std::log2(5.0), 1e-12);
  EXPECT_NEAR(c[3], std::log2(5.0), 1e-12);
}

TEST(QuestionCount, CorrectOnly) {
  auto a = with_rank(1);
  a.turns.resize(2);
  auto b = with_rank(0);
  b.turns.resize(6);
  std::vector<Transcript> ts{a, b};
  EXPECT_DOUBLE_EQ(mean_question_count(ts), 4.0);
  EXPECT_DOUBLE_EQ(mean_question_count(ts, true), 2.0);
}

TEST(Summary, StudentT) {
  std::vector<double> xs{1, 2, 3, 4, 5};
  auto s = summarize(xs);
  EXPECT_DOUBLE_EQ(s.mean, 3.0);
  EXPECT_NEAR(s.sd, std::sqrt(2.5), 1e-12);
  EXPECT_NEAR(s.ci_high - s.mean, 2.776445105 * std::sqrt(2.5) / std::sqrt(5.0), 1e-6);
  std::vector<double> single{0.4};
  auto one = summarize(single);
  EXPECT_DOUBLE_EQ(one.ci_low, 0.4);
  EXPECT_DOUBLE_EQ(one.ci_high, 0.4);
}

TEST(McNemar, ExactOneSided) {
  std::vector<bool> a, b;
  for (int i = 0; i < 10; ++i) {
    a.push_back(i < 8);
    b.push_back(i >= 8);
  }
  auto r = mcnemar_one_sided(a, b);
  EXPECT_EQ(r.a_only, 8u);
  EXPECT_EQ(r.b_only, 2u);
  EXPECT_NEAR(r.p_value, 56.0 / 1024.0, 1e-12);
  auto rev = mcnemar_one_sided(b, a);
  EXPECT_NEAR(rev.p_value, 1013.0 / 1024.0, 1e-12);
  EXPECT_DOUBLE_EQ(mcnemar_one_sided(a, a).p_value, 1.0);
}
