#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "support.hpp"

using namespace inquire;
using namespace inquire::icd;

namespace {

std::vector<ChapterId> chapters(std::initializer_list<int> ids) {
  std::vector<ChapterId> out;
  for (int i : ids) out.push_back(ChapterId::of(i));
  return out;
}

}  // namespace

TEST(Similarity, TableValuesForSingletons) {
  auto m = load_matrix(testing_support::source_path("data/icd/table1_similarity.json"));
  const double table[5][5] = {{1.00, 0.35, 0.35, 0.65, 0.20},
                              {0.35, 1.00, 0.50, 0.40, 0.25},
                              {0.35, 0.50, 1.00, 0.60, 0.30},
                              {0.65, 0.40, 0.60, 1.00, 0.40},
                              {0.20, 0.25, 0.30, 0.40, 1.00}};
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      auto a = chapters({i + 1});
      auto b = chapters({j + 1});
      EXPECT_EQ(set_similarity(a, b, m), table[i][j]) << i + 1 << "-" << j + 1;
    }
}

TEST(Similarity, MixedSets) {
  auto m = SimilarityMatrix::table_excerpt();
  auto plus = chapters({1, 2});
  auto minus = chapters({3});
  EXPECT_NEAR(set_similarity(plus, minus, m), 0.425, 1e-15);
  EXPECT_NEAR(div(plus, minus, m), 0.575, 1e-15);
  auto c1 = chapters({1, 1, 1});
  auto c5 = chapters({5, 5});
  EXPECT_NEAR(div(c1, c5, m), 0.80, 1e-15);
  auto c3 = chapters({3});
  EXPECT_EQ(div(c3, c3, m), 0.0);
}

TEST(Similarity, DefaultMatrixFileMatchesBuiltIn) {
  auto file = load_matrix(testing_support::source_path("data/icd/chapter_similarity.json"));
  auto built = SimilarityMatrix::with_default_chapters();
  EXPECT_EQ(file.labels(), built.labels());
  EXPECT_EQ(file.values(), built.values());
}

TEST(Similarity, UnknownChapterUsesFallback) {
  auto m = SimilarityMatrix::table_excerpt();
  EXPECT_EQ(m.sim(ChapterId::unknown(), ChapterId::of(1)), kUnknownSimilarity);
  EXPECT_EQ(m.sim(ChapterId::of(1), ChapterId::of(22)), kUnknownSimilarity);
}

TEST(Similarity, RejectsBadMatrices) {
  EXPECT_THROW(SimilarityMatrix({1, 2}, {{1.0, 0.2}, {0.3, 1.0}}), InvalidMatrix);
  EXPECT_THROW(SimilarityMatrix({1, 2}, {{0.9, 0.2}, {0.2, 1.0}}), InvalidMatrix);
  EXPECT_THROW(SimilarityMatrix({1, 2}, {{1.0, 1.2}, {1.2, 1.0}}), InvalidMatrix);
  EXPECT_THROW(SimilarityMatrix({1, 1}, {{1.0, 0.2}, {0.2, 1.0}}), InvalidMatrix);
  EXPECT_THROW(matrix_from_json(nlohmann::json{{"labels", {1}}}), InvalidMatrix);
}

TEST(Gini, Values) {
  std::vector<double> uniform(5, 0.2);
  EXPECT_NEAR(gini(uniform), 0.0, 1e-12);
  std::vector<double> point{0, 0, 0, 0, 1};
  EXPECT_NEAR(gini(point), 0.8, 1e-12);
}

TEST(Gini, PermutationAndScaleInvariant) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> v(2 + trial % 7);
    for (auto& x : v) x = u(rng);
    double g = gini(v);
    EXPECT_GE(g, -1e-12);
    EXPECT_LE(g, 1.0 - 1.0 / static_cast<double>(v.size()) + 1e-12);
    auto shuffled = v;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    EXPECT_NEAR(gini(shuffled), g, 1e-12);
    auto scaled = v;
    for (auto& x : scaled) x *= 7.5;
    EXPECT_NEAR(gini(scaled), g, 1e-12);
  }
}

TEST(Con, Values) {
  std::vector<double> uniform(5, 0.2), point{0, 0, 0, 0, 1};
  EXPECT_NEAR(con(uniform, uniform), 1.0, 1e-12);
  EXPECT_NEAR(con(point, point), 0.2, 1e-12);
  EXPECT_NEAR(con(uniform, point), 0.6, 1e-12);
}

TEST(Index, ResolveAndSynonyms) {
  auto idx = load_index(testing_support::source_path("data/icd/icd_index.json"));
  auto r = idx.resolve("  Acute   PERICARDITIS ");
  ASSERT_TRUE(r.code);
  EXPECT_EQ(*r.code, "I30.9");
  EXPECT_EQ(r.chapter, ChapterId::of(9));
  EXPECT_EQ(idx.resolve("  Sickle  Cell  DISEASE "), idx.resolve("sickle cell disease"));
  auto miss = idx.resolve("zzz-not-a-disease");
  EXPECT_FALSE(miss.code);
  EXPECT_FALSE(miss.chapter.known());
  EXPECT_TRUE(idx.synonyms("Pericarditis", "acute pericarditis"));
  EXPECT_FALSE(idx.synonyms("Pericarditis", "Pneumothorax"));
}

TEST(Index, ResolveBelief) {
  auto idx = load_index(testing_support::source_path("data/icd/icd_index.json"));
  auto b = resolve_belief(testing_support::belief({{"Pneumothorax", 0.6}, {"Mystery fever", 0.4}}), idx);
  EXPECT_EQ(*b.candidates[0].icd_code, "J93.9");
  EXPECT_EQ(b.candidates[0].chapter, ChapterId::of(10));
  EXPECT_FALSE(b.candidates[1].chapter.known());
}
