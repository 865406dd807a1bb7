#include <cmath>

#include "gtest/gtest.h"
#include "sessrec/metrics.hpp"
#include "sessrec/rng.hpp"

using namespace sessrec;

namespace {

RankingResult result_with_rank(int64_t rank, std::vector<int32_t> top = {},
                               std::vector<int32_t> prefix = {0}) {
  RankingResult r;
  r.rank = rank;
  r.top_k = std::move(top);
  r.prefix = std::move(prefix);
  r.label = 1;
  return r;
}

// Brute-force metric oracle, written independently of metrics.hpp: literal
// double loops over the definitions.
double oracle_hr(const std::vector<RankingResult>& rs, int k) {
  double hits = 0;
  for (const auto& r : rs)
    if (r.rank != 0 && r.rank <= k) hits += 1;
  return hits / static_cast<double>(rs.size());
}

double oracle_ndcg(const std::vector<RankingResult>& rs, int k) {
  double total = 0;
  for (const auto& r : rs)
    if (r.rank != 0 && r.rank <= k)
      total += std::log(2.0) / std::log(static_cast<double>(r.rank) + 1.0);
  return total / static_cast<double>(rs.size());
}

double oracle_ild(const std::vector<int32_t>& rec, const std::vector<int32_t>& topics) {
  double total = 0;
  for (size_t a = 0; a < rec.size(); ++a)
    for (size_t b = 0; b < rec.size(); ++b) {
      if (a == b) continue;
      total += topics[static_cast<size_t>(rec[a])] == topics[static_cast<size_t>(rec[b])] ? 0 : 1;
    }
  return total / static_cast<double>(rec.size() * (rec.size() - 1));
}

double oracle_unexp(const std::vector<int32_t>& rec, const std::vector<int32_t>& prefix,
                    const std::vector<int32_t>& topics) {
  double total = 0;
  for (int32_t a : rec) {
    double inner = 0;
    for (int32_t b : prefix)
      inner += topics[static_cast<size_t>(a)] == topics[static_cast<size_t>(b)] ? 0 : 1;
    total += inner / static_cast<double>(prefix.size());
  }
  return total / static_cast<double>(rec.size());
}

}  // namespace

TEST(HitRateTest, HandCases) {
  EXPECT_DOUBLE_EQ(hit_rate({result_with_rank(1), result_with_rank(1)}, 20), 1.0);
  EXPECT_DOUBLE_EQ(hit_rate({result_with_rank(21), result_with_rank(500)}, 20), 0.0);
  // ranks {1, 25, 7} at k = 20 -> 2/3
  EXPECT_DOUBLE_EQ(
      hit_rate({result_with_rank(1), result_with_rank(25), result_with_rank(7)}, 20), 2.0 / 3.0);
  EXPECT_THROW(hit_rate({}, 20), DataError);
}

TEST(NdcgTest, HandCases) {
  EXPECT_DOUBLE_EQ(ndcg({result_with_rank(1)}, 20), 1.0);
  EXPECT_DOUBLE_EQ(ndcg({result_with_rank(3)}, 20), 0.5);  // 1/log2(4)
  // ranks {1, 3, missing} -> (1 + 0.5 + 0) / 3
  EXPECT_DOUBLE_EQ(ndcg({result_with_rank(1), result_with_rank(3), result_with_rank(0)}, 20),
                   0.5);
}

TEST(IldTest, HandCases) {
  const std::vector<int32_t> topics{0, 0, 1, 2};  // article id -> topic
  EXPECT_DOUBLE_EQ(*ild({0, 1}, topics), 0.0);    // same topic
  EXPECT_DOUBLE_EQ(*ild({0, 2}, topics), 1.0);    // two items, different topics
  // topics {A, A, B}: 4 of 6 ordered pairs differ
  EXPECT_DOUBLE_EQ(*ild({0, 1, 2}, topics), 2.0 / 3.0);
  EXPECT_FALSE(ild({0}, topics).has_value());  // undefined below two items
}

TEST(UnexpTest, HandCases) {
  const std::vector<int32_t> topics{0, 0, 1, 2};
  EXPECT_DOUBLE_EQ(unexp({0, 1}, {0, 1}, topics), 0.0);  // same topic as prefix
  EXPECT_DOUBLE_EQ(unexp({2, 3}, {0, 1}, topics), 1.0);  // all different
  // R = {A, B}, prefix = {A} -> (0 + 1) / 2
  EXPECT_DOUBLE_EQ(unexp({0, 2}, {1}, topics), 0.5);
}

TEST(CoverageTest, HandCases) {
  // Every R identical -> |R| / |distinct labels|.
  std::vector<RankingResult> same;
  for (int i = 0; i < 4; ++i) {
    RankingResult r;
    r.top_k = {10, 11, 12};
    r.label = i;
    same.push_back(r);
  }
  EXPECT_DOUBLE_EQ(coverage(same), 3.0 / 4.0);

  // Top-1 recommender that always hits, distinct labels -> 1.0.
  std::vector<RankingResult> hitters;
  for (int i = 0; i < 5; ++i) {
    RankingResult r;
    r.top_k = {i};
    r.label = i;
    hitters.push_back(r);
  }
  EXPECT_DOUBLE_EQ(coverage(hitters), 1.0);
}

TEST(CoverageTest, SmallFixtureMatchesHandCount) {
  std::vector<RankingResult> rs(5);
  rs[0].top_k = {1, 2};
  rs[0].label = 7;
  rs[1].top_k = {2, 3};
  rs[1].label = 8;
  rs[2].top_k = {3, 4};
  rs[2].label = 7;
  rs[3].top_k = {1, 4};
  rs[3].label = 9;
  rs[4].top_k = {5, 6};
  rs[4].label = 9;
  // distinct recommended {1..6} = 6, distinct labels {7, 8, 9} = 3
  EXPECT_DOUBLE_EQ(coverage(rs), 2.0);  // may exceed 1; reported raw
}

TEST(MetricInvariants, HrNonDecreasingInKAndNdcgBelowHr) {
  Rng rng(19);
  std::vector<RankingResult> rs;
  for (int i = 0; i < 200; ++i) rs.push_back(result_with_rank(rng.uniform_int(0, 40)));
  double prev = 0.0;
  for (int k : {1, 2, 5, 10, 20, 40}) {
    const double hr = hit_rate(rs, k);
    EXPECT_GE(hr, prev);
    EXPECT_LE(ndcg(rs, k), hr + 1e-15);
    prev = hr;
  }
}

TEST(MetricInvariants, IldAndUnexpPermutationInvariant) {
  Rng rng(23);
  std::vector<int32_t> topics;
  for (int i = 0; i < 50; ++i) topics.push_back(static_cast<int32_t>(rng.uniform(5)));
  std::vector<int32_t> rec{4, 9, 17, 23, 31};
  std::vector<int32_t> prefix{1, 2, 3};
  const double i1 = *ild(rec, topics);
  const double u1 = unexp(rec, prefix, topics);
  std::reverse(rec.begin(), rec.end());
  EXPECT_DOUBLE_EQ(*ild(rec, topics), i1);
  EXPECT_DOUBLE_EQ(unexp(rec, prefix, topics), u1);
}

TEST(MetricInvariants, ConcatenationIsWeightedMean) {
  Rng rng(29);
  std::vector<RankingResult> a, b;
  for (int i = 0; i < 30; ++i) a.push_back(result_with_rank(rng.uniform_int(0, 30)));
  for (int i = 0; i < 70; ++i) b.push_back(result_with_rank(rng.uniform_int(0, 30)));
  std::vector<RankingResult> both = a;
  both.insert(both.end(), b.begin(), b.end());
  const double merged = hit_rate(both, 20);
  const double weighted = (30 * hit_rate(a, 20) + 70 * hit_rate(b, 20)) / 100.0;
  EXPECT_NEAR(merged, weighted, 1e-12);
  const double merged_ndcg = ndcg(both, 20);
  const double weighted_ndcg = (30 * ndcg(a, 20) + 70 * ndcg(b, 20)) / 100.0;
  EXPECT_NEAR(merged_ndcg, weighted_ndcg, 1e-12);
}

TEST(MetricInvariants, BruteForceOracleAgreesOnRandomFixtures) {
  Rng rng(31);
  std::vector<int32_t> topics;
  for (int i = 0; i < 40; ++i) topics.push_back(static_cast<int32_t>(rng.uniform(4)));
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<RankingResult> rs;
    const int n = static_cast<int>(1 + rng.uniform(10));
    for (int i = 0; i < n; ++i) {
      RankingResult r;
      r.rank = rng.uniform_int(0, 30);
      r.label = static_cast<int32_t>(rng.uniform(40));
      for (int j = 0; j < 5; ++j) r.top_k.push_back(static_cast<int32_t>(rng.uniform(40)));
      for (int j = 0; j < 3; ++j) r.prefix.push_back(static_cast<int32_t>(rng.uniform(40)));
      rs.push_back(r);
    }
    EXPECT_NEAR(hit_rate(rs, 20), oracle_hr(rs, 20), 1e-12);
    EXPECT_NEAR(ndcg(rs, 20), oracle_ndcg(rs, 20), 1e-12);
    for (const auto& r : rs) {
      EXPECT_NEAR(*ild(r.top_k, topics), oracle_ild(r.top_k, topics), 1e-12);
      EXPECT_NEAR(unexp(r.top_k, r.prefix, topics), oracle_unexp(r.top_k, r.prefix, topics),
                  1e-12);
    }
  }
}

TEST(StratifiedTest, ColdStratumAbsentWhenAllSeen) {
  std::vector<int32_t> topics{0, 1};
  std::vector<RankingResult> rs{result_with_rank(1), result_with_rank(2)};
  for (auto& r : rs) r.cold = false;
  const auto rep = stratified_report(rs, 20, topics);
  EXPECT_FALSE(rep.cold.has_value());
  ASSERT_TRUE(rep.non_cold.has_value());
  EXPECT_EQ(rep.non_cold->count, 2);
}

TEST(StratifiedTest, ColdAndNonColdSplit) {
  std::vector<int32_t> topics{0, 1};
  auto a = result_with_rank(1);
  a.cold = true;
  auto b = result_with_rank(25);
  b.cold = false;
  const auto rep = stratified_report({a, b}, 20, topics);
  ASSERT_TRUE(rep.cold.has_value());
  ASSERT_TRUE(rep.non_cold.has_value());
  EXPECT_EQ(rep.cold->count, 1);
  EXPECT_EQ(rep.non_cold->count, 1);
  EXPECT_DOUBLE_EQ(rep.cold->hr, 1.0);
  EXPECT_DOUBLE_EQ(rep.non_cold->hr, 0.0);
}

TEST(StratifiedTest, PrefixLengthBuckets) {
  std::vector<int32_t> topics{0};
  std::vector<RankingResult> rs;
  for (int len : {1, 2, 3, 4, 5, 6, 9}) {
    RankingResult r = result_with_rank(1);
    r.prefix.assign(static_cast<size_t>(len), 0);
    rs.push_back(r);
  }
  const auto rep = stratified_report(rs, 20, topics);
  EXPECT_EQ(rep.by_prefix_len.size(), 5u);  // 1, 2, 3, 4, 5+
  EXPECT_EQ(rep.by_prefix_len.at("5+").count, 3);
  EXPECT_EQ(rep.by_prefix_len.at("1").count, 1);
}
