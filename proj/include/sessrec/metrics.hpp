#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sessrec/common.hpp"

namespace sessrec {

// One scored test instance. `rank` is the label's 1-based position in the
// full candidate ranking (after pool and prefix exclusions); 0 means the
// label was not rankable at all.
struct RankingResult {
  std::string session_key;
  std::vector<int32_t> top_k;
  int32_t label = 0;
  int64_t rank = 0;
  std::vector<int32_t> prefix;
  bool cold = false;
};

inline double hit_rate(const std::vector<RankingResult>& results, int k) {
  if (results.empty()) throw DataError("hit_rate: no results");
  int64_t hits = 0;
  for (const auto& r : results)
    if (r.rank >= 1 && r.rank <= k) ++hits;
  return static_cast<double>(hits) / static_cast<double>(results.size());
}

// Single-relevant-item NDCG: 1/log2(rank+1) inside the top k, else 0; the
// ideal ranking scores 1, so no further normalization is needed.
inline double ndcg(const std::vector<RankingResult>& results, int k) {
  if (results.empty()) throw DataError("ndcg: no results");
  double total = 0.0;
  for (const auto& r : results)
    if (r.rank >= 1 && r.rank <= k)
      total += 1.0 / std::log2(static_cast<double>(r.rank) + 1.0);
  return total / static_cast<double>(results.size());
}

// Topic distance: 1 when the two articles belong to different topics.
inline double topic_distance(int32_t a, int32_t b, const std::vector<int32_t>& topics) {
  return topics[static_cast<size_t>(a)] != topics[static_cast<size_t>(b)] ? 1.0 : 0.0;
}

// Mean pairwise topic distance over ordered pairs of distinct positions.
// Undefined for fewer than two recommendations.
inline std::optional<double> ild(const std::vector<int32_t>& recommended,
                                 const std::vector<int32_t>& topics) {
  const size_t n = recommended.size();
  if (n < 2) return std::nullopt;
  double total = 0.0;
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j)
      if (i != j) total += topic_distance(recommended[i], recommended[j], topics);
  return total / (static_cast<double>(n) * static_cast<double>(n - 1));
}

// Mean topic distance between each recommended article and the session's
// clicked prefix.
inline double unexp(const std::vector<int32_t>& recommended, const std::vector<int32_t>& prefix,
                    const std::vector<int32_t>& topics) {
  if (recommended.empty() || prefix.empty()) throw DataError("unexp: empty inputs");
  double total = 0.0;
  for (int32_t a : recommended) {
    double inner = 0.0;
    for (int32_t b : prefix) inner += topic_distance(a, b, topics);
    total += inner / static_cast<double>(prefix.size());
  }
  return total / static_cast<double>(recommended.size());
}

// Distinct recommended articles across all results divided by distinct test
// labels. Reported raw; the ratio can exceed 1.
inline double coverage(const std::vector<RankingResult>& results) {
  if (results.empty()) throw DataError("coverage: no results");
  std::set<int32_t> recommended, labels;
  for (const auto& r : results) {
    recommended.insert(r.top_k.begin(), r.top_k.end());
    labels.insert(r.label);
  }
  return static_cast<double>(recommended.size()) / static_cast<double>(labels.size());
}

struct MetricValues {
  int64_t count = 0;
  double hr = 0.0;
  double ndcg = 0.0;
  std::optional<double> ild;
  std::optional<double> unexp;
  double cov = 0.0;
};

inline MetricValues compute_metrics(const std::vector<RankingResult>& results, int k,
                                    const std::vector<int32_t>& topics) {
  MetricValues m;
  m.count = static_cast<int64_t>(results.size());
  if (results.empty()) return m;
  m.hr = hit_rate(results, k);
  m.ndcg = sessrec::ndcg(results, k);
  double ild_total = 0.0, unexp_total = 0.0;
  int64_t ild_n = 0, unexp_n = 0;
  for (const auto& r : results) {
    if (auto d = ild(r.top_k, topics)) {
      ild_total += *d;
      ++ild_n;
    }
    if (!r.top_k.empty() && !r.prefix.empty()) {
      unexp_total += unexp(r.top_k, r.prefix, topics);
      ++unexp_n;
    }
  }
  if (ild_n > 0) m.ild = ild_total / static_cast<double>(ild_n);
  if (unexp_n > 0) m.unexp = unexp_total / static_cast<double>(unexp_n);
  m.cov = coverage(results);
  return m;
}

// Overall metrics plus the paper's two breakdowns: cold vs non-cold labels
// and prefix-length buckets 1, 2, 3, 4, 5+. Empty strata are absent, not
// zero.
struct MetricReport {
  int k = 20;
  MetricValues overall;
  std::optional<MetricValues> cold;
  std::optional<MetricValues> non_cold;
  std::map<std::string, MetricValues> by_prefix_len;
};

inline MetricReport stratified_report(const std::vector<RankingResult>& results, int k,
                                      const std::vector<int32_t>& topics) {
  MetricReport rep;
  rep.k = k;
  rep.overall = compute_metrics(results, k, topics);
  std::vector<RankingResult> cold, non_cold;
  std::map<std::string, std::vector<RankingResult>> by_len;
  for (const auto& r : results) {
    (r.cold ? cold : non_cold).push_back(r);
    const size_t len = r.prefix.size();
    const std::string bucket = len >= 5 ? "5+" : std::to_string(len);
    by_len[bucket].push_back(r);
  }
  if (!cold.empty()) rep.cold = compute_metrics(cold, k, topics);
  if (!non_cold.empty()) rep.non_cold = compute_metrics(non_cold, k, topics);
  for (const auto& [bucket, rs] : by_len) rep.by_prefix_len[bucket] = compute_metrics(rs, k, topics);
  return rep;
}

}  // namespace sessrec
