#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "sessrec/data.hpp"
#include "sessrec/rng.hpp"

namespace sessrec {

enum class SamplingStrategy { kWindow, kRandom };

inline const char* strategy_name(SamplingStrategy s) {
  return s == SamplingStrategy::kWindow ? "window" : "random";
}

inline SamplingStrategy strategy_from_name(const std::string& name) {
  if (name == "window") return SamplingStrategy::kWindow;
  if (name == "random") return SamplingStrategy::kRandom;
  throw ConfigError("unknown sampling strategy: " + name);
}

// Catalog sorted by publishing time, ties broken by article id ascending.
struct PublishIndex {
  std::vector<int32_t> order;    // position -> dense article id
  std::vector<int32_t> position; // dense article id -> position

  explicit PublishIndex(const ArticleCatalog& catalog) {
    const int64_t n = catalog.size();
    order.resize(static_cast<size_t>(n));
    position.resize(static_cast<size_t>(n));
    for (int32_t i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](int32_t a, int32_t b) {
      const int64_t pa = catalog.articles[static_cast<size_t>(a)].publish_ts;
      const int64_t pb = catalog.articles[static_cast<size_t>(b)].publish_ts;
      return pa != pb ? pa < pb : a < b;
    });
    for (size_t p = 0; p < order.size(); ++p)
      position[static_cast<size_t>(order[p])] = static_cast<int32_t>(p);
  }
};

struct NegativeSet {
  std::string session_key;
  std::vector<int32_t> ids;
  SamplingStrategy strategy = SamplingStrategy::kWindow;
};

// Approximate impression list: for each clicked article take the window/2
// nearest neighbors on each side in publish order (the window is the total
// count per click, truncated at the catalog ends), then drop everything the
// user actually clicked plus the label.
inline std::vector<int32_t> reconstruct_impressions(const std::vector<int32_t>& clicked,
                                                    int32_t label, const PublishIndex& index,
                                                    int window) {
  if (window <= 0) throw ConfigError("reconstruct_impressions: window must be positive");
  const int64_t n = static_cast<int64_t>(index.order.size());
  std::set<int32_t> pool;
  const int64_t half = window / 2;
  for (int32_t c : clicked) {
    const int64_t p = index.position[static_cast<size_t>(c)];
    const int64_t lo = std::max<int64_t>(0, p - half);
    const int64_t hi = std::min<int64_t>(n - 1, p + half);
    for (int64_t q = lo; q <= hi; ++q) pool.insert(index.order[static_cast<size_t>(q)]);
  }
  for (int32_t c : clicked) pool.erase(c);
  pool.erase(label);
  return {pool.begin(), pool.end()};
}

// Uniform sample without replacement; when the pool is short the remainder is
// topped up uniformly from the whole catalog, still avoiding clicked articles,
// the label, and duplicates.
inline NegativeSet sample_negatives(const std::vector<int32_t>& pool, int size,
                                    int64_t catalog_size, const std::vector<int32_t>& clicked,
                                    int32_t label, Rng& rng) {
  NegativeSet out;
  const std::set<int32_t> clicked_set(clicked.begin(), clicked.end());
  if (catalog_size - static_cast<int64_t>(clicked_set.size()) - 1 <
      static_cast<int64_t>(size))
    throw DataError("sample_negatives: catalog too small for " + std::to_string(size) +
                    " negatives");
  std::vector<int32_t> shuffled = pool;
  for (size_t i = 0; i < shuffled.size() && out.ids.size() < static_cast<size_t>(size); ++i) {
    const size_t j = i + static_cast<size_t>(rng.uniform(shuffled.size() - i));
    std::swap(shuffled[i], shuffled[j]);
    out.ids.push_back(shuffled[i]);
  }
  std::set<int32_t> taken(out.ids.begin(), out.ids.end());
  while (out.ids.size() < static_cast<size_t>(size)) {
    const int32_t id = static_cast<int32_t>(rng.uniform(static_cast<uint64_t>(catalog_size)));
    if (id == label || clicked_set.count(id) || taken.count(id)) continue;
    taken.insert(id);
    out.ids.push_back(id);
  }
  return out;
}

inline NegativeSet sample_random_negatives(int size, int64_t catalog_size,
                                           const std::vector<int32_t>& clicked, int32_t label,
                                           Rng& rng) {
  NegativeSet out = sample_negatives({}, size, catalog_size, clicked, label, rng);
  out.strategy = SamplingStrategy::kRandom;
  return out;
}

inline double jaccard(const std::vector<int32_t>& a, const std::set<int32_t>& b) {
  int64_t inter = 0;
  for (int32_t x : a) inter += b.count(x);
  const int64_t uni = static_cast<int64_t>(a.size()) + static_cast<int64_t>(b.size()) - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

// Mean Jaccard similarity between sampled negative sets and the ground-truth
// impression lists, over the sessions that have impressions.
inline double jaccard_eval(const std::vector<NegativeSet>& negatives,
                           const std::vector<const Session*>& sessions) {
  if (negatives.size() != sessions.size())
    throw ConfigError("jaccard_eval: negatives and sessions must align");
  double total = 0.0;
  int64_t counted = 0;
  for (size_t i = 0; i < negatives.size(); ++i) {
    if (sessions[i]->impressions.empty()) continue;
    const std::set<int32_t> imp(sessions[i]->impressions.begin(),
                                sessions[i]->impressions.end());
    total += jaccard(negatives[i].ids, imp);
    ++counted;
  }
  if (counted == 0) throw DataError("jaccard_eval: no sessions carry impressions");
  return total / static_cast<double>(counted);
}

}  // namespace sessrec
