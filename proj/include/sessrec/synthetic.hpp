#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "sessrec/data.hpp"
#include "sessrec/rng.hpp"

namespace sessrec {

// Desk-scale stand-in for the large news logs. Each scenario plants one
// learnable preference pattern so the corresponding model component has
// signal to pick up:
//   kTopic      - sessions stick to a topic; next click is topic-predictable.
//   kStartTime  - clicks are fresh (published shortly before the session
//                 start) and the preferred topic depends on the start hour.
//   kDwell      - sessions mix a loved topic (long dwell) with distractor
//                 clicks (short dwell); the next click follows the loved one.
//   kImpression - clicks walk publish-order neighborhoods; only "clickable"
//                 articles are ever clicked, the rest of the neighborhood
//                 fills the impression list as true negatives.
//   kHour       - clicked articles are published near the session's hour of
//                 day; exercises the hour rows of the time table.
enum class SynthScenario { kTopic, kStartTime, kDwell, kImpression, kHour };

inline const char* scenario_name(SynthScenario s) {
  switch (s) {
    case SynthScenario::kTopic: return "topic";
    case SynthScenario::kStartTime: return "start_time";
    case SynthScenario::kDwell: return "dwell";
    case SynthScenario::kImpression: return "impression";
    case SynthScenario::kHour: return "hour";
  }
  return "?";
}

inline SynthScenario scenario_from_name(const std::string& name) {
  if (name == "topic") return SynthScenario::kTopic;
  if (name == "start_time") return SynthScenario::kStartTime;
  if (name == "dwell") return SynthScenario::kDwell;
  if (name == "impression") return SynthScenario::kImpression;
  if (name == "hour") return SynthScenario::kHour;
  throw ConfigError("unknown synthetic scenario: " + name);
}

struct SynthConfig {
  SynthScenario scenario = SynthScenario::kTopic;
  int64_t n_articles = 2000;
  int n_topics = 10;
  int64_t n_sessions = 50000;
  int days = 15;            // articles publish over [0, days)
  int lead_days = 1;        // sessions start no earlier than this day
  int64_t content_dim = 24;
  double content_noise = 0.45;
  double topic_affinity = 0.9;
  double continuation_prob = 0.41;  // mean session length 2 + p/(1-p) = 2.69
  int max_session_len = 8;
  int64_t fresh_window_secs = 12 * 3600;   // kStartTime label pool
  int adjacency_halfwidth = 40;            // kImpression publish-order walk
  double clickable_fraction = 0.5;         // kImpression
  int impressions_per_click = 15;
  bool multi_session_users = false;  // several sessions per user key
  int64_t base_epoch = 1551398400;   // 2019-03-01 00:00:00 UTC
  uint64_t seed = 1;
};

struct SynthOutput {
  std::vector<ClickEvent> clicks;  // sorted by timestamp
  ArticleCatalog catalog;
  std::map<std::string, std::vector<std::pair<int64_t, bool>>> impressions;  // by session key
  // Ground-truth session boundaries: (user key, click timestamps), in
  // generation order. Lets tests verify sessionization recovers the plant.
  std::vector<std::pair<std::string, std::vector<int64_t>>> planted_sessions;
};

namespace synth_detail {

inline std::vector<double> unit_vector(Rng& rng, int64_t dim) {
  std::vector<double> v(static_cast<size_t>(dim));
  double norm2 = 0.0;
  for (auto& x : v) {
    x = rng.gaussian();
    norm2 += x * x;
  }
  const double inv = 1.0 / std::sqrt(norm2 > 0 ? norm2 : 1.0);
  for (auto& x : v) x *= inv;
  return v;
}

// Articles published at or before `ts`, as indices into a publish-sorted id
// list. Returns the count of eligible entries (prefix of the sorted list).
inline size_t eligible_prefix(const std::vector<std::pair<int64_t, int32_t>>& sorted_pub,
                              int64_t ts) {
  size_t lo = 0, hi = sorted_pub.size();
  while (lo < hi) {
    const size_t mid = (lo + hi) / 2;
    if (sorted_pub[mid].first <= ts)
      lo = mid + 1;
    else
      hi = mid;
  }
  return lo;
}

}  // namespace synth_detail

inline SynthOutput generate_synthetic(const SynthConfig& cfg) {
  if (cfg.n_articles <= 0 || cfg.n_topics <= 0 || cfg.n_sessions <= 0)
    throw ConfigError("generate_synthetic: articles, topics and sessions must be positive");
  if (cfg.days <= cfg.lead_days)
    throw ConfigError("generate_synthetic: days must exceed lead_days");

  SynthOutput out;
  Rng art_rng(derive_seed(cfg.seed, "synth.articles"));

  // Topic centroids, then articles with noisy centroid content.
  std::vector<std::vector<double>> centroids;
  for (int t = 0; t < cfg.n_topics; ++t)
    centroids.push_back(synth_detail::unit_vector(art_rng, cfg.content_dim));

  out.catalog.content_dim = cfg.content_dim;
  std::vector<bool> clickable(static_cast<size_t>(cfg.n_articles), true);
  const int64_t publish_span = static_cast<int64_t>(cfg.days) * 86400;
  for (int64_t i = 0; i < cfg.n_articles; ++i) {
    Article a;
    a.original_id = i + 1;
    a.topic = static_cast<int32_t>(art_rng.uniform(static_cast<uint64_t>(cfg.n_topics)));
    a.publish_ts = cfg.base_epoch + art_rng.uniform_int(0, publish_span - 1);
    a.content = centroids[static_cast<size_t>(a.topic)];
    double norm2 = 0.0;
    for (auto& x : a.content) {
      x += cfg.content_noise * art_rng.gaussian();
      norm2 += x * x;
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& x : a.content) x *= inv;
    if (cfg.scenario == SynthScenario::kImpression)
      clickable[static_cast<size_t>(i)] = art_rng.uniform_real() < cfg.clickable_fraction;
    out.catalog.dense_by_original[a.original_id] = static_cast<int32_t>(i);
    out.catalog.articles.push_back(std::move(a));
  }

  // Publish-sorted view and per-topic publish-sorted views.
  std::vector<std::pair<int64_t, int32_t>> sorted_pub;
  for (int64_t i = 0; i < cfg.n_articles; ++i)
    sorted_pub.push_back({out.catalog.articles[static_cast<size_t>(i)].publish_ts,
                          static_cast<int32_t>(i)});
  std::sort(sorted_pub.begin(), sorted_pub.end());
  std::vector<int32_t> pub_pos(static_cast<size_t>(cfg.n_articles));
  for (size_t p = 0; p < sorted_pub.size(); ++p)
    pub_pos[static_cast<size_t>(sorted_pub[p].second)] = static_cast<int32_t>(p);
  std::vector<std::vector<std::pair<int64_t, int32_t>>> topic_pub(
      static_cast<size_t>(cfg.n_topics));
  for (const auto& [ts, id] : sorted_pub)
    topic_pub[static_cast<size_t>(out.catalog.articles[static_cast<size_t>(id)].topic)].push_back(
        {ts, id});

  Rng rng(derive_seed(cfg.seed, "synth.sessions"));

  auto pick_from_prefix = [&](const std::vector<std::pair<int64_t, int32_t>>& pool, int64_t ts,
                              const std::set<int32_t>& used) -> int32_t {
    const size_t n = synth_detail::eligible_prefix(pool, ts);
    if (n == 0) return -1;
    for (int attempt = 0; attempt < 24; ++attempt) {
      const int32_t id = pool[rng.uniform(n)].second;
      if (!used.count(id)) return id;
    }
    return -1;
  };

  // Articles published in [ts - window, ts] of a given topic.
  auto pick_fresh_topic = [&](int topic, int64_t ts, int64_t window,
                              const std::set<int32_t>& used) -> int32_t {
    const auto& pool = topic_pub[static_cast<size_t>(topic)];
    const size_t hi = synth_detail::eligible_prefix(pool, ts);
    const size_t lo = synth_detail::eligible_prefix(pool, ts - window);
    if (hi <= lo) return -1;
    for (int attempt = 0; attempt < 24; ++attempt) {
      const int32_t id = pool[lo + rng.uniform(hi - lo)].second;
      if (!used.count(id)) return id;
    }
    return -1;
  };

  auto pick_neighbor = [&](int32_t around, int64_t ts, bool need_clickable,
                           const std::set<int32_t>& used) -> int32_t {
    int half = cfg.adjacency_halfwidth;
    for (int widen = 0; widen < 4; ++widen, half *= 2) {
      const int64_t center = pub_pos[static_cast<size_t>(around)];
      const int64_t lo = std::max<int64_t>(0, center - half);
      const int64_t hi = std::min<int64_t>(cfg.n_articles - 1, center + half);
      for (int attempt = 0; attempt < 32; ++attempt) {
        const int32_t id = sorted_pub[static_cast<size_t>(rng.uniform_int(lo, hi))].second;
        if (id == around || used.count(id)) continue;
        if (out.catalog.articles[static_cast<size_t>(id)].publish_ts > ts) continue;
        if (need_clickable && !clickable[static_cast<size_t>(id)]) continue;
        return id;
      }
    }
    return -1;
  };

  const int64_t session_day_lo = cfg.lead_days;
  const int64_t session_day_hi = cfg.days - 1;
  std::string user_key;
  int64_t user_counter = 0;
  int ordinal = 0;
  int64_t next_multi_start = 0;
  int sessions_left_for_user = 0;

  for (int64_t s = 0; s < cfg.n_sessions; ++s) {
    // Session start.
    int64_t start;
    if (cfg.multi_session_users && sessions_left_for_user > 0) {
      start = next_multi_start + rng.uniform_int(kSessionGapSeconds, kSessionGapSeconds + 86400);
    } else {
      const int64_t day = rng.uniform_int(session_day_lo, session_day_hi);
      start = cfg.base_epoch + day * 86400 + rng.uniform_int(0, 86399);
      user_key = "u" + std::to_string(1000000 + user_counter++);
      ordinal = 0;
      sessions_left_for_user =
          cfg.multi_session_users ? static_cast<int>(1 + rng.uniform(3)) : 1;
    }
    --sessions_left_for_user;

    // Session length: 2 + truncated geometric.
    int len = 2;
    while (len < cfg.max_session_len && rng.bernoulli(cfg.continuation_prob)) ++len;

    // Scenario-specific latent state.
    const int hour = civil_from_epoch(start).hour;
    int topic = static_cast<int>(rng.uniform(static_cast<uint64_t>(cfg.n_topics)));
    if (cfg.scenario == SynthScenario::kStartTime && rng.uniform_real() < 0.9)
      topic = (hour * cfg.n_topics) / 24;
    int distractor =
        cfg.n_topics > 1
            ? (topic + 1 +
               static_cast<int>(rng.uniform(static_cast<uint64_t>(cfg.n_topics - 1)))) %
                  cfg.n_topics
            : topic;
    // kDwell: which positions are loved-topic clicks. The label (last click)
    // is always loved; at least one loved click must appear in the prefix so
    // every instance has recoverable signal, and the pattern is resampled
    // rather than pinned to a position to avoid a positional shortcut.
    std::vector<bool> loved(static_cast<size_t>(len), true);
    if (cfg.scenario == SynthScenario::kDwell) {
      bool any;
      do {
        any = false;
        for (int i = 0; i + 1 < len; ++i) {
          loved[static_cast<size_t>(i)] = rng.bernoulli(0.5);
          any = any || loved[static_cast<size_t>(i)];
        }
      } while (!any);
    }

    std::set<int32_t> used;
    std::vector<SessionClick> clicks;
    int64_t ts = start;
    for (int i = 0; i < len; ++i) {
      int32_t id = -1;
      switch (cfg.scenario) {
        case SynthScenario::kTopic: {
          if (rng.uniform_real() < cfg.topic_affinity)
            id = pick_from_prefix(topic_pub[static_cast<size_t>(topic)], start, used);
          else
            id = pick_from_prefix(sorted_pub, start, used);
          break;
        }
        case SynthScenario::kStartTime: {
          id = pick_fresh_topic(topic, start, cfg.fresh_window_secs, used);
          if (id < 0) id = pick_from_prefix(topic_pub[static_cast<size_t>(topic)], start, used);
          break;
        }
        case SynthScenario::kDwell: {
          const int t = loved[static_cast<size_t>(i)] ? topic : distractor;
          id = pick_from_prefix(topic_pub[static_cast<size_t>(t)], start, used);
          break;
        }
        case SynthScenario::kImpression: {
          if (clicks.empty()) {
            for (int attempt = 0; attempt < 64 && id < 0; ++attempt) {
              const size_t n = synth_detail::eligible_prefix(sorted_pub, start);
              if (n == 0) break;
              const int32_t c = sorted_pub[rng.uniform(n)].second;
              if (clickable[static_cast<size_t>(c)] && !used.count(c)) id = c;
            }
          } else {
            id = pick_neighbor(clicks.back().article, start, true, used);
          }
          break;
        }
        case SynthScenario::kHour: {
          // Published within +-1 hour of the session hour, any eligible day.
          for (int attempt = 0; attempt < 64 && id < 0; ++attempt) {
            const size_t n = synth_detail::eligible_prefix(sorted_pub, start);
            if (n == 0) break;
            const int32_t c = sorted_pub[rng.uniform(n)].second;
            const int ph =
                civil_from_epoch(out.catalog.articles[static_cast<size_t>(c)].publish_ts).hour;
            const int dist = std::min((ph - hour + 24) % 24, (hour - ph + 24) % 24);
            if (dist <= 1 && !used.count(c)) id = c;
          }
          break;
        }
      }
      if (id < 0) id = pick_from_prefix(sorted_pub, start, used);  // global fallback
      if (id < 0) break;
      used.insert(id);

      int64_t dwell = rng.uniform_int(20, 600);
      if (cfg.scenario == SynthScenario::kDwell)
        dwell = loved[static_cast<size_t>(i)] ? rng.uniform_int(120, 900)
                                              : rng.uniform_int(2, 10);
      clicks.push_back({id, ts, kMissingActiveTime});
      ts += dwell;
    }
    next_multi_start = ts;
    if (clicks.size() < 2) continue;

    const std::string session_key = user_key + "#" + std::to_string(ordinal++);
    std::vector<int64_t> planted_ts;
    for (const auto& c : clicks) {
      out.clicks.push_back({user_key, out.catalog.articles[static_cast<size_t>(c.article)].original_id,
                            c.ts, kMissingActiveTime});
      planted_ts.push_back(c.ts);
    }
    out.planted_sessions.push_back({user_key, std::move(planted_ts)});

    // Ground-truth impression list: publish-order neighbors of each click.
    std::set<int32_t> imp;
    for (const auto& c : clicks) {
      const int64_t center = pub_pos[static_cast<size_t>(c.article)];
      for (int k = 0; k < cfg.impressions_per_click; ++k) {
        const int64_t lo = std::max<int64_t>(0, center - cfg.adjacency_halfwidth);
        const int64_t hi = std::min<int64_t>(cfg.n_articles - 1, center + cfg.adjacency_halfwidth);
        imp.insert(sorted_pub[static_cast<size_t>(rng.uniform_int(lo, hi))].second);
      }
      imp.insert(c.article);
    }
    auto& imp_out = out.impressions[session_key];
    for (int32_t id : imp)
      imp_out.push_back({out.catalog.articles[static_cast<size_t>(id)].original_id,
                         used.count(id) > 0});
  }

  std::stable_sort(out.clicks.begin(), out.clicks.end(),
                   [](const ClickEvent& a, const ClickEvent& b) { return a.ts < b.ts; });
  return out;
}

inline void write_clicks_file(const std::string& path, const std::vector<ClickEvent>& clicks) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write clicks file: " + path);
  for (const auto& c : clicks) {
    os << c.user_key << '\t' << c.article_id << '\t' << c.ts;
    if (c.active_time != kMissingActiveTime) os << '\t' << c.active_time;
    os << '\n';
  }
}

inline void write_catalog_file(const std::string& path, const ArticleCatalog& catalog) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write catalog file: " + path);
  char buf[32];
  for (const auto& a : catalog.articles) {
    os << a.original_id << '\t' << a.publish_ts << '\t' << a.topic << '\t';
    for (size_t i = 0; i < a.content.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", a.content[i]);
      if (i) os << ',';
      os << buf;
    }
    os << '\n';
  }
}

inline void write_impressions_file(
    const std::string& path,
    const std::map<std::string, std::vector<std::pair<int64_t, bool>>>& impressions) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write impressions file: " + path);
  for (const auto& [key, items] : impressions) {
    os << key << '\t';
    for (size_t i = 0; i < items.size(); ++i) {
      if (i) os << ',';
      os << items[i].first << ':' << (items[i].second ? 1 : 0);
    }
    os << '\n';
  }
}

}  // namespace sessrec
