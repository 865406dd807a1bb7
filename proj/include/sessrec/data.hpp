#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sessrec/common.hpp"
#include "sessrec/temporal.hpp"

namespace sessrec {

constexpr int64_t kMissingActiveTime = -1;
constexpr int64_t kSessionGapSeconds = 1800;  // 30-minute rule

struct ClickEvent {
  std::string user_key;
  int64_t article_id = 0;  // original id as logged
  int64_t ts = 0;          // epoch seconds UTC
  int64_t active_time = kMissingActiveTime;
};

struct Article {
  int64_t original_id = 0;
  int64_t publish_ts = 0;
  int32_t topic = 0;
  std::vector<double> content;
};

// Catalog with dense ids (= vector index). Dense re-indexing happens at parse
// time; the dense->original mapping is written next to the artifacts.
struct ArticleCatalog {
  int64_t content_dim = 0;
  std::vector<Article> articles;
  std::map<int64_t, int32_t> dense_by_original;

  int64_t size() const { return static_cast<int64_t>(articles.size()); }

  int32_t dense_id(int64_t original) const {
    auto it = dense_by_original.find(original);
    return it == dense_by_original.end() ? -1 : it->second;
  }
};

struct SessionClick {
  int32_t article = 0;  // dense id
  int64_t ts = 0;
  int64_t active_time = kMissingActiveTime;
};

struct Session {
  std::string key;  // user_key '#' per-user ordinal
  int64_t start_ts = 0;
  std::vector<SessionClick> clicks;
  std::vector<int32_t> impressions;  // dense ids incl. clicked, when provided
};

// A mini-session: the first prefix_len clicks of a session predict the next.
struct Instance {
  int32_t session = 0;
  int32_t prefix_len = 0;
  int32_t label = 0;
};

struct ParseReport {
  int64_t total_lines = 0;
  int64_t bad_lines = 0;
  int64_t missing_article_clicks = 0;
  int64_t out_of_window = 0;
  std::vector<int64_t> bad_line_numbers;  // first few, for the error report

  void note_bad(int64_t line_no) {
    ++bad_lines;
    if (bad_line_numbers.size() < 20) bad_line_numbers.push_back(line_no);
  }

  std::string summary() const {
    std::ostringstream os;
    os << total_lines << " lines, " << bad_lines << " unparseable, " << missing_article_clicks
       << " clicks on unknown articles, " << out_of_window << " outside timestamp window";
    if (!bad_line_numbers.empty()) {
      os << "; first bad lines:";
      for (int64_t n : bad_line_numbers) os << ' ' << n;
    }
    return os.str();
  }
};

namespace parse_detail {

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    const size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

template <typename T>
bool to_num(std::string_view s, T& out) {
  const char* b = s.data();
  const char* e = s.data() + s.size();
  auto [p, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && p == e;
}

}  // namespace parse_detail

// Clicks file: user_key <TAB> article_id <TAB> epoch_seconds [<TAB> active_seconds]
inline std::vector<ClickEvent> parse_clicks(std::istream& is, ParseReport& report) {
  std::vector<ClickEvent> events;
  std::string line;
  int64_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    ++report.total_lines;
    if (line.empty() || line[0] == '#') continue;
    const auto f = parse_detail::split(line, '\t');
    ClickEvent ev;
    if (f.size() < 3 || f.size() > 4) {
      report.note_bad(line_no);
      continue;
    }
    ev.user_key = std::string(f[0]);
    if (ev.user_key.empty() || !parse_detail::to_num(f[1], ev.article_id) ||
        !parse_detail::to_num(f[2], ev.ts) || ev.ts <= 0) {
      report.note_bad(line_no);
      continue;
    }
    if (f.size() == 4 && !f[3].empty()) {
      if (!parse_detail::to_num(f[3], ev.active_time) || ev.active_time <= 0) {
        report.note_bad(line_no);
        continue;
      }
    }
    events.push_back(std::move(ev));
  }
  return events;
}

inline std::vector<ClickEvent> parse_clicks_file(const std::string& path, ParseReport& report) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open clicks file: " + path);
  return parse_clicks(is, report);
}

// Catalog file: article_id <TAB> publish_ts <TAB> topic_id <TAB> v1,v2,...,v_dc
inline ArticleCatalog parse_catalog(std::istream& is, ParseReport& report) {
  ArticleCatalog cat;
  std::string line;
  int64_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    ++report.total_lines;
    if (line.empty() || line[0] == '#') continue;
    const auto f = parse_detail::split(line, '\t');
    Article a;
    if (f.size() != 4 || !parse_detail::to_num(f[0], a.original_id) ||
        !parse_detail::to_num(f[1], a.publish_ts) || a.publish_ts <= 0 ||
        !parse_detail::to_num(f[2], a.topic)) {
      report.note_bad(line_no);
      continue;
    }
    bool ok = true;
    for (const auto v : parse_detail::split(f[3], ',')) {
      double x;
      if (!parse_detail::to_num(v, x)) {
        ok = false;
        break;
      }
      a.content.push_back(x);
    }
    if (!ok || a.content.empty()) {
      report.note_bad(line_no);
      continue;
    }
    if (cat.content_dim == 0) cat.content_dim = static_cast<int64_t>(a.content.size());
    if (static_cast<int64_t>(a.content.size()) != cat.content_dim)
      throw DataError("catalog line " + std::to_string(line_no) + ": content vector has " +
                      std::to_string(a.content.size()) + " values, expected " +
                      std::to_string(cat.content_dim));
    if (cat.dense_by_original.count(a.original_id))
      throw DataError("catalog line " + std::to_string(line_no) + ": duplicate article id " +
                      std::to_string(a.original_id));
    cat.dense_by_original[a.original_id] = static_cast<int32_t>(cat.articles.size());
    cat.articles.push_back(std::move(a));
  }
  if (cat.articles.empty()) throw DataError("catalog is empty");
  return cat;
}

inline ArticleCatalog parse_catalog_file(const std::string& path, ParseReport& report) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open catalog file: " + path);
  return parse_catalog(is, report);
}

// Impressions file: session_key <TAB> article_id:clicked_flag,article_id:flag,...
inline std::map<std::string, std::vector<std::pair<int64_t, bool>>> parse_impressions(
    std::istream& is, ParseReport& report) {
  std::map<std::string, std::vector<std::pair<int64_t, bool>>> out;
  std::string line;
  int64_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    ++report.total_lines;
    if (line.empty() || line[0] == '#') continue;
    const auto f = parse_detail::split(line, '\t');
    if (f.size() != 2) {
      report.note_bad(line_no);
      continue;
    }
    std::vector<std::pair<int64_t, bool>> items;
    bool ok = true;
    for (const auto part : parse_detail::split(f[1], ',')) {
      const auto kv = parse_detail::split(part, ':');
      int64_t id;
      int flag;
      if (kv.size() != 2 || !parse_detail::to_num(kv[0], id) ||
          !parse_detail::to_num(kv[1], flag)) {
        ok = false;
        break;
      }
      items.emplace_back(id, flag != 0);
    }
    if (!ok) {
      report.note_bad(line_no);
      continue;
    }
    out[std::string(f[0])] = std::move(items);
  }
  return out;
}

struct SessionizeOptions {
  int64_t gap_seconds = kSessionGapSeconds;
  int64_t min_ts = 1;
  int64_t max_ts = 4102444800;  // year 2100
};

// Groups clicks by anonymous user key, sorts by timestamp, starts a new
// session whenever the inter-click gap reaches the 30-minute threshold, and
// discards singleton sessions. Clicks on articles missing from the catalog
// are dropped and counted: the model needs their content vectors.
inline std::vector<Session> sessionize(const std::vector<ClickEvent>& events,
                                       const ArticleCatalog& catalog, ParseReport& report,
                                       const SessionizeOptions& opts = {}) {
  std::map<std::string, std::vector<std::pair<int64_t, SessionClick>>> by_user;
  for (const auto& ev : events) {
    if (ev.ts < opts.min_ts || ev.ts > opts.max_ts) {
      ++report.out_of_window;
      continue;
    }
    const int32_t dense = catalog.dense_id(ev.article_id);
    if (dense < 0) {
      ++report.missing_article_clicks;
      continue;
    }
    by_user[ev.user_key].push_back({ev.ts, SessionClick{dense, ev.ts, ev.active_time}});
  }
  std::vector<Session> sessions;
  for (auto& [user, clicks] : by_user) {
    std::stable_sort(clicks.begin(), clicks.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<SessionClick> current;
    int ordinal = 0;
    auto flush = [&]() {
      if (current.size() >= 2) {
        Session s;
        s.key = user + "#" + std::to_string(ordinal++);
        s.start_ts = current.front().ts;
        s.clicks = std::move(current);
        sessions.push_back(std::move(s));
      } else if (!current.empty()) {
        ++ordinal;  // singleton discarded but keeps its ordinal slot
      }
      current.clear();
    };
    for (const auto& [ts, click] : clicks) {
      if (!current.empty() && ts - current.back().ts >= opts.gap_seconds) flush();
      current.push_back(click);
    }
    flush();
  }
  std::stable_sort(sessions.begin(), sessions.end(), [](const Session& a, const Session& b) {
    return a.start_ts != b.start_ts ? a.start_ts < b.start_ts : a.key < b.key;
  });
  return sessions;
}

inline void attach_impressions(
    std::vector<Session>& sessions,
    const std::map<std::string, std::vector<std::pair<int64_t, bool>>>& impressions,
    const ArticleCatalog& catalog) {
  for (auto& s : sessions) {
    auto it = impressions.find(s.key);
    if (it == impressions.end()) continue;
    for (const auto& [orig, clicked] : it->second) {
      const int32_t dense = catalog.dense_id(orig);
      if (dense >= 0) s.impressions.push_back(dense);
    }
  }
}

// Fills gaps: a click without an explicit active time gets the interval to
// the next click; the final click keeps the unknown sentinel.
inline void estimate_active_time(Session& session) {
  for (size_t i = 0; i + 1 < session.clicks.size(); ++i) {
    if (session.clicks[i].active_time == kMissingActiveTime)
      session.clicks[i].active_time = session.clicks[i + 1].ts - session.clicks[i].ts;
  }
}

inline void estimate_active_times(std::vector<Session>& sessions) {
  for (auto& s : sessions) estimate_active_time(s);
}

// n-click session -> n-1 mini-sessions (prefix of k clicks, label = click k+1).
inline std::vector<Instance> augment(const std::vector<Session>& sessions) {
  std::vector<Instance> out;
  for (size_t si = 0; si < sessions.size(); ++si) {
    const auto& clicks = sessions[si].clicks;
    for (size_t k = 1; k < clicks.size(); ++k)
      out.push_back({static_cast<int32_t>(si), static_cast<int32_t>(k), clicks[k].article});
  }
  return out;
}

struct Fold {
  std::vector<Instance> train;
  std::vector<Instance> valid;  // last 10% of train, time-sorted
  std::vector<Instance> test;
};

struct FoldSplit {
  int train_days = 0;
  int test_days = 0;
  std::vector<Fold> folds;
};

// Chronological folding over UTC days of the session start: consecutive
// windows of train_days + test_days; a fold is kept only when both halves
// are populated. Instances follow their session, so a session never
// straddles the train/test boundary.
inline FoldSplit split_folds(const std::vector<Session>& sessions,
                             const std::vector<Instance>& instances, int train_days,
                             int test_days) {
  if (train_days <= 0 || test_days <= 0)
    throw ConfigError("split_folds: train_days and test_days must be positive");
  if (instances.empty()) throw DataError("split_folds: no instances");
  int64_t min_day = INT64_MAX, max_day = INT64_MIN;
  for (const auto& inst : instances) {
    const int64_t day = sessions[inst.session].start_ts / 86400;
    min_day = std::min(min_day, day);
    max_day = std::max(max_day, day);
  }
  const int64_t span = max_day - min_day + 1;
  const int64_t window = train_days + test_days;
  if (span < window)
    throw DataError("split_folds: need " + std::to_string(window) + " days of data, have " +
                    std::to_string(span));
  FoldSplit out;
  out.train_days = train_days;
  out.test_days = test_days;
  out.folds.resize(static_cast<size_t>(span / window));
  for (const auto& inst : instances) {
    const int64_t day = sessions[inst.session].start_ts / 86400 - min_day;
    const size_t fold = static_cast<size_t>(day / window);
    if (fold >= out.folds.size()) continue;  // trailing partial window
    if (day % window < train_days)
      out.folds[fold].train.push_back(inst);
    else
      out.folds[fold].test.push_back(inst);
  }
  auto by_time = [&](const Instance& a, const Instance& b) {
    const int64_t ta = sessions[a.session].start_ts, tb = sessions[b.session].start_ts;
    if (ta != tb) return ta < tb;
    if (a.session != b.session) return a.session < b.session;
    return a.prefix_len < b.prefix_len;
  };
  std::vector<Fold> kept;
  for (auto& fold : out.folds) {
    if (fold.train.empty() || fold.test.empty()) continue;
    std::sort(fold.train.begin(), fold.train.end(), by_time);
    std::sort(fold.test.begin(), fold.test.end(), by_time);
    const size_t val_count = fold.train.size() / 10;
    fold.valid.assign(fold.train.end() - static_cast<ptrdiff_t>(val_count), fold.train.end());
    fold.train.resize(fold.train.size() - val_count);
    kept.push_back(std::move(fold));
  }
  if (kept.empty())
    throw DataError("split_folds: no fold has both train and test data in a " +
                    std::to_string(train_days) + "+" + std::to_string(test_days) + " day window");
  out.folds = std::move(kept);
  return out;
}

// Articles clicked anywhere in the training instances (prefix or label);
// everything else is cold at test time.
inline std::set<int32_t> training_article_set(const std::vector<Session>& sessions,
                                              const std::vector<Instance>& train) {
  std::set<int32_t> seen;
  for (const auto& inst : train) {
    const auto& clicks = sessions[inst.session].clicks;
    for (int32_t k = 0; k < inst.prefix_len; ++k) seen.insert(clicks[k].article);
    seen.insert(inst.label);
  }
  return seen;
}

// Training click counts drive the popularity baseline.
inline std::vector<int64_t> training_click_counts(const std::vector<Session>& sessions,
                                                  const std::vector<Instance>& train,
                                                  int64_t n_articles) {
  std::vector<int64_t> counts(static_cast<size_t>(n_articles), 0);
  for (const auto& inst : train) {
    const auto& clicks = sessions[inst.session].clicks;
    for (int32_t k = 0; k < inst.prefix_len; ++k) ++counts[static_cast<size_t>(clicks[k].article)];
    ++counts[static_cast<size_t>(inst.label)];
  }
  return counts;
}

struct DatasetStats {
  int64_t sessions = 0;
  int64_t articles = 0;
  int64_t topics = 0;
  int64_t clicks = 0;
  double clicks_per_session = 0.0;
  double clicks_per_article = 0.0;
};

inline DatasetStats dataset_stats(const std::vector<Session>& sessions,
                                  const ArticleCatalog& catalog) {
  DatasetStats st;
  st.sessions = static_cast<int64_t>(sessions.size());
  st.articles = catalog.size();
  std::set<int32_t> topics;
  for (const auto& a : catalog.articles) topics.insert(a.topic);
  st.topics = static_cast<int64_t>(topics.size());
  for (const auto& s : sessions) st.clicks += static_cast<int64_t>(s.clicks.size());
  if (st.sessions > 0)
    st.clicks_per_session = static_cast<double>(st.clicks) / static_cast<double>(st.sessions);
  if (st.articles > 0)
    st.clicks_per_article = static_cast<double>(st.clicks) / static_cast<double>(st.articles);
  return st;
}

}  // namespace sessrec
