#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <vector>

#include "sessrec/metrics.hpp"
#include "sessrec/model.hpp"

namespace sessrec {

// Scores test instances against the full candidate pool. The pool for a
// session is every article published up to its start plus every article seen
// in training; articles already clicked in the prefix are excluded from the
// ranking. Ties break by article id ascending so rankings are reproducible.
class Ranker {
 public:
  Ranker(ModelParams& params, const DatasetTensors& dt, const ArticleCatalog& catalog,
         const std::set<int32_t>& train_articles, const Tensor& pe)
      : params_(params), dt_(dt), catalog_(catalog), pe_(pe) {
    in_training_.assign(static_cast<size_t>(catalog.size()), 0);
    for (int32_t id : train_articles) in_training_[static_cast<size_t>(id)] = 1;
    refresh();
  }

  // Recompute the candidate matrix from the current parameters (after each
  // training epoch, for instance).
  void refresh() {
    Graph g;
    ForwardBuilder fb(g, params_, dt_, pe_);
    candidates_ = g.val(fb.candidates());
  }

  std::vector<RankingResult> rank(const std::vector<Session>& sessions,
                                  const std::vector<Instance>& instances, int k) {
    std::vector<RankingResult> out;
    out.reserve(instances.size());
    constexpr size_t kChunk = 512;  // parameter leaves are copied per graph
    std::vector<double> scores(static_cast<size_t>(catalog_.size()));
    for (size_t begin = 0; begin < instances.size(); begin += kChunk) {
      const size_t end = std::min(begin + kChunk, instances.size());
      Graph g;
      ForwardBuilder fb(g, params_, dt_, pe_);
      std::vector<EncodedPrefix> prefixes;
      std::vector<int> xs_nodes;
      for (size_t i = begin; i < end; ++i) {
        prefixes.push_back(
            encode_instance(sessions, instances[i], params_.cfg.duration_categories));
        xs_nodes.push_back(fb.session_vectors(prefixes.back()).x_s);
      }
      for (size_t i = 0; i < prefixes.size(); ++i) {
        const Tensor& xs = g.val(xs_nodes[i]);
        kernels::mm_nt(scores.data(), xs.data(), candidates_.data(), 1, candidates_.cols(),
                       candidates_.rows());
        out.push_back(rank_scores(scores.data(), prefixes[i], k));
      }
    }
    return out;
  }

  RankingResult rank_one(const EncodedPrefix& prefix, int k) {
    Graph g;
    ForwardBuilder fb(g, params_, dt_, pe_);
    const Tensor& xs = g.val(fb.session_vectors(prefix).x_s);
    std::vector<double> scores(static_cast<size_t>(catalog_.size()));
    kernels::mm_nt(scores.data(), xs.data(), candidates_.data(), 1, candidates_.cols(),
                   candidates_.rows());
    return rank_scores(scores.data(), prefix, k);
  }

  // Shared pool/exclusion logic over an arbitrary score vector; also used by
  // the popularity baseline.
  RankingResult rank_scores(const double* scores, const EncodedPrefix& prefix, int k) const {
    const int64_t n = catalog_.size();
    RankingResult r;
    r.session_key = prefix.session_key;
    r.label = prefix.label;
    for (int64_t id : prefix.ids) r.prefix.push_back(static_cast<int32_t>(id));
    r.cold = !in_training_[static_cast<size_t>(prefix.label)];

    std::vector<char> excluded(static_cast<size_t>(n), 0);
    for (int64_t id : prefix.ids) excluded[static_cast<size_t>(id)] = 1;
    auto allowed = [&](int64_t j) {
      if (excluded[static_cast<size_t>(j)]) return false;
      return in_training_[static_cast<size_t>(j)] != 0 ||
             catalog_.articles[static_cast<size_t>(j)].publish_ts <= prefix.start_ts;
    };

    const bool label_allowed = allowed(prefix.label);
    const double label_score = scores[prefix.label];
    int64_t better = 0;
    std::vector<int32_t> pool;
    pool.reserve(static_cast<size_t>(n));
    for (int64_t j = 0; j < n; ++j) {
      if (!allowed(j)) continue;
      pool.push_back(static_cast<int32_t>(j));
      if (label_allowed && j != prefix.label &&
          (scores[j] > label_score || (scores[j] == label_score && j < prefix.label)))
        ++better;
    }
    r.rank = label_allowed ? better + 1 : 0;

    const size_t top = std::min<size_t>(static_cast<size_t>(k), pool.size());
    std::partial_sort(pool.begin(), pool.begin() + static_cast<ptrdiff_t>(top), pool.end(),
                      [&](int32_t a, int32_t b) {
                        return scores[a] != scores[b] ? scores[a] > scores[b] : a < b;
                      });
    r.top_k.assign(pool.begin(), pool.begin() + static_cast<ptrdiff_t>(top));
    return r;
  }

  const Tensor& candidate_matrix() const { return candidates_; }

 private:
  ModelParams& params_;
  const DatasetTensors& dt_;
  const ArticleCatalog& catalog_;
  const Tensor& pe_;
  Tensor candidates_;
  std::vector<char> in_training_;
};

// Popularity baseline: rank everything by training click count.
inline std::vector<RankingResult> rank_popularity(const std::vector<Session>& sessions,
                                                  const std::vector<Instance>& instances,
                                                  const std::vector<int64_t>& click_counts,
                                                  const Ranker& pool_logic, int k,
                                                  int duration_categories) {
  std::vector<double> scores(click_counts.size());
  for (size_t i = 0; i < click_counts.size(); ++i) scores[i] = static_cast<double>(click_counts[i]);
  std::vector<RankingResult> out;
  out.reserve(instances.size());
  for (const auto& inst : instances) {
    const auto prefix = encode_instance(sessions, inst, duration_categories);
    out.push_back(pool_logic.rank_scores(scores.data(), prefix, k));
  }
  return out;
}

}  // namespace sessrec
