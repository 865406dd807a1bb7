#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sessrec/adam.hpp"
#include "sessrec/model.hpp"
#include "sessrec/negsample.hpp"
#include "sessrec/ranking.hpp"

namespace sessrec {

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double val_hr20 = 0.0;
};

struct TrainResult {
  std::vector<EpochLog> log;
  int best_epoch = -1;
  double best_val_hr20 = 0.0;
};

// Fresh negative sets for one epoch. Pools come from explicit impressions
// when available, otherwise from the publish-order window around the prefix
// clicks; the label and every clicked article are always excluded.
inline std::vector<NegativeSet> draw_epoch_negatives(
    const std::vector<Session>& sessions, const std::vector<Instance>& instances,
    const PublishIndex& index, const ModelConfig& cfg, uint64_t fold_id, int epoch) {
  std::vector<NegativeSet> out;
  out.reserve(instances.size());
  Rng rng(derive_seed(cfg.seed, "negsample", fold_id, static_cast<uint64_t>(epoch)));
  const int64_t n = index.order.size();
  for (const auto& inst : instances) {
    const Session& s = sessions[static_cast<size_t>(inst.session)];
    std::vector<int32_t> clicked;
    for (int32_t k = 0; k < inst.prefix_len; ++k)
      clicked.push_back(s.clicks[static_cast<size_t>(k)].article);
    NegativeSet ne;
    if (cfg.strategy == SamplingStrategy::kRandom) {
      ne = sample_random_negatives(cfg.negatives, n, clicked, inst.label, rng);
    } else {
      std::vector<int32_t> pool;
      if (cfg.use_explicit_impressions && !s.impressions.empty()) {
        std::set<int32_t> drop(clicked.begin(), clicked.end());
        drop.insert(inst.label);
        for (int32_t id : s.impressions)
          if (!drop.count(id)) pool.push_back(id);
        std::sort(pool.begin(), pool.end());
        pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
      } else {
        pool = reconstruct_impressions(clicked, inst.label, index, cfg.window);
      }
      ne = sample_negatives(pool, cfg.negatives, n, clicked, inst.label, rng);
    }
    ne.session_key = s.key;
    out.push_back(std::move(ne));
  }
  return out;
}

// Mini-batch Adam with per-epoch HR@20 validation and early stopping on the
// best validation score. Returns the log; params hold the best-epoch values.
inline TrainResult train_model(ModelParams& params, const std::vector<Session>& sessions,
                               const Fold& fold, const ArticleCatalog& catalog,
                               const DatasetTensors& dt, uint64_t fold_id = 0) {
  const ModelConfig& cfg = params.cfg;
  int64_t max_prefix = 8;
  for (const auto& s : sessions)
    max_prefix = std::max<int64_t>(max_prefix, static_cast<int64_t>(s.clicks.size()));
  const Tensor pe = positional_encoding_table(max_prefix, cfg.xc_dim());

  const PublishIndex pub_index(catalog);
  const std::set<int32_t> train_articles = training_article_set(sessions, fold.train);
  Ranker ranker(params, dt, catalog, train_articles, pe);
  AdamConfig adam{cfg.lr};

  const bool wants_negatives = cfg.use_negative && cfg.lambda > 0;
  TrainResult result;
  std::vector<Tensor> best_values;
  int stale_epochs = 0;

  std::vector<size_t> order(fold.train.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::vector<NegativeSet> negatives;
    if (wants_negatives)
      negatives = draw_epoch_negatives(sessions, fold.train, pub_index, cfg, fold_id, epoch);

    Rng shuffle_rng(derive_seed(cfg.seed, "shuffle", fold_id, static_cast<uint64_t>(epoch)));
    for (size_t i = 0; i + 1 < order.size(); ++i) {
      const size_t j = i + static_cast<size_t>(shuffle_rng.uniform(order.size() - i));
      std::swap(order[i], order[j]);
    }

    double loss_sum = 0.0;
    const size_t batch_size = static_cast<size_t>(cfg.batch_size);
    for (size_t begin = 0; begin < order.size(); begin += batch_size) {
      const size_t end = std::min(begin + batch_size, order.size());
      Graph g;
      ForwardBuilder fb(g, params, dt, pe);
      std::vector<EncodedPrefix> batch;
      std::vector<const NegativeSet*> batch_neg;
      for (size_t i = begin; i < end; ++i) {
        batch.push_back(
            encode_instance(sessions, fold.train[order[i]], cfg.duration_categories));
        batch_neg.push_back(wants_negatives ? &negatives[order[i]] : nullptr);
      }
      const BatchGraph bg = build_batch_loss(g, fb, batch, batch_neg, cfg);
      const double loss = g.val(bg.loss)[0];
      if (!std::isfinite(loss)) {
        std::ostringstream os;
        os << "non-finite loss " << loss << " in epoch " << epoch << ", batch at instance "
           << begin << "; first sessions:";
        for (size_t i = 0; i < std::min<size_t>(4, batch.size()); ++i)
          os << ' ' << batch[i].session_key;
        throw NumericError(os.str());
      }
      g.backward(bg.loss);
      adam_step(params.store, adam);
      loss_sum += loss * static_cast<double>(end - begin);
    }

    EpochLog log;
    log.epoch = epoch;
    log.train_loss = order.empty() ? 0.0 : loss_sum / static_cast<double>(order.size());

    ranker.refresh();
    if (!fold.valid.empty()) {
      const auto val_results = ranker.rank(sessions, fold.valid, 20);
      log.val_hr20 = hit_rate(val_results, 20);
      result.log.push_back(log);
      if (result.best_epoch < 0 || log.val_hr20 > result.best_val_hr20) {
        result.best_epoch = epoch;
        result.best_val_hr20 = log.val_hr20;
        best_values = params.store.snapshot_values();
        stale_epochs = 0;
      } else if (++stale_epochs >= cfg.patience) {
        break;
      }
    } else {
      // No validation data: run the full budget and keep the final weights.
      result.log.push_back(log);
      result.best_epoch = epoch;
    }
  }

  if (!best_values.empty()) params.store.restore_values(best_values);
  return result;
}

}  // namespace sessrec
