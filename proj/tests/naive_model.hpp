#pragma once

// Independent dense re-computation of the network forward pass, written as
// literal formula loops with no code shared with the tape implementation.
// Used to pin the model's outputs to 1e-10 on small shapes.

#include <cmath>
#include <vector>

#include "sessrec/model.hpp"

namespace sessrec::naive {

struct Outputs {
  std::vector<double> alpha;     // base attention, post-softmax
  std::vector<double> alpha_t;   // start-time attention
  std::vector<double> alpha_tp;  // publish-time attention
  std::vector<double> xc_s;
  std::vector<double> xt_s;
  std::vector<double> x_s;
  std::vector<std::vector<double>> candidates;
  std::vector<double> probs;  // softmax over candidate scores
  double loss_l1 = 0.0;
};

inline std::vector<double> plain_softmax(const std::vector<double>& scores) {
  std::vector<double> out(scores.size());
  double denom = 0.0;
  for (double s : scores) denom += std::exp(s);
  for (size_t i = 0; i < scores.size(); ++i) out[i] = std::exp(scores[i]) / denom;
  return out;
}

inline Outputs forward(ModelParams& P, const ArticleCatalog& catalog, const Tensor& pe,
                       const EncodedPrefix& prefix) {
  const ModelConfig& cfg = P.cfg;
  const size_t t_len = prefix.ids.size();
  const auto& arts = catalog.articles;

  auto item_row = [&](int64_t id, int64_t d) { return P.item_table->value.at(id, d); };
  auto content_of = [&](int64_t id, int64_t d) {
    return cfg.use_content ? arts[static_cast<size_t>(id)].content[static_cast<size_t>(d)]
                           : item_row(id, d);
  };
  auto xc_of = [&](int64_t id) {
    std::vector<double> v;
    for (int64_t d = 0; d < cfg.d_n; ++d) v.push_back(item_row(id, d));
    if (cfg.use_content)
      for (int64_t d = 0; d < cfg.d_c; ++d)
        v.push_back(arts[static_cast<size_t>(id)].content[static_cast<size_t>(d)]);
    return v;
  };
  auto tp_of = [&](int64_t id) {
    const auto rows = datetime_row_indices(arts[static_cast<size_t>(id)].publish_ts);
    std::vector<double> v;
    for (int k = 0; k < 5; ++k)
      for (int64_t d = 0; d < cfg.d_t; ++d)
        v.push_back(P.time_pub->value.at(rows[static_cast<size_t>(k)], d));
    return v;
  };

  Outputs out;

  // Base attention: alpha_i = W0 . sigmoid(W1 xc_i (+ W2 ta_i) + b0), with
  // positional encodings added to xc_i for the score only.
  std::vector<double> base_scores(t_len);
  for (size_t i = 0; i < t_len; ++i) {
    const auto xc = xc_of(prefix.ids[i]);
    double score = 0.0;
    for (int64_t r = 0; r < cfg.d_n; ++r) {
      double pre = P.attn_b0->value[r];
      for (int64_t d = 0; d < cfg.xc_dim(); ++d) {
        const double x = xc[static_cast<size_t>(d)] +
                         (cfg.positional_encoding ? pe.at(static_cast<int64_t>(i), d) : 0.0);
        pre += P.attn_w1->value.at(r, d) * x;
      }
      if (cfg.use_positive) {
        for (int64_t d = 0; d < cfg.d_t; ++d)
          pre += P.attn_w2->value.at(r, d) *
                 P.duration_table->value.at(prefix.duration_buckets[i], d);
      }
      score += P.attn_w0->value.at(0, r) * (1.0 / (1.0 + std::exp(-pre)));
    }
    base_scores[i] = score;
  }
  out.alpha = plain_softmax(base_scores);

  std::vector<double> weights = out.alpha;
  if (cfg.use_neutral) {
    // Start-time attention: q = ReLU(Wq ts + bq), key = tanh(Wk q + bk),
    // score_i = c_i . key.
    std::vector<double> st_scores(t_len);
    for (size_t i = 0; i < t_len; ++i) {
      const int64_t ts = cfg.per_click_start_time ? prefix.click_ts[i] : prefix.start_ts;
      const auto rows = start_row_indices(ts);
      std::vector<double> tsv;
      for (int k = 0; k < 2; ++k)
        for (int64_t d = 0; d < cfg.d_t; ++d)
          tsv.push_back(P.time_start->value.at(rows[static_cast<size_t>(k)], d));
      std::vector<double> q(static_cast<size_t>(cfg.d_n));
      for (int64_t r = 0; r < cfg.d_n; ++r) {
        double pre = P.start_bq->value[r];
        for (int64_t d = 0; d < 2 * cfg.d_t; ++d)
          pre += P.start_wq->value.at(r, d) * tsv[static_cast<size_t>(d)];
        q[static_cast<size_t>(r)] = pre > 0 ? pre : 0.0;
      }
      double score = 0.0;
      for (int64_t r = 0; r < cfg.cf_dim(); ++r) {
        double pre = P.start_bk->value[r];
        for (int64_t d = 0; d < cfg.d_n; ++d)
          pre += P.start_wk->value.at(r, d) * q[static_cast<size_t>(d)];
        score += content_of(prefix.ids[i], r) * std::tanh(pre);
      }
      st_scores[i] = score;
    }
    out.alpha_t = plain_softmax(st_scores);
    for (size_t i = 0; i < t_len; ++i) weights[i] += out.alpha_t[i];
  }

  out.xc_s.assign(static_cast<size_t>(cfg.xc_dim()), 0.0);
  for (size_t i = 0; i < t_len; ++i) {
    const auto xc = xc_of(prefix.ids[i]);
    for (int64_t d = 0; d < cfg.xc_dim(); ++d)
      out.xc_s[static_cast<size_t>(d)] += weights[i] * xc[static_cast<size_t>(d)];
  }
  out.x_s = out.xc_s;

  if (cfg.use_neutral) {
    // Publish-time attention with content mixed into the score.
    std::vector<double> tp_scores(t_len);
    for (size_t i = 0; i < t_len; ++i) {
      const auto tp = tp_of(prefix.ids[i]);
      double score = 0.0;
      for (int64_t r = 0; r < cfg.d_n; ++r) {
        double pre = P.pub_b0->value[r];
        for (int64_t d = 0; d < cfg.tp_dim(); ++d)
          pre += P.pub_w1->value.at(r, d) * tp[static_cast<size_t>(d)];
        for (int64_t d = 0; d < cfg.cf_dim(); ++d)
          pre += P.pub_w2->value.at(r, d) * content_of(prefix.ids[i], d);
        score += P.pub_w0->value.at(0, r) * (1.0 / (1.0 + std::exp(-pre)));
      }
      tp_scores[i] = score;
    }
    out.alpha_tp = plain_softmax(tp_scores);
    out.xt_s.assign(static_cast<size_t>(cfg.tp_dim()), 0.0);
    for (size_t i = 0; i < t_len; ++i) {
      const auto tp = tp_of(prefix.ids[i]);
      for (int64_t d = 0; d < cfg.tp_dim(); ++d)
        out.xt_s[static_cast<size_t>(d)] += out.alpha_tp[i] * tp[static_cast<size_t>(d)];
    }
    out.x_s.insert(out.x_s.end(), out.xt_s.begin(), out.xt_s.end());
  }

  // Candidate scores and the full-pool cross entropy.
  std::vector<double> scores;
  for (int64_t j = 0; j < catalog.size(); ++j) {
    auto cand = xc_of(j);
    if (cfg.use_neutral) {
      const auto tp = tp_of(j);
      cand.insert(cand.end(), tp.begin(), tp.end());
    }
    out.candidates.push_back(cand);
    double z = 0.0;
    for (size_t d = 0; d < cand.size(); ++d) z += out.x_s[d] * cand[d];
    scores.push_back(z);
  }
  out.probs = plain_softmax(scores);
  for (int64_t j = 0; j < catalog.size(); ++j) {
    double p = out.probs[static_cast<size_t>(j)];
    p = std::min(std::max(p, 1e-12), 1.0 - 1e-12);
    out.loss_l1 -= (j == prefix.label) ? std::log(p) : std::log(1.0 - p);
  }
  return out;
}

}  // namespace sessrec::naive
