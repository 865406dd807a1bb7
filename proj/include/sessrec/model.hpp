#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sessrec/data.hpp"
#include "sessrec/graph.hpp"
#include "sessrec/negsample.hpp"
#include "sessrec/temporal.hpp"

namespace sessrec {

struct ModelConfig {
  int64_t d_n = 250;  // item embedding dim
  int64_t d_c = 250;  // content dim
  int64_t d_t = 64;   // time embedding dim
  int duration_categories = 12;

  double lambda = 0.5;  // negative-loss weight
  int negatives = 20;   // |Ne|
  int window = 300;
  SamplingStrategy strategy = SamplingStrategy::kWindow;
  bool use_explicit_impressions = true;  // MIND-style pools when present

  bool share_time_tables = true;
  bool use_neutral = true;
  bool use_positive = true;
  bool use_negative = true;
  bool use_content = true;  // off = item-embedding-only variant
  bool positional_encoding = true;
  bool per_click_start_time = false;  // paper defines ts_i per click; default is per session

  double lr = 0.001;
  int batch_size = 1024;
  int max_epochs = 30;
  int patience = 3;
  uint64_t seed = 42;

  int64_t xc_dim() const { return d_n + (use_content ? d_c : 0); }
  // Attention "content" role: the content vector, or the item embedding when
  // content is ablated.
  int64_t cf_dim() const { return use_content ? d_c : d_n; }
  int64_t tp_dim() const { return 5 * d_t; }
  int64_t session_dim() const { return xc_dim() + (use_neutral ? tp_dim() : 0); }

  std::string canonical() const {
    std::ostringstream os;
    os << "d_n=" << d_n << ";d_c=" << d_c << ";d_t=" << d_t
       << ";m=" << duration_categories << ";lambda=" << lambda << ";ne=" << negatives
       << ";window=" << window << ";strategy=" << strategy_name(strategy)
       << ";explicit_imp=" << use_explicit_impressions << ";share=" << share_time_tables
       << ";neutral=" << use_neutral << ";positive=" << use_positive
       << ";negative=" << use_negative << ";content=" << use_content
       << ";pos_enc=" << positional_encoding << ";per_click_start=" << per_click_start_time
       << ";lr=" << lr << ";batch=" << batch_size << ";max_epochs=" << max_epochs
       << ";patience=" << patience;
    return os.str();
  }

  uint64_t hash() const { return fnv1a(canonical()); }
};

// All trainable state. Embedding tables are N(0, 0.002), weight matrices
// N(0, 0.05), biases zero. Every parameter seeds its own generator from the
// root seed and its name, so toggling a module never shifts another module's
// initialization.
struct ModelParams {
  ParamStore store;
  ModelConfig cfg;
  int64_t catalog_size = 0;

  Parameter* item_table = nullptr;
  Parameter* time_start = nullptr;  // aliases time_pub in shared mode
  Parameter* time_pub = nullptr;
  Parameter* duration_table = nullptr;
  Parameter* attn_w0 = nullptr;
  Parameter* attn_w1 = nullptr;
  Parameter* attn_w2 = nullptr;
  Parameter* attn_b0 = nullptr;
  Parameter* start_wq = nullptr;
  Parameter* start_bq = nullptr;
  Parameter* start_wk = nullptr;
  Parameter* start_bk = nullptr;
  Parameter* pub_w0 = nullptr;
  Parameter* pub_w1 = nullptr;
  Parameter* pub_w2 = nullptr;
  Parameter* pub_b0 = nullptr;

  ModelParams(const ModelConfig& config, int64_t n_articles) : cfg(config), catalog_size(n_articles) {
    auto table = [&](const std::string& name, std::vector<int64_t> shape) {
      Rng rng(derive_seed(cfg.seed, "init." + name));
      return store.add(name, Tensor::gaussian(std::move(shape), rng, 0.0, 0.002));
    };
    auto weight = [&](const std::string& name, std::vector<int64_t> shape) {
      Rng rng(derive_seed(cfg.seed, "init." + name));
      return store.add(name, Tensor::gaussian(std::move(shape), rng, 0.0, 0.05));
    };
    auto bias = [&](const std::string& name, int64_t n) {
      return store.add(name, Tensor::zeros({n}));
    };

    item_table = table("item_embedding", {catalog_size, cfg.d_n});
    attn_w0 = weight("attn.W0", {1, cfg.d_n});
    attn_w1 = weight("attn.W1", {cfg.d_n, cfg.xc_dim()});
    attn_b0 = bias("attn.b0", cfg.d_n);
    if (cfg.use_positive) {
      attn_w2 = weight("attn.W2", {cfg.d_n, cfg.d_t});
      duration_table = table("duration_table", {cfg.duration_categories + 1, cfg.d_t});
    }
    if (cfg.use_neutral) {
      if (cfg.share_time_tables) {
        time_start = time_pub = table("time_table", {kDateTimeRows, cfg.d_t});
      } else {
        time_start = table("time_table_start", {kDateTimeRows, cfg.d_t});
        time_pub = table("time_table_pub", {kDateTimeRows, cfg.d_t});
      }
      start_wq = weight("start.Wq", {cfg.d_n, 2 * cfg.d_t});
      start_bq = bias("start.bq", cfg.d_n);
      start_wk = weight("start.Wk", {cfg.cf_dim(), cfg.d_n});
      start_bk = bias("start.bk", cfg.cf_dim());
      pub_w0 = weight("pub.W0", {1, cfg.d_n});
      pub_w1 = weight("pub.W1", {cfg.d_n, cfg.tp_dim()});
      pub_w2 = weight("pub.W2", {cfg.d_n, cfg.cf_dim()});
      pub_b0 = bias("pub.b0", cfg.d_n);
    }
  }
};

// Per-dataset constants the forward pass needs: the content matrix and each
// article's five publish-time row indices.
struct DatasetTensors {
  Tensor content;  // N x d_c
  std::array<std::vector<int64_t>, 5> pub_rows;
};

inline DatasetTensors build_dataset_tensors(const ArticleCatalog& catalog) {
  DatasetTensors dt;
  const int64_t n = catalog.size();
  dt.content = Tensor({n, catalog.content_dim});
  for (int64_t i = 0; i < n; ++i) {
    const Article& a = catalog.articles[static_cast<size_t>(i)];
    for (int64_t j = 0; j < catalog.content_dim; ++j)
      dt.content.at(i, j) = a.content[static_cast<size_t>(j)];
    const auto rows = datetime_row_indices(a.publish_ts);
    for (int k = 0; k < 5; ++k) dt.pub_rows[static_cast<size_t>(k)].push_back(rows[static_cast<size_t>(k)]);
  }
  return dt;
}

// Transformer-style sinusoidal positional encodings, added to xc_i only on
// the base attention path.
inline Tensor positional_encoding_table(int64_t max_len, int64_t dim) {
  Tensor pe({max_len, dim});
  for (int64_t pos = 0; pos < max_len; ++pos) {
    for (int64_t i = 0; i < dim; ++i) {
      const double angle =
          static_cast<double>(pos) /
          std::pow(10000.0, static_cast<double>(2 * (i / 2)) / static_cast<double>(dim));
      pe.at(pos, i) = (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
    }
  }
  return pe;
}

// The prefix a forward pass consumes: dense article ids, duration buckets,
// and the session start timestamp.
struct EncodedPrefix {
  std::vector<int64_t> ids;
  std::vector<int64_t> duration_buckets;
  std::vector<int64_t> click_ts;
  int64_t start_ts = 0;
  int32_t label = 0;
  std::string session_key;
};

inline EncodedPrefix encode_prefix(const Session& session, int32_t prefix_len, int32_t label,
                                   int duration_categories) {
  EncodedPrefix p;
  p.start_ts = session.start_ts;
  p.label = label;
  p.session_key = session.key;
  for (int32_t k = 0; k < prefix_len; ++k) {
    const SessionClick& c = session.clicks[static_cast<size_t>(k)];
    p.ids.push_back(c.article);
    p.duration_buckets.push_back(duration_bucket(c.active_time, duration_categories));
    p.click_ts.push_back(c.ts);
  }
  return p;
}

inline EncodedPrefix encode_instance(const std::vector<Session>& sessions, const Instance& inst,
                                     int duration_categories) {
  return encode_prefix(sessions[static_cast<size_t>(inst.session)], inst.prefix_len, inst.label,
                       duration_categories);
}

// Builds the network for one batch on a fresh tape. Parameter leaves are
// created once and shared by every instance in the batch, so gradients
// accumulate at the leaves.
class ForwardBuilder {
 public:
  ForwardBuilder(Graph& g, ModelParams& params, const DatasetTensors& dt, const Tensor& pe)
      : g_(g), p_(params), cfg_(params.cfg), dt_(dt), pe_(pe) {
    item_node_ = g_.param(p_.item_table);
    attn_w0_ = g_.param(p_.attn_w0);
    attn_w1_ = g_.param(p_.attn_w1);
    attn_b0_ = g_.param(p_.attn_b0);
    if (cfg_.use_neutral) {
      if (cfg_.share_time_tables) {
        time_start_node_ = time_pub_node_ = g_.param(p_.time_start);
      } else {
        time_start_node_ = g_.param(p_.time_start);
        time_pub_node_ = g_.param(p_.time_pub);
      }
      start_wq_ = g_.param(p_.start_wq);
      start_bq_ = g_.param(p_.start_bq);
      start_wk_ = g_.param(p_.start_wk);
      start_bk_ = g_.param(p_.start_bk);
      pub_w0_ = g_.param(p_.pub_w0);
      pub_w1_ = g_.param(p_.pub_w1);
      pub_w2_ = g_.param(p_.pub_w2);
      pub_b0_ = g_.param(p_.pub_b0);
    }
    if (cfg_.use_positive) {
      duration_node_ = g_.param(p_.duration_table);
      attn_w2_ = g_.param(p_.attn_w2);
    }
    content_node_ = cfg_.use_content ? g_.constant(dt_.content) : -1;
  }

  // xc_j = x_j (+) c_j for a list of articles.
  int article_vectors(const std::vector<int64_t>& ids) {
    const int emb = g_.gather_rows(item_node_, ids);
    if (!cfg_.use_content) return emb;
    return g_.concat_cols({emb, g_.gather_rows(content_node_, ids)});
  }

  // The "content" role in the time attentions (c_i, or x_i when ablated).
  int content_features(const std::vector<int64_t>& ids) {
    return cfg_.use_content ? g_.gather_rows(content_node_, ids)
                            : g_.gather_rows(item_node_, ids);
  }

  // tp vectors: month|day|weekday|hour|minute rows concatenated.
  int publish_vectors(const std::vector<int64_t>& ids) {
    std::vector<int> parts;
    for (int k = 0; k < 5; ++k) {
      std::vector<int64_t> rows;
      rows.reserve(ids.size());
      for (int64_t id : ids) rows.push_back(dt_.pub_rows[static_cast<size_t>(k)][static_cast<size_t>(id)]);
      parts.push_back(g_.gather_rows(time_pub_node_, rows));
    }
    return g_.concat_cols(parts);
  }

  // Full candidate matrix, xc_j (+) tp_j when the neutral module is on.
  int candidates() {
    std::vector<int64_t> all(static_cast<size_t>(p_.catalog_size));
    for (int64_t i = 0; i < p_.catalog_size; ++i) all[static_cast<size_t>(i)] = i;
    const int xc = article_vectors(all);
    if (!cfg_.use_neutral) return xc;
    return g_.concat_cols({xc, publish_vectors(all)});
  }

  struct SessionNodes {
    int xc_s = -1;  // contextual vector, used by the negative penalty
    int x_s = -1;   // full session vector for scoring
    int alpha = -1;     // base attention weights, 1 x T
    int alpha_t = -1;   // start-time weights (neutral only)
    int alpha_tp = -1;  // publish-time weights (neutral only)
    int xt_s = -1;      // temporal session vector (neutral only)
  };

  SessionNodes session_vectors(const EncodedPrefix& prefix) {
    const int64_t t = static_cast<int64_t>(prefix.ids.size());
    const int xc = article_vectors(prefix.ids);

    // Base attention (Eq. 4 shape), optionally with the active-time term.
    int attn_in = xc;
    if (cfg_.positional_encoding) {
      if (t > pe_.rows())
        throw ShapeError("prefix length " + std::to_string(t) +
                         " exceeds positional encoding table " + shape_str(pe_.shape()));
      Tensor pe_rows({t, cfg_.xc_dim()});
      for (int64_t i = 0; i < t; ++i)
        for (int64_t j = 0; j < cfg_.xc_dim(); ++j) pe_rows.at(i, j) = pe_.at(i, j);
      attn_in = g_.add(xc, g_.constant(std::move(pe_rows)));
    }
    int h = g_.add_rowvec(g_.matmul_nt(attn_in, attn_w1_), attn_b0_);
    if (cfg_.use_positive) {
      const int ta = g_.gather_rows(duration_node_, prefix.duration_buckets);
      h = g_.add(h, g_.matmul_nt(ta, attn_w2_));
    }
    const int alpha = g_.softmax_rows(g_.reshape(g_.matmul_nt(g_.sigmoid(h), attn_w0_), {1, t}));

    SessionNodes out;
    out.alpha = alpha;
    int weights = alpha;
    int cf = -1;
    if (cfg_.use_neutral) {
      cf = content_features(prefix.ids);
      out.alpha_t = start_time_attention(prefix, cf, t);
      weights = g_.add(alpha, out.alpha_t);
    }

    out.xc_s = g_.matmul(weights, xc);
    out.x_s = out.xc_s;
    if (cfg_.use_neutral) {
      const int tp = publish_vectors(prefix.ids);
      const int hp = g_.add_rowvec(
          g_.add(g_.matmul_nt(tp, pub_w1_), g_.matmul_nt(cf, pub_w2_)), pub_b0_);
      out.alpha_tp =
          g_.softmax_rows(g_.reshape(g_.matmul_nt(g_.sigmoid(hp), pub_w0_), {1, t}));
      out.xt_s = g_.matmul(out.alpha_tp, tp);
      out.x_s = g_.concat_cols({out.xc_s, out.xt_s});
    }
    return out;
  }

 private:
  // Start-time personalized attention: a preference query from the (weekday,
  // hour) embedding, scored against each click's content features.
  int start_time_attention(const EncodedPrefix& prefix, int cf, int64_t t) {
    if (!cfg_.per_click_start_time) {
      const auto rows = start_row_indices(prefix.start_ts);
      const int ts_vec =
          g_.reshape(g_.gather_rows(time_start_node_, {rows[0], rows[1]}), {1, 2 * cfg_.d_t});
      const int q = g_.relu(g_.add_rowvec(g_.matmul_nt(ts_vec, start_wq_), start_bq_));
      const int key = g_.tanh_(g_.add_rowvec(g_.matmul_nt(q, start_wk_), start_bk_));
      return g_.softmax_rows(g_.reshape(g_.matmul_nt(cf, key), {1, t}));
    }
    // Per-click variant: one query per click from its own timestamp.
    std::vector<int64_t> wd_rows, hr_rows;
    for (int64_t ts : prefix.click_ts) {
      const auto rows = start_row_indices(ts);
      wd_rows.push_back(rows[0]);
      hr_rows.push_back(rows[1]);
    }
    const int ts_mat = g_.concat_cols(
        {g_.gather_rows(time_start_node_, wd_rows), g_.gather_rows(time_start_node_, hr_rows)});
    const int q = g_.relu(g_.add_rowvec(g_.matmul_nt(ts_mat, start_wq_), start_bq_));
    const int key = g_.tanh_(g_.add_rowvec(g_.matmul_nt(q, start_wk_), start_bk_));
    return g_.softmax_rows(g_.reshape(g_.row_dot(cf, key), {1, t}));
  }

  Graph& g_;
  ModelParams& p_;
  const ModelConfig& cfg_;
  const DatasetTensors& dt_;
  const Tensor& pe_;
  int item_node_ = -1;
  int time_start_node_ = -1;
  int time_pub_node_ = -1;
  int duration_node_ = -1;
  int content_node_ = -1;
  int attn_w0_ = -1, attn_w1_ = -1, attn_w2_ = -1, attn_b0_ = -1;
  int start_wq_ = -1, start_bq_ = -1, start_wk_ = -1, start_bk_ = -1;
  int pub_w0_ = -1, pub_w1_ = -1, pub_w2_ = -1, pub_b0_ = -1;
};

// Batch loss: Eq. 3 cross entropy over the full candidate pool, plus the
// Eq. 16 penalty on sampled negatives. The penalty scores the contextual
// vectors, not the temporal-augmented ones. Returns the loss node.
struct BatchGraph {
  int loss = -1;
  int scores = -1;  // B x N, pre-softmax
  std::vector<ForwardBuilder::SessionNodes> sessions;
};

inline BatchGraph build_batch_loss(Graph& g, ForwardBuilder& fb,
                                   const std::vector<EncodedPrefix>& batch,
                                   const std::vector<const NegativeSet*>& negatives,
                                   const ModelConfig& cfg) {
  BatchGraph out;
  const int cand = fb.candidates();
  std::vector<int> xs_nodes;
  std::vector<int64_t> labels;
  for (const auto& prefix : batch) {
    auto nodes = fb.session_vectors(prefix);
    out.sessions.push_back(nodes);
    xs_nodes.push_back(nodes.x_s);
    labels.push_back(prefix.label);
  }
  const int x = g.stack_rows(xs_nodes);
  out.scores = g.matmul_nt(x, cand);
  out.loss = g.softmax_bce(out.scores, labels);

  if (cfg.use_negative && cfg.lambda > 0 && !negatives.empty()) {
    int penalty = -1;
    for (size_t i = 0; i < batch.size(); ++i) {
      const NegativeSet* ne = negatives[i];
      if (ne == nullptr || ne->ids.empty()) continue;
      std::vector<int64_t> ids;
      for (int32_t id : ne->ids) {
        if (id == batch[i].label)
          throw DataError("negative set for session " + batch[i].session_key +
                          " contains the label");
        for (int64_t clicked : batch[i].ids)
          if (clicked == id)
            throw DataError("negative set for session " + batch[i].session_key +
                            " contains a clicked article");
        ids.push_back(id);
      }
      const int neg_xc = fb.article_vectors(ids);
      const int sims = g.matmul_nt(out.sessions[i].xc_s, neg_xc);
      const int pen_i = g.sum_all(g.softplus_(g.shift(sims, -1.0)));
      penalty = penalty < 0 ? pen_i : g.add(penalty, pen_i);
    }
    if (penalty >= 0)
      out.loss = g.add(out.loss, g.scale(penalty, cfg.lambda / static_cast<double>(batch.size())));
  }
  return out;
}

}  // namespace sessrec
