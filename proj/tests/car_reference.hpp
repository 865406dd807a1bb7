#pragma once

// Standalone content-aware attention baseline (the base model with all
// implicit-feedback modules absent), composed independently of the tape:
// plain loops over xc_i = x_i (+) c_i, one attention, weighted sum, full
// softmax cross entropy. It reuses only the low-level scalar kernels (dot,
// softmax_row, sigmoid) so that "the flags-off network equals CAR" is
// checkable at bit level.

#include <vector>

#include "sessrec/kernels.hpp"
#include "sessrec/model.hpp"

namespace sessrec::car {

inline std::vector<double> article_vector(const ModelParams& P, const ArticleCatalog& catalog,
                                          int64_t id) {
  std::vector<double> xc;
  for (int64_t d = 0; d < P.cfg.d_n; ++d) xc.push_back(P.item_table->value.at(id, d));
  for (int64_t d = 0; d < P.cfg.d_c; ++d)
    xc.push_back(catalog.articles[static_cast<size_t>(id)].content[static_cast<size_t>(d)]);
  return xc;
}

inline std::vector<double> session_vector(const ModelParams& P, const ArticleCatalog& catalog,
                                          const Tensor& pe, const EncodedPrefix& prefix) {
  const int64_t t_len = static_cast<int64_t>(prefix.ids.size());
  const int64_t dxc = P.cfg.xc_dim();

  std::vector<std::vector<double>> xc_rows;
  for (int64_t id : prefix.ids) xc_rows.push_back(article_vector(P, catalog, id));

  std::vector<double> attn_scores(static_cast<size_t>(t_len));
  std::vector<double> attn_in(static_cast<size_t>(dxc));
  std::vector<double> hidden(static_cast<size_t>(P.cfg.d_n));
  for (int64_t i = 0; i < t_len; ++i) {
    for (int64_t d = 0; d < dxc; ++d)
      attn_in[static_cast<size_t>(d)] =
          xc_rows[static_cast<size_t>(i)][static_cast<size_t>(d)] +
          (P.cfg.positional_encoding ? pe.at(i, d) : 0.0);
    for (int64_t r = 0; r < P.cfg.d_n; ++r) {
      const double pre =
          kernels::dot(attn_in.data(), P.attn_w1->value.data() + r * dxc, dxc) +
          P.attn_b0->value[r];
      hidden[static_cast<size_t>(r)] = kernels::sigmoid(pre);
    }
    attn_scores[static_cast<size_t>(i)] =
        kernels::dot(hidden.data(), P.attn_w0->value.data(), P.cfg.d_n);
  }
  kernels::softmax_row(attn_scores.data(), t_len);

  std::vector<double> xc_s(static_cast<size_t>(dxc), 0.0);
  for (int64_t i = 0; i < t_len; ++i)
    for (int64_t d = 0; d < dxc; ++d)
      xc_s[static_cast<size_t>(d)] +=
          attn_scores[static_cast<size_t>(i)] * xc_rows[static_cast<size_t>(i)][static_cast<size_t>(d)];
  return xc_s;
}

inline double batch_loss(const ModelParams& P, const ArticleCatalog& catalog, const Tensor& pe,
                         const std::vector<EncodedPrefix>& batch) {
  const int64_t n = catalog.size();
  const int64_t dxc = P.cfg.xc_dim();
  std::vector<std::vector<double>> candidates;
  for (int64_t j = 0; j < n; ++j) candidates.push_back(article_vector(P, catalog, j));

  double total = 0.0;
  std::vector<double> z(static_cast<size_t>(n));
  for (const auto& prefix : batch) {
    const auto xs = session_vector(P, catalog, pe, prefix);
    for (int64_t j = 0; j < n; ++j)
      z[static_cast<size_t>(j)] =
          kernels::dot(xs.data(), candidates[static_cast<size_t>(j)].data(), dxc);
    kernels::softmax_row(z.data(), n);
    double row_loss = 0.0;
    for (int64_t j = 0; j < n; ++j) {
      double p = z[static_cast<size_t>(j)];
      if (p < Graph::kBceClamp) p = Graph::kBceClamp;
      if (p > 1.0 - Graph::kBceClamp) p = 1.0 - Graph::kBceClamp;
      if (j == prefix.label)
        row_loss -= std::log(p);
      else
        row_loss -= std::log(1.0 - p);
    }
    total += row_loss;
  }
  return total / static_cast<double>(batch.size());
}

}  // namespace sessrec::car
