#pragma once

#include <cmath>

#include "sessrec/parameter.hpp"

namespace sessrec {

// The paper names Adam without hyperparameters; these are the standard
// defaults.
struct AdamConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam over every parameter in the store. Gradients are
// cleared afterwards; a non-finite gradient aborts the step before any
// parameter moves.
inline void adam_step(ParamStore& store, const AdamConfig& cfg) {
  for (Parameter* p : store.all())
    if (!p->grad.all_finite())
      throw NumericError("non-finite gradient for parameter '" + p->name + "'");
  for (Parameter* p : store.all()) {
    p->steps += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(p->steps));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(p->steps));
    for (int64_t i = 0; i < p->value.numel(); ++i) {
      const double g = p->grad[i];
      p->adam_m[i] = cfg.beta1 * p->adam_m[i] + (1.0 - cfg.beta1) * g;
      p->adam_v[i] = cfg.beta2 * p->adam_v[i] + (1.0 - cfg.beta2) * g * g;
      const double mhat = p->adam_m[i] / bc1;
      const double vhat = p->adam_v[i] / bc2;
      p->value[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
    p->zero_grad();
  }
}

}  // namespace sessrec
