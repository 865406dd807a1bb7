#pragma once

#include <memory>
#include <string>
#include <vector>

#include "sessrec/common.hpp"
#include "sessrec/tensor.hpp"

namespace sessrec {

// A trainable tensor with its gradient and Adam state. Moments start at zero,
// so rows that never receive gradient keep their initialization bit-for-bit.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  Tensor adam_m;
  Tensor adam_v;
  int64_t steps = 0;

  Parameter(std::string n, Tensor init)
      : name(std::move(n)),
        value(std::move(init)),
        grad(Tensor::zeros(value.shape())),
        adam_m(Tensor::zeros(value.shape())),
        adam_v(Tensor::zeros(value.shape())) {}

  void zero_grad() { grad.fill(0.0); }
};

// Owns parameters in registration order; that order fixes initialization,
// update and checkpoint layout.
class ParamStore {
 public:
  Parameter* add(std::string name, Tensor init) {
    params_.push_back(std::make_unique<Parameter>(std::move(name), std::move(init)));
    return params_.back().get();
  }

  Parameter* find(const std::string& name) {
    for (auto& p : params_)
      if (p->name == name) return p.get();
    return nullptr;
  }

  std::vector<Parameter*> all() {
    std::vector<Parameter*> out;
    out.reserve(params_.size());
    for (auto& p : params_) out.push_back(p.get());
    return out;
  }

  size_t size() const { return params_.size(); }

  void zero_grads() {
    for (auto& p : params_) p->zero_grad();
  }

  int64_t total_values() const {
    int64_t n = 0;
    for (auto& p : params_) n += p->value.numel();
    return n;
  }

  // Deep copy of values only (used for best-validation snapshots).
  std::vector<Tensor> snapshot_values() const {
    std::vector<Tensor> out;
    out.reserve(params_.size());
    for (auto& p : params_) out.push_back(p->value);
    return out;
  }

  void restore_values(const std::vector<Tensor>& values) {
    if (values.size() != params_.size())
      throw NumericError("snapshot size mismatch in restore_values");
    for (size_t i = 0; i < values.size(); ++i) params_[i]->value = values[i];
  }

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
};

}  // namespace sessrec
