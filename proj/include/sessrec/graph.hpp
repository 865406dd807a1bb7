#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "sessrec/kernels.hpp"
#include "sessrec/parameter.hpp"
#include "sessrec/tensor.hpp"

namespace sessrec {

enum class OpKind {
  kConstant,
  kParameter,
  kMatmul,     // A[m,k] * B[k,n]
  kMatmulNT,   // A[m,k] * B[n,k]^T
  kAdd,        // elementwise, same shape
  kAddRowVec,  // A[m,n] + row vector [n]
  kMul,        // Hadamard
  kScale,      // x * attr
  kShift,      // x + attr
  kSigmoid,
  kTanh,
  kRelu,
  kSoftplus,
  kSoftmaxRows,
  kConcatCols,
  kStackRows,
  kGatherRows,
  kReshape,
  kRowDot,  // [m,n],[m,n] -> [m,1]
  kSumAll,
  kSoftmaxBce,  // full-catalog binary cross entropy over softmax rows
};

inline const char* op_name(OpKind k) {
  switch (k) {
    case OpKind::kConstant: return "constant";
    case OpKind::kParameter: return "parameter";
    case OpKind::kMatmul: return "matmul";
    case OpKind::kMatmulNT: return "matmul_nt";
    case OpKind::kAdd: return "add";
    case OpKind::kAddRowVec: return "add_rowvec";
    case OpKind::kMul: return "mul";
    case OpKind::kScale: return "scale";
    case OpKind::kShift: return "shift";
    case OpKind::kSigmoid: return "sigmoid";
    case OpKind::kTanh: return "tanh";
    case OpKind::kRelu: return "relu";
    case OpKind::kSoftplus: return "softplus";
    case OpKind::kSoftmaxRows: return "softmax_rows";
    case OpKind::kConcatCols: return "concat_cols";
    case OpKind::kStackRows: return "stack_rows";
    case OpKind::kGatherRows: return "gather_rows";
    case OpKind::kReshape: return "reshape";
    case OpKind::kRowDot: return "row_dot";
    case OpKind::kSumAll: return "sum_all";
    case OpKind::kSoftmaxBce: return "softmax_bce";
  }
  return "?";
}

// Eager tape: each op runs forward on construction and records enough to
// replay the adjoint in reverse order. One Graph per forward pass.
class Graph {
 public:
  static constexpr double kBceClamp = 1e-12;

  struct Node {
    OpKind kind;
    Tensor value;
    Tensor grad;  // allocated on demand during backward
    Tensor aux;   // softmax_bce stashes probabilities here
    std::vector<int> inputs;
    std::vector<int64_t> ints;  // gather indices / bce labels
    double attr = 0.0;
    Parameter* param = nullptr;
    bool needs_grad = false;
  };

  int constant(Tensor t) {
    Node n{OpKind::kConstant, std::move(t)};
    n.needs_grad = false;
    return push(std::move(n));
  }

  int param(Parameter* p) {
    Node n{OpKind::kParameter, p->value};
    n.param = p;
    n.needs_grad = true;
    return push(std::move(n));
  }

  int matmul(int a, int b) {
    const Tensor &ta = val(a), &tb = val(b);
    require(ta.rank() == 2 && tb.rank() == 2 && ta.cols() == tb.rows(), "matmul", ta, tb);
    Tensor out({ta.rows(), tb.cols()});
    kernels::mm_nn(out.data(), ta.data(), tb.data(), ta.rows(), ta.cols(), tb.cols());
    return push(make(OpKind::kMatmul, std::move(out), {a, b}));
  }

  int matmul_nt(int a, int b) {
    const Tensor &ta = val(a), &tb = val(b);
    require(ta.rank() == 2 && tb.rank() == 2 && ta.cols() == tb.cols(), "matmul_nt", ta, tb);
    Tensor out({ta.rows(), tb.rows()});
    kernels::mm_nt(out.data(), ta.data(), tb.data(), ta.rows(), ta.cols(), tb.rows());
    return push(make(OpKind::kMatmulNT, std::move(out), {a, b}));
  }

  int add(int a, int b) {
    const Tensor &ta = val(a), &tb = val(b);
    require(ta.same_shape(tb), "add", ta, tb);
    Tensor out = ta;
    for (int64_t i = 0; i < out.numel(); ++i) out[i] += tb[i];
    return push(make(OpKind::kAdd, std::move(out), {a, b}));
  }

  int add_rowvec(int a, int b) {
    const Tensor &ta = val(a), &tb = val(b);
    require(ta.rank() == 2 && tb.numel() == ta.cols(), "add_rowvec", ta, tb);
    Tensor out = ta;
    for (int64_t i = 0; i < ta.rows(); ++i)
      for (int64_t j = 0; j < ta.cols(); ++j) out.at(i, j) += tb[j];
    return push(make(OpKind::kAddRowVec, std::move(out), {a, b}));
  }

  int mul(int a, int b) {
    const Tensor &ta = val(a), &tb = val(b);
    require(ta.same_shape(tb), "mul", ta, tb);
    Tensor out = ta;
    for (int64_t i = 0; i < out.numel(); ++i) out[i] *= tb[i];
    return push(make(OpKind::kMul, std::move(out), {a, b}));
  }

  int scale(int a, double c) {
    Tensor out = val(a);
    for (int64_t i = 0; i < out.numel(); ++i) out[i] *= c;
    Node n = make(OpKind::kScale, std::move(out), {a});
    n.attr = c;
    return push(std::move(n));
  }

  int shift(int a, double c) {
    Tensor out = val(a);
    for (int64_t i = 0; i < out.numel(); ++i) out[i] += c;
    Node n = make(OpKind::kShift, std::move(out), {a});
    n.attr = c;
    return push(std::move(n));
  }

  int sigmoid(int a) {
    Tensor out = val(a);
    for (int64_t i = 0; i < out.numel(); ++i) out[i] = kernels::sigmoid(out[i]);
    return push(make(OpKind::kSigmoid, std::move(out), {a}));
  }

  int tanh_(int a) {
    Tensor out = val(a);
    for (int64_t i = 0; i < out.numel(); ++i) out[i] = std::tanh(out[i]);
    return push(make(OpKind::kTanh, std::move(out), {a}));
  }

  int relu(int a) {
    Tensor out = val(a);
    for (int64_t i = 0; i < out.numel(); ++i) out[i] = out[i] > 0 ? out[i] : 0.0;
    return push(make(OpKind::kRelu, std::move(out), {a}));
  }

  int softplus_(int a) {
    Tensor out = val(a);
    for (int64_t i = 0; i < out.numel(); ++i) out[i] = kernels::softplus(out[i]);
    return push(make(OpKind::kSoftplus, std::move(out), {a}));
  }

  int softmax_rows(int a) {
    const Tensor& ta = val(a);
    require(ta.rank() == 2, "softmax_rows", ta, ta);
    Tensor out = ta;
    for (int64_t i = 0; i < out.rows(); ++i) kernels::softmax_row(out.data() + i * out.cols(), out.cols());
    return push(make(OpKind::kSoftmaxRows, std::move(out), {a}));
  }

  int concat_cols(const std::vector<int>& ids) {
    if (ids.empty()) throw ShapeError("concat_cols: no inputs");
    const int64_t m = val(ids[0]).rows();
    int64_t total = 0;
    for (int id : ids) {
      const Tensor& t = val(id);
      require(t.rank() == 2 && t.rows() == m, "concat_cols", val(ids[0]), t);
      total += t.cols();
    }
    Tensor out({m, total});
    int64_t off = 0;
    for (int id : ids) {
      const Tensor& t = val(id);
      for (int64_t i = 0; i < m; ++i)
        for (int64_t j = 0; j < t.cols(); ++j) out.at(i, off + j) = t.at(i, j);
      off += t.cols();
    }
    return push(make(OpKind::kConcatCols, std::move(out), ids));
  }

  int stack_rows(const std::vector<int>& ids) {
    if (ids.empty()) throw ShapeError("stack_rows: no inputs");
    const int64_t n = val(ids[0]).numel();
    for (int id : ids)
      require(val(id).numel() == n && val(id).rows() == 1, "stack_rows", val(ids[0]), val(id));
    Tensor out({static_cast<int64_t>(ids.size()), n});
    for (size_t i = 0; i < ids.size(); ++i) {
      const Tensor& t = val(ids[i]);
      for (int64_t j = 0; j < n; ++j) out.at(static_cast<int64_t>(i), j) = t[j];
    }
    return push(make(OpKind::kStackRows, std::move(out), ids));
  }

  int gather_rows(int src, const std::vector<int64_t>& idx) {
    const Tensor& ts = val(src);
    require(ts.rank() == 2, "gather_rows", ts, ts);
    Tensor out({static_cast<int64_t>(idx.size()), ts.cols()});
    for (size_t i = 0; i < idx.size(); ++i) {
      if (idx[i] < 0 || idx[i] >= ts.rows())
        throw ShapeError("gather_rows: index " + std::to_string(idx[i]) + " out of range for " +
                         shape_str(ts.shape()));
      for (int64_t j = 0; j < ts.cols(); ++j)
        out.at(static_cast<int64_t>(i), j) = ts.at(idx[i], j);
    }
    Node n = make(OpKind::kGatherRows, std::move(out), {src});
    n.ints = idx;
    return push(std::move(n));
  }

  int reshape(int a, std::vector<int64_t> shape) {
    const Tensor& ta = val(a);
    if (Tensor::numel_of(shape) != ta.numel())
      throw ShapeError(std::string("reshape: cannot view ") + shape_str(ta.shape()) + " as " +
                       shape_str(shape));
    Tensor out(std::move(shape));
    for (int64_t i = 0; i < ta.numel(); ++i) out[i] = ta[i];
    return push(make(OpKind::kReshape, std::move(out), {a}));
  }

  int row_dot(int a, int b) {
    const Tensor &ta = val(a), &tb = val(b);
    require(ta.rank() == 2 && ta.same_shape(tb), "row_dot", ta, tb);
    Tensor out({ta.rows(), 1});
    for (int64_t i = 0; i < ta.rows(); ++i)
      out[i] = kernels::dot(ta.data() + i * ta.cols(), tb.data() + i * ta.cols(), ta.cols());
    return push(make(OpKind::kRowDot, std::move(out), {a, b}));
  }

  int sum_all(int a) {
    const Tensor& ta = val(a);
    double s = 0.0;
    for (int64_t i = 0; i < ta.numel(); ++i) s += ta[i];
    return push(make(OpKind::kSumAll, Tensor::scalar(s), {a}));
  }

  // Eq.-3 style loss: softmax per row, then binary cross entropy summed over
  // the full candidate axis, averaged over rows. Probabilities are clamped to
  // [kBceClamp, 1-kBceClamp] before the logs.
  int softmax_bce(int z, const std::vector<int64_t>& labels) {
    const Tensor& tz = val(z);
    require(tz.rank() == 2 && tz.rows() == static_cast<int64_t>(labels.size()), "softmax_bce",
            tz, tz);
    const int64_t rows = tz.rows(), n = tz.cols();
    Tensor probs = tz;
    double total = 0.0;
    for (int64_t i = 0; i < rows; ++i) {
      double* p = probs.data() + i * n;
      kernels::softmax_row(p, n);
      if (labels[i] < 0 || labels[i] >= n)
        throw ShapeError("softmax_bce: label " + std::to_string(labels[i]) +
                         " out of range for " + shape_str(tz.shape()));
      double row_loss = 0.0;
      for (int64_t j = 0; j < n; ++j) {
        const double pc = clamp01(p[j]);
        if (j == labels[i])
          row_loss -= std::log(pc);
        else
          row_loss -= std::log(1.0 - pc);
      }
      total += row_loss;
    }
    Node node = make(OpKind::kSoftmaxBce, Tensor::scalar(total / static_cast<double>(rows)), {z});
    node.ints = labels;
    node.aux = std::move(probs);
    return push(std::move(node));
  }

  const Tensor& val(int id) const { return nodes_[static_cast<size_t>(id)].value; }
  const Tensor& grad(int id) const { return nodes_[static_cast<size_t>(id)].grad; }
  const Node& node(int id) const { return nodes_[static_cast<size_t>(id)]; }
  size_t size() const { return nodes_.size(); }

  // Reverse sweep from a scalar output. Every recorded op is visited exactly
  // once, newest first; parameter leaves accumulate into Parameter::grad.
  void backward(int loss, std::vector<int>* visit_trace = nullptr) {
    Node& ln = nodes_[static_cast<size_t>(loss)];
    if (ln.value.numel() != 1)
      throw ShapeError("backward requires a scalar output, got " + shape_str(ln.value.shape()));
    ensure_grad(loss);
    ln.grad.fill(1.0);
    for (int id = loss; id >= 0; --id) {
      Node& n = nodes_[static_cast<size_t>(id)];
      if (!n.needs_grad || n.grad.numel() == 0) continue;
      if (visit_trace) visit_trace->push_back(id);
      backward_one(n);
    }
  }

  bool all_values_finite() const {
    for (const auto& n : nodes_)
      if (!n.value.all_finite()) return false;
    return true;
  }

  bool all_grads_finite() const {
    for (const auto& n : nodes_)
      if (n.grad.numel() > 0 && !n.grad.all_finite()) return false;
    return true;
  }

 private:
  std::deque<Node> nodes_;  // stable references while new ops are recorded

  static double clamp01(double p) {
    if (p < kBceClamp) return kBceClamp;
    if (p > 1.0 - kBceClamp) return 1.0 - kBceClamp;
    return p;
  }

  Node make(OpKind kind, Tensor out, std::vector<int> inputs) {
    Node n{kind, std::move(out)};
    n.inputs = std::move(inputs);
    for (int id : n.inputs)
      if (nodes_[static_cast<size_t>(id)].needs_grad) n.needs_grad = true;
    return n;
  }

  int push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
  }

  void require(bool ok, const char* op, const Tensor& a, const Tensor& b) const {
    if (!ok)
      throw ShapeError(std::string(op) + ": incompatible shapes " + shape_str(a.shape()) +
                       " and " + shape_str(b.shape()));
  }

  Tensor& ensure_grad(int id) {
    Node& n = nodes_[static_cast<size_t>(id)];
    if (n.grad.numel() == 0) n.grad = Tensor::zeros(n.value.shape());
    return n.grad;
  }

  void backward_one(Node& n) {
    const Tensor& g = n.grad;
    switch (n.kind) {
      case OpKind::kConstant:
        break;
      case OpKind::kParameter:
        for (int64_t i = 0; i < g.numel(); ++i) n.param->grad[i] += g[i];
        break;
      case OpKind::kMatmul: {
        const Tensor &a = val(n.inputs[0]), &b = val(n.inputs[1]);
        if (wants(n.inputs[0]))
          kernels::mm_nt(ensure_grad(n.inputs[0]).data(), g.data(), b.data(), a.rows(), b.cols(),
                         a.cols(), true);
        if (wants(n.inputs[1]))
          kernels::mm_tn_acc(ensure_grad(n.inputs[1]).data(), a.data(), g.data(), a.rows(),
                             a.cols(), b.cols());
        break;
      }
      case OpKind::kMatmulNT: {
        // C = A * B^T: dA += dC * B, dB += dC^T * A
        const Tensor &a = val(n.inputs[0]), &b = val(n.inputs[1]);
        if (wants(n.inputs[0]))
          kernels::mm_nn(ensure_grad(n.inputs[0]).data(), g.data(), b.data(), a.rows(), b.rows(),
                         a.cols(), true);
        if (wants(n.inputs[1]))
          kernels::mm_tn_acc(ensure_grad(n.inputs[1]).data(), g.data(), a.data(), a.rows(),
                             b.rows(), a.cols());
        break;
      }
      case OpKind::kAdd:
        for (int k = 0; k < 2; ++k)
          if (wants(n.inputs[k])) {
            Tensor& gi = ensure_grad(n.inputs[k]);
            for (int64_t i = 0; i < g.numel(); ++i) gi[i] += g[i];
          }
        break;
      case OpKind::kAddRowVec: {
        if (wants(n.inputs[0])) {
          Tensor& gi = ensure_grad(n.inputs[0]);
          for (int64_t i = 0; i < g.numel(); ++i) gi[i] += g[i];
        }
        if (wants(n.inputs[1])) {
          Tensor& gb = ensure_grad(n.inputs[1]);
          for (int64_t i = 0; i < g.rows(); ++i)
            for (int64_t j = 0; j < g.cols(); ++j) gb[j] += g.at(i, j);
        }
        break;
      }
      case OpKind::kMul: {
        const Tensor &a = val(n.inputs[0]), &b = val(n.inputs[1]);
        if (wants(n.inputs[0])) {
          Tensor& gi = ensure_grad(n.inputs[0]);
          for (int64_t i = 0; i < g.numel(); ++i) gi[i] += g[i] * b[i];
        }
        if (wants(n.inputs[1])) {
          Tensor& gi = ensure_grad(n.inputs[1]);
          for (int64_t i = 0; i < g.numel(); ++i) gi[i] += g[i] * a[i];
        }
        break;
      }
      case OpKind::kScale:
        if (wants(n.inputs[0])) {
          Tensor& gi = ensure_grad(n.inputs[0]);
          for (int64_t i = 0; i < g.numel(); ++i) gi[i] += g[i] * n.attr;
        }
        break;
      case OpKind::kShift:
      case OpKind::kReshape:
        if (wants(n.inputs[0])) {
          Tensor& gi = ensure_grad(n.inputs[0]);
          for (int64_t i = 0; i < g.numel(); ++i) gi[i] += g[i];
        }
        break;
      case OpKind::kSigmoid:
        if (wants(n.inputs[0])) {
          Tensor& gi = ensure_grad(n.inputs[0]);
          for (int64_t i = 0; i < g.numel(); ++i)
            gi[i] += g[i] * n.value[i] * (1.0 - n.value[i]);
        }
        break;
      case OpKind::kTanh:
        if (wants(n.inputs[0])) {
          Tensor& gi = ensure_grad(n.inputs[0]);
          for (int64_t i = 0; i < g.numel(); ++i)
            gi[i] += g[i] * (1.0 - n.value[i] * n.value[i]);
        }
        break;
      case OpKind::kRelu: {
        const Tensor& a = val(n.inputs[0]);
        if (wants(n.inputs[0])) {
          Tensor& gi = ensure_grad(n.inputs[0]);
          for (int64_t i = 0; i < g.numel(); ++i) gi[i] += a[i] > 0 ? g[i] : 0.0;
        }
        break;
      }
      case OpKind::kSoftplus: {
        const Tensor& a = val(n.inputs[0]);
        if (wants(n.inputs[0])) {
          Tensor& gi = ensure_grad(n.inputs[0]);
          for (int64_t i = 0; i < g.numel(); ++i) gi[i] += g[i] * kernels::sigmoid(a[i]);
        }
        break;
      }
      case OpKind::kSoftmaxRows: {
        if (wants(n.inputs[0])) {
          Tensor& gi = ensure_grad(n.inputs[0]);
          const int64_t rows = n.value.rows(), cols = n.value.cols();
          for (int64_t i = 0; i < rows; ++i) {
            const double* p = n.value.data() + i * cols;
            const double* gr = g.data() + i * cols;
            double s = 0.0;
            for (int64_t j = 0; j < cols; ++j) s += gr[j] * p[j];
            double* gd = gi.data() + i * cols;
            for (int64_t j = 0; j < cols; ++j) gd[j] += p[j] * (gr[j] - s);
          }
        }
        break;
      }
      case OpKind::kConcatCols: {
        int64_t off = 0;
        for (int id : n.inputs) {
          const Tensor& t = val(id);
          if (wants(id)) {
            Tensor& gi = ensure_grad(id);
            for (int64_t i = 0; i < t.rows(); ++i)
              for (int64_t j = 0; j < t.cols(); ++j) gi.at(i, j) += g.at(i, off + j);
          }
          off += t.cols();
        }
        break;
      }
      case OpKind::kStackRows: {
        for (size_t k = 0; k < n.inputs.size(); ++k) {
          if (!wants(n.inputs[k])) continue;
          Tensor& gi = ensure_grad(n.inputs[k]);
          for (int64_t j = 0; j < g.cols(); ++j) gi[j] += g.at(static_cast<int64_t>(k), j);
        }
        break;
      }
      case OpKind::kGatherRows: {
        if (wants(n.inputs[0])) {
          Tensor& gi = ensure_grad(n.inputs[0]);
          const int64_t cols = g.cols();
          for (size_t i = 0; i < n.ints.size(); ++i)
            for (int64_t j = 0; j < cols; ++j)
              gi.at(n.ints[i], j) += g.at(static_cast<int64_t>(i), j);
        }
        break;
      }
      case OpKind::kRowDot: {
        const Tensor &a = val(n.inputs[0]), &b = val(n.inputs[1]);
        const int64_t cols = a.cols();
        if (wants(n.inputs[0])) {
          Tensor& gi = ensure_grad(n.inputs[0]);
          for (int64_t i = 0; i < a.rows(); ++i)
            for (int64_t j = 0; j < cols; ++j) gi.at(i, j) += g[i] * b.at(i, j);
        }
        if (wants(n.inputs[1])) {
          Tensor& gi = ensure_grad(n.inputs[1]);
          for (int64_t i = 0; i < a.rows(); ++i)
            for (int64_t j = 0; j < cols; ++j) gi.at(i, j) += g[i] * a.at(i, j);
        }
        break;
      }
      case OpKind::kSumAll:
        if (wants(n.inputs[0])) {
          Tensor& gi = ensure_grad(n.inputs[0]);
          for (int64_t i = 0; i < gi.numel(); ++i) gi[i] += g[0];
        }
        break;
      case OpKind::kSoftmaxBce: {
        if (!wants(n.inputs[0])) break;
        Tensor& gz = ensure_grad(n.inputs[0]);
        const int64_t rows = n.aux.rows(), cols = n.aux.cols();
        const double scale = g[0] / static_cast<double>(rows);
        for (int64_t i = 0; i < rows; ++i) {
          const double* p = n.aux.data() + i * cols;
          double* gd = gz.data() + i * cols;
          const int64_t y = n.ints[static_cast<size_t>(i)];
          // dL/dp, zero where the clamp saturates the log
          double s = 0.0;
          for (int64_t j = 0; j < cols; ++j) {
            double dldp = 0.0;
            if (p[j] > kBceClamp && p[j] < 1.0 - kBceClamp)
              dldp = (j == y) ? -1.0 / p[j] : 1.0 / (1.0 - p[j]);
            s += dldp * p[j];
            gd[j] += scale * dldp * p[j];  // first half of p*(dldp - s)
          }
          for (int64_t j = 0; j < cols; ++j) gd[j] -= scale * p[j] * s;
        }
        break;
      }
    }
  }

  bool wants(int id) {
    return nodes_[static_cast<size_t>(id)].needs_grad;
  }
};

}  // namespace sessrec
