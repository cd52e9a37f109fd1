/* Copyright 2026 The ADVSE Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "advse/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "advse/error.hpp"

namespace advse {

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

void Parameter::zero_grad() {
  grad.assign(value.size(), 0.0);
}

const char* op_name(OpKind kind) {
  switch (kind) {
    case OpKind::kConstant: return "constant";
    case OpKind::kParameter: return "parameter";
    case OpKind::kMatmul: return "matmul";
    case OpKind::kLinear: return "linear";
    case OpKind::kHadamard: return "hadamard";
    case OpKind::kRowHadamard: return "row_hadamard";
    case OpKind::kAdd: return "add";
    case OpKind::kSub: return "sub";
    case OpKind::kScale: return "scale";
    case OpKind::kMulScalar: return "mul_scalar";
    case OpKind::kOneMinus: return "one_minus";
    case OpKind::kConcat: return "concat";
    case OpKind::kStackRows: return "stack_rows";
    case OpKind::kTanh: return "tanh";
    case OpKind::kRelu: return "relu";
    case OpKind::kSigmoid: return "sigmoid";
    case OpKind::kExp: return "exp";
    case OpKind::kSoftmax: return "softmax_lastdim";
    case OpKind::kMaskedSoftmax: return "masked_softmax";
    case OpKind::kEmbedding: return "embedding_lookup";
    case OpKind::kWeightedSum: return "weighted_sum";
    case OpKind::kSum: return "sum";
    case OpKind::kDot: return "dot";
    case OpKind::kL1Normalize: return "l1_normalize";
    case OpKind::kL2Normalize: return "l2_normalize";
    case OpKind::kRowDiff: return "row_difference";
    case OpKind::kSelect: return "select";
    case OpKind::kCrossEntropy: return "cross_entropy";
    case OpKind::kGruCell: return "gru_cell";
  }
  return "unknown";
}

// Grants the free-function ops access to tape internals.
struct TapeAccess {
  using Node = Tape::Node;
  static const Node& node(const Tensor& t) { return t.tape()->node(t.id()); }
  static Tensor record(Tape* tape, Node node) {
    return tape->record(std::move(node));
  }
};

namespace {

using Node = TapeAccess::Node;

const Node& N(const Tensor& t) {
  if (!t.defined()) throw Error("operation on an undefined tensor");
  return TapeAccess::node(t);
}

Tape* common_tape(std::initializer_list<const Tensor*> ts) {
  Tape* tape = nullptr;
  for (const Tensor* t : ts) {
    if (!t->defined()) continue;
    if (tape == nullptr) tape = t->tape();
    else if (tape != t->tape()) throw Error("tensors from different tapes");
  }
  if (tape == nullptr) throw Error("operation on undefined tensors");
  return tape;
}

[[noreturn]] void shape_mismatch(const char* op, const Shape& a, const Shape& b) {
  throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a) +
                   " vs " + shape_string(b));
}

Node make(OpKind kind, Shape shape, std::initializer_list<const Tensor*> ins) {
  Node n;
  n.kind = kind;
  n.shape = std::move(shape);
  n.value.assign(numel(n.shape), 0.0);
  n.inputs.reserve(ins.size());
  for (const Tensor* t : ins) {
    if (!t->defined()) continue;
    n.inputs.push_back(t->id());
    n.requires_grad = n.requires_grad || N(*t).requires_grad;
  }
  return n;
}

std::size_t rows_of(const Shape& s) { return s.size() == 2 ? s[0] : 1; }
std::size_t cols_of(const Shape& s) { return s.back(); }

void softmax_inplace(std::span<double> v) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : v) mx = std::max(mx, x);
  double total = 0.0;
  for (double& x : v) {
    x = std::exp(x - mx);
    total += x;
  }
  for (double& x : v) x /= total;
}

double sigmoid_scalar(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// y (n) += A (n x k) x (k)
void gemv_add(const double* a, const double* x, double* y, std::size_t n,
              std::size_t k) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = a + i * k;
    double acc = 0.0;
    for (std::size_t j = 0; j < k; ++j) acc += row[j] * x[j];
    y[i] += acc;
  }
}

// y (k) += A^T (k x n) x (n)
void gemv_t_add(const double* a, const double* x, double* y, std::size_t n,
                std::size_t k) {
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    const double* row = a + i * k;
    for (std::size_t j = 0; j < k; ++j) y[j] += row[j] * xi;
  }
}

// G (n x k) += u (n) v^T (k)
void outer_add(const double* u, const double* v, double* g, std::size_t n,
               std::size_t k) {
  for (std::size_t i = 0; i < n; ++i) {
    const double ui = u[i];
    if (ui == 0.0) continue;
    double* row = g + i * k;
    for (std::size_t j = 0; j < k; ++j) row[j] += ui * v[j];
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Tensor
// ---------------------------------------------------------------------------

const Shape& Tensor::shape() const { return N(*this).shape; }
std::span<const double> Tensor::values() const { return N(*this).value; }
std::size_t Tensor::size() const { return N(*this).value.size(); }
bool Tensor::requires_grad() const { return N(*this).requires_grad; }
std::vector<double> Tensor::to_vector() const {
  const auto v = values();
  return {v.begin(), v.end()};
}

double Tensor::item() const {
  const Node& n = N(*this);
  if (n.value.size() != 1) {
    throw ShapeError("item() on tensor of shape " + shape_string(n.shape));
  }
  return n.value[0];
}

// ---------------------------------------------------------------------------
// Tape
// ---------------------------------------------------------------------------

Tensor Tape::record(Node node) {
  for (double v : node.value) {
    if (!std::isfinite(v)) {
      throw NumericError(std::string("non-finite value produced by ") +
                         op_name(node.kind));
    }
  }
  nodes_.push_back(std::move(node));
  return Tensor(this, static_cast<NodeId>(nodes_.size() - 1));
}

Tensor Tape::constant(Shape shape, std::vector<double> values) {
  if (shape.empty() || shape.size() > 2 || numel(shape) == 0) {
    throw ShapeError("constant: unsupported shape " + shape_string(shape));
  }
  if (numel(shape) != values.size()) {
    throw ShapeError("constant: shape " + shape_string(shape) + " holds " +
                     std::to_string(numel(shape)) + " values, got " +
                     std::to_string(values.size()));
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw NumericError("constant: non-finite input");
  }
  Node n;
  n.kind = OpKind::kConstant;
  n.shape = std::move(shape);
  n.value = std::move(values);
  return record(std::move(n));
}

Tensor Tape::parameter(Parameter& param) {
  if (auto it = param_nodes_.find(&param); it != param_nodes_.end()) {
    return Tensor(this, it->second);
  }
  if (numel(param.shape) != param.value.size()) {
    throw ShapeError("parameter '" + param.name + "' has shape " +
                     shape_string(param.shape) + " but " +
                     std::to_string(param.value.size()) + " values");
  }
  for (double v : param.value) {
    if (!std::isfinite(v)) {
      throw NumericError("parameter '" + param.name + "' is non-finite");
    }
  }
  Node n;
  n.kind = OpKind::kParameter;
  n.shape = param.shape;
  n.value = param.value;
  n.param = &param;
  n.requires_grad = true;
  Tensor t = record(std::move(n));
  param_nodes_.emplace(&param, t.id());
  return t;
}

void Tape::clear() {
  nodes_.clear();
  grads_.clear();
  param_nodes_.clear();
}

std::vector<double> Tape::grad(const Tensor& t) const {
  if (t.tape() != this) throw Error("grad(): tensor from another tape");
  if (t.id() < grads_.size() && !grads_[t.id()].empty()) return grads_[t.id()];
  return std::vector<double>(nodes_[t.id()].value.size(), 0.0);
}

void Tape::backward(const Tensor& loss, bool accumulate) {
  if (loss.tape() != this) throw Error("backward(): loss from another tape");
  const Node& ln = nodes_[loss.id()];
  if (ln.value.size() != 1) {
    throw ShapeError("backward() needs a scalar loss, got shape " +
                     shape_string(ln.shape));
  }
  grads_.assign(nodes_.size(), {});
  grads_[loss.id()] = {1.0};
  for (NodeId id = loss.id() + 1; id-- > 0;) {
    if (grads_[id].empty() || !nodes_[id].requires_grad) continue;
    backward_node(id);
  }
  if (!accumulate) return;
  for (const auto& [param, id] : param_nodes_) {
    if (id >= grads_.size() || grads_[id].empty()) continue;
    auto* p = const_cast<Parameter*>(param);
    if (p->grad.size() != p->value.size()) p->grad.assign(p->value.size(), 0.0);
    const auto& g = grads_[id];
    for (std::size_t i = 0; i < g.size(); ++i) p->grad[i] += g[i];
  }
}

void Tape::backward_node(NodeId id) {
  const Node& n = nodes_[id];
  const std::vector<double>& gy = grads_[id];
  auto in_grad = [&](std::size_t slot) -> double* {
    const NodeId in = n.inputs[slot];
    if (!nodes_[in].requires_grad) return nullptr;
    auto& g = grads_[in];
    if (g.empty()) g.assign(nodes_[in].value.size(), 0.0);
    return g.data();
  };
  auto in_val = [&](std::size_t slot) -> const std::vector<double>& {
    return nodes_[n.inputs[slot]].value;
  };
  auto in_shape = [&](std::size_t slot) -> const Shape& {
    return nodes_[n.inputs[slot]].shape;
  };

  switch (n.kind) {
    case OpKind::kConstant:
    case OpKind::kParameter:
      break;

    case OpKind::kMatmul: {
      const Shape& sa = in_shape(0);
      const Shape& sb = in_shape(1);
      const auto& a = in_val(0);
      const auto& b = in_val(1);
      if (sa.size() == 1) {
        // (k)(k x m) -> (m)
        const std::size_t k = sb[0], m = sb[1];
        if (double* ga = in_grad(0)) gemv_add(b.data(), gy.data(), ga, k, m);
        if (double* gb = in_grad(1)) outer_add(a.data(), gy.data(), gb, k, m);
        break;
      }
      const std::size_t rows = sa[0], k = sa[1];
      const std::size_t m = sb.size() == 2 ? sb[1] : 1;
      double* ga = in_grad(0);
      double* gb = in_grad(1);
      for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
          const double g = gy[i * m + j];
          if (g == 0.0) continue;
          for (std::size_t p = 0; p < k; ++p) {
            if (ga) ga[i * k + p] += g * b[p * m + j];
            if (gb) gb[p * m + j] += g * a[i * k + p];
          }
        }
      }
      break;
    }

    case OpKind::kLinear: {
      const Shape& sw = in_shape(0);
      const std::size_t out = sw[0], in = sw[1];
      const std::size_t rows = rows_of(in_shape(1));
      const auto& w = in_val(0);
      const auto& x = in_val(1);
      double* gw = in_grad(0);
      double* gx = in_grad(1);
      double* gb = n.inputs.size() > 2 ? in_grad(2) : nullptr;
      for (std::size_t r = 0; r < rows; ++r) {
        const double* gyr = gy.data() + r * out;
        const double* xr = x.data() + r * in;
        if (gx) gemv_t_add(w.data(), gyr, gx + r * in, out, in);
        if (gw) outer_add(gyr, xr, gw, out, in);
        if (gb) for (std::size_t o = 0; o < out; ++o) gb[o] += gyr[o];
      }
      break;
    }

    case OpKind::kHadamard: {
      const auto& a = in_val(0);
      const auto& b = in_val(1);
      if (double* ga = in_grad(0))
        for (std::size_t i = 0; i < gy.size(); ++i) ga[i] += gy[i] * b[i];
      if (double* gb = in_grad(1))
        for (std::size_t i = 0; i < gy.size(); ++i) gb[i] += gy[i] * a[i];
      break;
    }

    case OpKind::kRowHadamard: {
      const auto& m = in_val(0);
      const auto& v = in_val(1);
      const std::size_t rows = n.shape[0], cols = n.shape[1];
      double* gm = in_grad(0);
      double* gv = in_grad(1);
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
          const double g = gy[r * cols + c];
          if (gm) gm[r * cols + c] += g * v[c];
          if (gv) gv[c] += g * m[r * cols + c];
        }
      }
      break;
    }

    case OpKind::kAdd:
    case OpKind::kSub: {
      const double sign = n.kind == OpKind::kAdd ? 1.0 : -1.0;
      if (double* ga = in_grad(0))
        for (std::size_t i = 0; i < gy.size(); ++i) ga[i] += gy[i];
      if (double* gb = in_grad(1))
        for (std::size_t i = 0; i < gy.size(); ++i) gb[i] += sign * gy[i];
      break;
    }

    case OpKind::kScale: {
      if (double* gx = in_grad(0))
        for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += n.scalar * gy[i];
      break;
    }

    case OpKind::kMulScalar: {
      const auto& x = in_val(0);
      const double s = in_val(1)[0];
      if (double* gx = in_grad(0))
        for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += s * gy[i];
      if (double* gs = in_grad(1)) {
        double acc = 0.0;
        for (std::size_t i = 0; i < gy.size(); ++i) acc += gy[i] * x[i];
        gs[0] += acc;
      }
      break;
    }

    case OpKind::kOneMinus: {
      if (double* gx = in_grad(0))
        for (std::size_t i = 0; i < gy.size(); ++i) gx[i] -= gy[i];
      break;
    }

    case OpKind::kConcat:
    case OpKind::kStackRows: {
      std::size_t offset = 0;
      for (std::size_t s = 0; s < n.inputs.size(); ++s) {
        const std::size_t len = nodes_[n.inputs[s]].value.size();
        if (double* g = in_grad(s))
          for (std::size_t i = 0; i < len; ++i) g[i] += gy[offset + i];
        offset += len;
      }
      break;
    }

    case OpKind::kTanh: {
      if (double* gx = in_grad(0))
        for (std::size_t i = 0; i < gy.size(); ++i)
          gx[i] += gy[i] * (1.0 - n.value[i] * n.value[i]);
      break;
    }

    case OpKind::kRelu: {
      if (double* gx = in_grad(0))
        for (std::size_t i = 0; i < gy.size(); ++i)
          if (n.value[i] > 0.0) gx[i] += gy[i];
      break;
    }

    case OpKind::kSigmoid: {
      if (double* gx = in_grad(0))
        for (std::size_t i = 0; i < gy.size(); ++i)
          gx[i] += gy[i] * n.value[i] * (1.0 - n.value[i]);
      break;
    }

    case OpKind::kExp: {
      if (double* gx = in_grad(0))
        for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i] * n.value[i];
      break;
    }

    case OpKind::kSoftmax:
    case OpKind::kMaskedSoftmax: {
      double* gx = in_grad(0);
      if (!gx) break;
      const std::size_t rows = rows_of(n.shape), cols = cols_of(n.shape);
      for (std::size_t r = 0; r < rows; ++r) {
        const double* y = n.value.data() + r * cols;
        const double* g = gy.data() + r * cols;
        double inner = 0.0;
        for (std::size_t c = 0; c < cols; ++c) inner += g[c] * y[c];
        for (std::size_t c = 0; c < cols; ++c)
          gx[r * cols + c] += y[c] * (g[c] - inner);
      }
      break;
    }

    case OpKind::kEmbedding: {
      if (double* gt = in_grad(0)) {
        const std::size_t d = n.value.size();
        for (std::size_t i = 0; i < d; ++i) gt[n.index * d + i] += gy[i];
      }
      break;
    }

    case OpKind::kWeightedSum: {
      const auto& w = in_val(0);
      const auto& m = in_val(1);
      const std::size_t rows = w.size(), cols = gy.size();
      double* gw = in_grad(0);
      double* gm = in_grad(1);
      for (std::size_t r = 0; r < rows; ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < cols; ++c) {
          acc += gy[c] * m[r * cols + c];
          if (gm) gm[r * cols + c] += w[r] * gy[c];
        }
        if (gw) gw[r] += acc;
      }
      break;
    }

    case OpKind::kSum: {
      if (double* gx = in_grad(0)) {
        const std::size_t len = in_val(0).size();
        for (std::size_t i = 0; i < len; ++i) gx[i] += gy[0];
      }
      break;
    }

    case OpKind::kDot: {
      const auto& a = in_val(0);
      const auto& b = in_val(1);
      if (double* ga = in_grad(0))
        for (std::size_t i = 0; i < a.size(); ++i) ga[i] += gy[0] * b[i];
      if (double* gb = in_grad(1))
        for (std::size_t i = 0; i < b.size(); ++i) gb[i] += gy[0] * a[i];
      break;
    }

    case OpKind::kL1Normalize: {
      double* gx = in_grad(0);
      if (!gx) break;
      const double s = n.scalar;
      double inner = 0.0;
      for (std::size_t i = 0; i < gy.size(); ++i) inner += gy[i] * n.value[i];
      for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += (gy[i] - inner) / s;
      break;
    }

    case OpKind::kL2Normalize: {
      double* gx = in_grad(0);
      if (!gx) break;
      const double s = n.scalar;
      const double r = n.saved[0];
      double inner = 0.0;
      for (std::size_t i = 0; i < gy.size(); ++i) inner += gy[i] * n.value[i];
      for (std::size_t i = 0; i < gy.size(); ++i) {
        gx[i] += gy[i] / s - (r > 0.0 ? n.value[i] * inner / r : 0.0);
      }
      break;
    }

    case OpKind::kRowDiff: {
      double* gm = in_grad(0);
      if (!gm) break;
      const std::size_t rows = n.shape[0], cols = n.shape[1];
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
          const double g = gy[r * cols + c];
          gm[n.index * cols + c] += g;
          gm[r * cols + c] -= g;
        }
      }
      break;
    }

    case OpKind::kSelect: {
      if (double* gx = in_grad(0)) gx[n.index] += gy[0];
      break;
    }

    case OpKind::kCrossEntropy: {
      if (double* gx = in_grad(0)) {
        const auto& p = n.saved;
        for (std::size_t i = 0; i < p.size(); ++i) {
          gx[i] += gy[0] * (p[i] - (i == n.index ? 1.0 : 0.0));
        }
      }
      break;
    }

    case OpKind::kGruCell: {
      const auto& x = in_val(0);
      const auto& h = in_val(1);
      const auto& wi = in_val(2);
      const auto& wh = in_val(3);
      const std::size_t hd = h.size(), in = x.size();
      const double* r = n.saved.data();
      const double* z = r + hd;
      const double* nn = z + hd;
      const double* ghn = nn + hd;
      std::vector<double> dgi(3 * hd), dgh(3 * hd);
      std::vector<double> dh_direct(hd);
      for (std::size_t i = 0; i < hd; ++i) {
        const double g = gy[i];
        const double dn = g * (1.0 - z[i]);
        const double dz = g * (h[i] - nn[i]);
        dh_direct[i] = g * z[i];
        const double dn_pre = dn * (1.0 - nn[i] * nn[i]);
        const double dr = dn_pre * ghn[i];
        const double dr_pre = dr * r[i] * (1.0 - r[i]);
        const double dz_pre = dz * z[i] * (1.0 - z[i]);
        dgi[i] = dr_pre;
        dgi[hd + i] = dz_pre;
        dgi[2 * hd + i] = dn_pre;
        dgh[i] = dr_pre;
        dgh[hd + i] = dz_pre;
        dgh[2 * hd + i] = dn_pre * r[i];
      }
      if (double* gx = in_grad(0)) gemv_t_add(wi.data(), dgi.data(), gx, 3 * hd, in);
      if (double* gh = in_grad(1)) {
        gemv_t_add(wh.data(), dgh.data(), gh, 3 * hd, hd);
        for (std::size_t i = 0; i < hd; ++i) gh[i] += dh_direct[i];
      }
      if (double* gwi = in_grad(2)) outer_add(dgi.data(), x.data(), gwi, 3 * hd, in);
      if (double* gwh = in_grad(3)) outer_add(dgh.data(), h.data(), gwh, 3 * hd, hd);
      if (double* gbi = in_grad(4))
        for (std::size_t i = 0; i < 3 * hd; ++i) gbi[i] += dgi[i];
      if (double* gbh = in_grad(5))
        for (std::size_t i = 0; i < 3 * hd; ++i) gbh[i] += dgh[i];
      break;
    }
  }
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  Tape* tape = common_tape({&a, &b});
  const Shape& sa = N(a).shape;
  const Shape& sb = N(b).shape;
  const auto& av = N(a).value;
  const auto& bv = N(b).value;
  if (sa.size() == 1) {
    if (sb.size() != 2 || sb[0] != sa[0]) shape_mismatch("matmul", sa, sb);
    const std::size_t k = sb[0], m = sb[1];
    Node n = make(OpKind::kMatmul, {m}, {&a, &b});
    gemv_t_add(bv.data(), av.data(), n.value.data(), k, m);
    return TapeAccess::record(tape, std::move(n));
  }
  if (sa.size() != 2 || sa[1] != sb[0]) shape_mismatch("matmul", sa, sb);
  const std::size_t rows = sa[0], k = sa[1];
  if (sb.size() == 1) {
    Node n = make(OpKind::kMatmul, {rows}, {&a, &b});
    gemv_add(av.data(), bv.data(), n.value.data(), rows, k);
    return TapeAccess::record(tape, std::move(n));
  }
  const std::size_t m = sb[1];
  Node n = make(OpKind::kMatmul, {rows, m}, {&a, &b});
  for (std::size_t i = 0; i < rows; ++i) {
    double* out = n.value.data() + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = av[i * k + p];
      const double* brow = bv.data() + p * m;
      for (std::size_t j = 0; j < m; ++j) out[j] += aip * brow[j];
    }
  }
  return TapeAccess::record(tape, std::move(n));
}

Tensor linear(const Tensor& weight, const Tensor& x, const Tensor& bias) {
  Tape* tape = common_tape({&weight, &x, &bias});
  const Shape& sw = N(weight).shape;
  const Shape& sx = N(x).shape;
  if (sw.size() != 2 || sx.back() != sw[1]) shape_mismatch("linear", sw, sx);
  const std::size_t out = sw[0], in = sw[1];
  if (bias.defined() && N(bias).shape != Shape{out}) {
    shape_mismatch("linear bias", N(bias).shape, {out});
  }
  const std::size_t rows = rows_of(sx);
  Shape shape = sx.size() == 2 ? Shape{rows, out} : Shape{out};
  Node n = make(OpKind::kLinear, std::move(shape), {&weight, &x, &bias});
  const auto& w = N(weight).value;
  const auto& xv = N(x).value;
  for (std::size_t r = 0; r < rows; ++r) {
    double* y = n.value.data() + r * out;
    if (bias.defined()) std::copy_n(N(bias).value.data(), out, y);
    gemv_add(w.data(), xv.data() + r * in, y, out, in);
  }
  return TapeAccess::record(tape, std::move(n));
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  Tape* tape = common_tape({&a, &b});
  if (N(a).shape != N(b).shape) shape_mismatch("hadamard", N(a).shape, N(b).shape);
  Node n = make(OpKind::kHadamard, N(a).shape, {&a, &b});
  for (std::size_t i = 0; i < n.value.size(); ++i)
    n.value[i] = N(a).value[i] * N(b).value[i];
  return TapeAccess::record(tape, std::move(n));
}

Tensor row_hadamard(const Tensor& m, const Tensor& v) {
  Tape* tape = common_tape({&m, &v});
  const Shape& sm = N(m).shape;
  const Shape& sv = N(v).shape;
  if (sm.size() != 2 || sv.size() != 1 || sm[1] != sv[0]) {
    shape_mismatch("row_hadamard", sm, sv);
  }
  Node n = make(OpKind::kRowHadamard, sm, {&m, &v});
  const std::size_t cols = sm[1];
  for (std::size_t i = 0; i < n.value.size(); ++i)
    n.value[i] = N(m).value[i] * N(v).value[i % cols];
  return TapeAccess::record(tape, std::move(n));
}

namespace {
Tensor add_sub(OpKind kind, const Tensor& a, const Tensor& b) {
  Tape* tape = common_tape({&a, &b});
  if (N(a).shape != N(b).shape) shape_mismatch(op_name(kind), N(a).shape, N(b).shape);
  Node n = make(kind, N(a).shape, {&a, &b});
  const double sign = kind == OpKind::kAdd ? 1.0 : -1.0;
  for (std::size_t i = 0; i < n.value.size(); ++i)
    n.value[i] = N(a).value[i] + sign * N(b).value[i];
  return TapeAccess::record(tape, std::move(n));
}

template <typename F>
Tensor unary(OpKind kind, const Tensor& x, F f) {
  Tape* tape = common_tape({&x});
  Node n = make(kind, N(x).shape, {&x});
  const auto& xv = N(x).value;
  for (std::size_t i = 0; i < xv.size(); ++i) n.value[i] = f(xv[i]);
  return TapeAccess::record(tape, std::move(n));
}
}  // namespace

Tensor add(const Tensor& a, const Tensor& b) { return add_sub(OpKind::kAdd, a, b); }
Tensor sub(const Tensor& a, const Tensor& b) { return add_sub(OpKind::kSub, a, b); }

Tensor scale(const Tensor& x, double c) {
  Tape* tape = common_tape({&x});
  Node n = make(OpKind::kScale, N(x).shape, {&x});
  n.scalar = c;
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] = c * N(x).value[i];
  return TapeAccess::record(tape, std::move(n));
}

Tensor mul_scalar(const Tensor& x, const Tensor& s) {
  Tape* tape = common_tape({&x, &s});
  if (N(s).value.size() != 1) shape_mismatch("mul_scalar", N(s).shape, {1});
  Node n = make(OpKind::kMulScalar, N(x).shape, {&x, &s});
  const double sv = N(s).value[0];
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] = sv * N(x).value[i];
  return TapeAccess::record(tape, std::move(n));
}

Tensor one_minus(const Tensor& x) {
  return unary(OpKind::kOneMinus, x, [](double v) { return 1.0 - v; });
}

Tensor concat(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  Tape* tape = parts[0].tape();
  std::size_t total = 0;
  for (const Tensor& p : parts) {
    if (p.tape() != tape) throw Error("concat: tensors from different tapes");
    if (N(p).shape.size() != 1) shape_mismatch("concat", N(p).shape, {total});
    total += N(p).value.size();
  }
  Node n;
  n.kind = OpKind::kConcat;
  n.shape = {total};
  n.value.reserve(total);
  for (const Tensor& p : parts) {
    n.inputs.push_back(p.id());
    n.requires_grad = n.requires_grad || N(p).requires_grad;
    n.value.insert(n.value.end(), N(p).value.begin(), N(p).value.end());
  }
  return TapeAccess::record(tape, std::move(n));
}

Tensor concat(std::initializer_list<Tensor> parts) {
  return concat(std::span<const Tensor>(parts.begin(), parts.size()));
}

Tensor stack_rows(std::span<const Tensor> rows) {
  if (rows.empty()) throw ShapeError("stack_rows: no inputs");
  Tape* tape = rows[0].tape();
  const Shape& first = N(rows[0]).shape;
  Node n;
  n.kind = OpKind::kStackRows;
  n.shape = {rows.size(), first.back()};
  for (const Tensor& r : rows) {
    if (r.tape() != tape) throw Error("stack_rows: tensors from different tapes");
    if (N(r).shape != first || first.size() != 1) {
      shape_mismatch("stack_rows", N(r).shape, first);
    }
    n.inputs.push_back(r.id());
    n.requires_grad = n.requires_grad || N(r).requires_grad;
    n.value.insert(n.value.end(), N(r).value.begin(), N(r).value.end());
  }
  return TapeAccess::record(tape, std::move(n));
}

Tensor tanh(const Tensor& x) {
  return unary(OpKind::kTanh, x, [](double v) { return std::tanh(v); });
}
Tensor relu(const Tensor& x) {
  return unary(OpKind::kRelu, x, [](double v) { return v > 0.0 ? v : 0.0; });
}
Tensor sigmoid(const Tensor& x) {
  return unary(OpKind::kSigmoid, x, sigmoid_scalar);
}
Tensor exp(const Tensor& x) {
  return unary(OpKind::kExp, x, [](double v) { return std::exp(v); });
}

Tensor softmax(const Tensor& x) {
  Tape* tape = common_tape({&x});
  Node n = make(OpKind::kSoftmax, N(x).shape, {&x});
  n.value = N(x).value;
  const std::size_t rows = rows_of(n.shape), cols = cols_of(n.shape);
  for (std::size_t r = 0; r < rows; ++r) {
    softmax_inplace(std::span<double>(n.value.data() + r * cols, cols));
  }
  return TapeAccess::record(tape, std::move(n));
}

Tensor masked_softmax(const Tensor& logits, std::span<const std::uint8_t> mask) {
  Tape* tape = common_tape({&logits});
  const Shape& s = N(logits).shape;
  if (s.size() != 1 || mask.size() != s[0]) {
    shape_mismatch("masked_softmax", s, {mask.size()});
  }
  if (std::none_of(mask.begin(), mask.end(), [](std::uint8_t m) { return m != 0; })) {
    throw NumericError("masked_softmax: mask has no surviving coordinate");
  }
  Node n = make(OpKind::kMaskedSoftmax, s, {&logits});
  const auto& x = N(logits).value;
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < x.size(); ++i)
    if (mask[i]) mx = std::max(mx, x[i]);
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    n.value[i] = mask[i] ? std::exp(x[i] - mx) : 0.0;
    total += n.value[i];
  }
  for (double& v : n.value) v /= total;
  return TapeAccess::record(tape, std::move(n));
}

Tensor embedding_lookup(const Tensor& table, std::size_t id) {
  Tape* tape = common_tape({&table});
  const Shape& s = N(table).shape;
  if (s.size() != 2) shape_mismatch("embedding_lookup", s, {0, 0});
  if (id >= s[0]) {
    throw ShapeError("embedding_lookup: id " + std::to_string(id) +
                     " out of range for table " + shape_string(s));
  }
  Node n = make(OpKind::kEmbedding, {s[1]}, {&table});
  n.index = id;
  std::copy_n(N(table).value.data() + id * s[1], s[1], n.value.data());
  return TapeAccess::record(tape, std::move(n));
}

Tensor weighted_sum(const Tensor& weights, const Tensor& rows) {
  Tape* tape = common_tape({&weights, &rows});
  const Shape& sw = N(weights).shape;
  const Shape& sr = N(rows).shape;
  if (sw.size() != 1 || sr.size() != 2 || sw[0] != sr[0]) {
    shape_mismatch("weighted_sum", sw, sr);
  }
  Node n = make(OpKind::kWeightedSum, {sr[1]}, {&weights, &rows});
  gemv_t_add(N(rows).value.data(), N(weights).value.data(), n.value.data(), sr[0],
             sr[1]);
  return TapeAccess::record(tape, std::move(n));
}

Tensor sum(const Tensor& x) {
  Tape* tape = common_tape({&x});
  Node n = make(OpKind::kSum, {1}, {&x});
  for (double v : N(x).value) n.value[0] += v;
  return TapeAccess::record(tape, std::move(n));
}

Tensor dot(const Tensor& a, const Tensor& b) {
  Tape* tape = common_tape({&a, &b});
  if (N(a).shape != N(b).shape || N(a).shape.size() != 1) {
    shape_mismatch("dot", N(a).shape, N(b).shape);
  }
  Node n = make(OpKind::kDot, {1}, {&a, &b});
  for (std::size_t i = 0; i < N(a).value.size(); ++i)
    n.value[0] += N(a).value[i] * N(b).value[i];
  return TapeAccess::record(tape, std::move(n));
}

Tensor l1_normalize(const Tensor& x, double eps) {
  Tape* tape = common_tape({&x});
  Node n = make(OpKind::kL1Normalize, N(x).shape, {&x});
  double s = eps;
  for (double v : N(x).value) s += v;
  if (s == 0.0) throw NumericError("l1_normalize: zero total");
  n.scalar = s;
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] = N(x).value[i] / s;
  return TapeAccess::record(tape, std::move(n));
}

Tensor l2_normalize(const Tensor& x, double eps) {
  Tape* tape = common_tape({&x});
  Node n = make(OpKind::kL2Normalize, N(x).shape, {&x});
  double sq = 0.0;
  for (double v : N(x).value) sq += v * v;
  const double r = std::sqrt(sq);
  const double s = r + eps;
  if (s == 0.0) throw NumericError("l2_normalize: zero norm");
  n.scalar = s;
  n.saved = {r};
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] = N(x).value[i] / s;
  return TapeAccess::record(tape, std::move(n));
}

Tensor row_difference(const Tensor& rows, std::size_t selected) {
  Tape* tape = common_tape({&rows});
  const Shape& s = N(rows).shape;
  if (s.size() != 2) shape_mismatch("row_difference", s, {0, 0});
  if (selected >= s[0]) {
    throw ShapeError("row_difference: selected index " + std::to_string(selected) +
                     " out of range for " + shape_string(s));
  }
  Node n = make(OpKind::kRowDiff, s, {&rows});
  n.index = selected;
  const auto& m = N(rows).value;
  const std::size_t cols = s[1];
  for (std::size_t r = 0; r < s[0]; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      n.value[r * cols + c] = m[selected * cols + c] - m[r * cols + c];
  return TapeAccess::record(tape, std::move(n));
}

Tensor select(const Tensor& x, std::size_t index) {
  Tape* tape = common_tape({&x});
  if (index >= N(x).value.size()) {
    throw ShapeError("select: index " + std::to_string(index) + " out of range for " +
                     shape_string(N(x).shape));
  }
  Node n = make(OpKind::kSelect, {1}, {&x});
  n.index = index;
  n.value[0] = N(x).value[index];
  return TapeAccess::record(tape, std::move(n));
}

Tensor cross_entropy(const Tensor& logits, std::size_t target) {
  Tape* tape = common_tape({&logits});
  const Shape& s = N(logits).shape;
  if (s.size() != 1 || target >= s[0]) {
    throw ShapeError("cross_entropy: target " + std::to_string(target) +
                     " invalid for logits " + shape_string(s));
  }
  Node n = make(OpKind::kCrossEntropy, {1}, {&logits});
  n.index = target;
  n.saved = N(logits).value;
  softmax_inplace(n.saved);
  const auto& x = N(logits).value;
  double mx = *std::max_element(x.begin(), x.end());
  double total = 0.0;
  for (double v : x) total += std::exp(v - mx);
  n.value[0] = -(x[target] - mx - std::log(total));
  return TapeAccess::record(tape, std::move(n));
}

Tensor gru_cell(const Tensor& x, const Tensor& h, const Tensor& w_input,
                const Tensor& w_hidden, const Tensor& b_input,
                const Tensor& b_hidden) {
  Tape* tape = common_tape({&x, &h, &w_input, &w_hidden, &b_input, &b_hidden});
  const std::size_t in = N(x).value.size();
  const std::size_t hd = N(h).value.size();
  if (N(x).shape.size() != 1 || N(h).shape.size() != 1) {
    shape_mismatch("gru_cell", N(x).shape, N(h).shape);
  }
  if (N(w_input).shape != Shape{3 * hd, in}) {
    shape_mismatch("gru_cell input weight", N(w_input).shape, {3 * hd, in});
  }
  if (N(w_hidden).shape != Shape{3 * hd, hd}) {
    shape_mismatch("gru_cell hidden weight", N(w_hidden).shape, {3 * hd, hd});
  }
  if (N(b_input).shape != Shape{3 * hd} || N(b_hidden).shape != Shape{3 * hd}) {
    shape_mismatch("gru_cell bias", N(b_input).shape, {3 * hd});
  }
  Node n = make(OpKind::kGruCell, {hd}, {&x, &h, &w_input, &w_hidden, &b_input, &b_hidden});
  std::vector<double> gi(N(b_input).value), gh(N(b_hidden).value);
  gemv_add(N(w_input).value.data(), N(x).value.data(), gi.data(), 3 * hd, in);
  gemv_add(N(w_hidden).value.data(), N(h).value.data(), gh.data(), 3 * hd, hd);
  n.saved.resize(4 * hd);
  double* r = n.saved.data();
  double* z = r + hd;
  double* nn = z + hd;
  double* ghn = nn + hd;
  const auto& hv = N(h).value;
  for (std::size_t i = 0; i < hd; ++i) {
    r[i] = sigmoid_scalar(gi[i] + gh[i]);
    z[i] = sigmoid_scalar(gi[hd + i] + gh[hd + i]);
    ghn[i] = gh[2 * hd + i];
    nn[i] = std::tanh(gi[2 * hd + i] + r[i] * ghn[i]);
    n.value[i] = (1.0 - z[i]) * nn[i] + z[i] * hv[i];
  }
  return TapeAccess::record(tape, std::move(n));
}

Tensor detach(const Tensor& x) {
  return x.tape()->constant(N(x).shape, N(x).value);
}

}  // namespace advse
