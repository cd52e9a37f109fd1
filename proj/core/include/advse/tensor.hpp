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

// Minimal reverse-mode automatic differentiation over dense double arrays.
//
// A Tape records every forward operation as a node holding its value. A
// Tensor is a cheap handle (tape pointer + node id). Calling
// Tape::backward() on a scalar walks the nodes in reverse and fills one
// gradient buffer per node; gradients of Parameter leaves are additionally
// accumulated into Parameter::grad so they survive the tape.
//
// Shapes are rank 1 ({n}) or rank 2 ({rows, cols}); scalars are {1}.

#ifndef ADVSE_TENSOR_HPP_
#define ADVSE_TENSOR_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace advse {

using Shape = std::vector<std::size_t>;
using NodeId = std::uint32_t;

std::size_t numel(const Shape& shape);
std::string shape_string(const Shape& shape);

// Trainable array living outside any tape.
struct Parameter {
  std::string name;
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;

  void zero_grad();
};

enum class OpKind : std::uint8_t {
  kConstant,
  kParameter,
  kMatmul,
  kLinear,
  kHadamard,
  kRowHadamard,
  kAdd,
  kSub,
  kScale,
  kMulScalar,
  kOneMinus,
  kConcat,
  kStackRows,
  kTanh,
  kRelu,
  kSigmoid,
  kExp,
  kSoftmax,
  kMaskedSoftmax,
  kEmbedding,
  kWeightedSum,
  kSum,
  kDot,
  kL1Normalize,
  kL2Normalize,
  kRowDiff,
  kSelect,
  kCrossEntropy,
  kGruCell,
};

const char* op_name(OpKind kind);

class Tape;

class Tensor {
 public:
  Tensor() = default;

  bool defined() const { return tape_ != nullptr; }
  Tape* tape() const { return tape_; }
  NodeId id() const { return id_; }

  const Shape& shape() const;
  std::span<const double> values() const;
  std::size_t size() const;
  bool requires_grad() const;
  // Value of a single-element tensor.
  double item() const;
  double operator[](std::size_t i) const { return values()[i]; }
  std::vector<double> to_vector() const;

 private:
  friend class Tape;
  Tensor(Tape* tape, NodeId id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  NodeId id_ = 0;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Tensor constant(Shape shape, std::vector<double> values);
  Tensor scalar(double value) { return constant({1}, {value}); }
  // Leaf bound to `param`. Repeated calls with the same parameter return the
  // same node, so each parameter is copied onto the tape once.
  Tensor parameter(Parameter& param);

  // Reverse pass from a single-element loss. When `accumulate` is set the
  // gradients of parameter leaves are added to Parameter::grad.
  void backward(const Tensor& loss, bool accumulate = true);

  // Gradient of `t` from the last backward(); zeros if unreachable.
  std::vector<double> grad(const Tensor& t) const;

  std::size_t size() const { return nodes_.size(); }
  void clear();

 private:
  struct Node {
    OpKind kind = OpKind::kConstant;
    bool requires_grad = false;
    Shape shape;
    std::vector<double> value;
    std::vector<NodeId> inputs;
    std::vector<double> saved;
    std::size_t index = 0;
    double scalar = 0.0;
    Parameter* param = nullptr;
  };

  friend class Tensor;
  friend struct TapeAccess;

  Tensor record(Node node);
  const Node& node(NodeId id) const { return nodes_[id]; }
  void backward_node(NodeId id);

  std::vector<Node> nodes_;
  std::vector<std::vector<double>> grads_;
  std::unordered_map<const Parameter*, NodeId> param_nodes_;
};

// ---------------------------------------------------------------------------
// Operations. Every input must live on the same tape.
// ---------------------------------------------------------------------------

// (n x k)(k) -> (n); (n x k)(k x m) -> (n x m); (k)(k x m) -> (m).
Tensor matmul(const Tensor& a, const Tensor& b);
// W x + b for x of shape {in} or row-wise for {rows, in}; `bias` may be
// undefined.
Tensor linear(const Tensor& weight, const Tensor& x, const Tensor& bias = {});
Tensor hadamard(const Tensor& a, const Tensor& b);
// Each row of `m` multiplied elementwise by `v`.
Tensor row_hadamard(const Tensor& m, const Tensor& v);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double c);
// x times the single-element tensor s.
Tensor mul_scalar(const Tensor& x, const Tensor& s);
Tensor one_minus(const Tensor& x);
Tensor concat(std::span<const Tensor> parts);
Tensor concat(std::initializer_list<Tensor> parts);
Tensor stack_rows(std::span<const Tensor> rows);
Tensor tanh(const Tensor& x);
Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor exp(const Tensor& x);
// Softmax over the last dimension.
Tensor softmax(const Tensor& x);
// Softmax over coordinates with mask != 0; exactly zero elsewhere. Throws
// NumericError when every mask entry is zero.
Tensor masked_softmax(const Tensor& logits, std::span<const std::uint8_t> mask);
Tensor embedding_lookup(const Tensor& table, std::size_t id);
// sum_k w[k] * rows[k]
Tensor weighted_sum(const Tensor& weights, const Tensor& rows);
Tensor sum(const Tensor& x);
Tensor dot(const Tensor& a, const Tensor& b);
// x / (sum(x) + eps)
Tensor l1_normalize(const Tensor& x, double eps = 1e-12);
// x / (||x||_2 + eps)
Tensor l2_normalize(const Tensor& x, double eps = 1e-12);
// Row j of the result is rows[selected] - rows[j].
Tensor row_difference(const Tensor& rows, std::size_t selected);
Tensor select(const Tensor& x, std::size_t index);
// -log softmax(logits)[target]
Tensor cross_entropy(const Tensor& logits, std::size_t target);
// Gated recurrent update with stacked gate weights in (reset, update, new)
// order: w_input is (3h x in), w_hidden is (3h x h), biases are (3h).
Tensor gru_cell(const Tensor& x, const Tensor& h, const Tensor& w_input,
                const Tensor& w_hidden, const Tensor& b_input,
                const Tensor& b_hidden);
// Same value, no gradient.
Tensor detach(const Tensor& x);

}  // namespace advse

#endif  // ADVSE_TENSOR_HPP_
