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


// Catalogue of every differentiable tensor op with small input shapes,
// shared by the unit tests and the acceptance binary.

#ifndef ADVSE_TESTS_OP_CASES_HPP_
#define ADVSE_TESTS_OP_CASES_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "advse/nn.hpp"
#include "advse/tensor.hpp"
#include "gradcheck.hpp"

namespace advse::testing {

// Reduces any tensor to a scalar with fixed pseudo-random weights so every
// output coordinate contributes a distinct gradient.
inline Tensor project(Tape& tape, const Tensor& t) {
  std::vector<double> w(t.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::sin(1.7 * static_cast<double>(i) + 0.3);
  return sum(hadamard(t, tape.constant(t.shape(), w)));
}

struct OpCase {
  std::string name;
  std::vector<Shape> shapes;
  std::function<Tensor(Tape&, std::vector<Tensor>&)> build;
  double lo = -1.0;
  double hi = 1.0;
};

inline std::vector<OpCase> op_cases() {
  const std::vector<std::uint8_t> mask = {1, 0, 1, 1, 0};
  return {
      {"matmul_mv", {{3, 4}, {4}}, [](Tape&, auto& in) { return matmul(in[0], in[1]); }},
      {"matmul_mm", {{3, 4}, {4, 2}}, [](Tape&, auto& in) { return matmul(in[0], in[1]); }},
      {"matmul_vm", {{4}, {4, 2}}, [](Tape&, auto& in) { return matmul(in[0], in[1]); }},
      {"linear_vec", {{3, 4}, {4}, {3}},
       [](Tape&, auto& in) { return linear(in[0], in[1], in[2]); }},
      {"linear_rows", {{3, 4}, {2, 4}, {3}},
       [](Tape&, auto& in) { return linear(in[0], in[1], in[2]); }},
      {"linear_nobias", {{3, 4}, {4}}, [](Tape&, auto& in) { return linear(in[0], in[1]); }},
      {"hadamard", {{5}, {5}}, [](Tape&, auto& in) { return hadamard(in[0], in[1]); }},
      {"row_hadamard", {{3, 4}, {4}}, [](Tape&, auto& in) { return row_hadamard(in[0], in[1]); }},
      {"add", {{2, 3}, {2, 3}}, [](Tape&, auto& in) { return add(in[0], in[1]); }},
      {"sub", {{4}, {4}}, [](Tape&, auto& in) { return sub(in[0], in[1]); }},
      {"scale", {{4}}, [](Tape&, auto& in) { return scale(in[0], -2.5); }},
      {"mul_scalar", {{4}, {1}}, [](Tape&, auto& in) { return mul_scalar(in[0], in[1]); }},
      {"one_minus", {{4}}, [](Tape&, auto& in) { return one_minus(in[0]); }},
      {"concat", {{2}, {3}, {1}},
       [](Tape&, auto& in) { return concat({in[0], in[1], in[2]}); }},
      {"stack_rows", {{3}, {3}}, [](Tape&, auto& in) { return stack_rows(in); }},
      {"tanh", {{5}}, [](Tape&, auto& in) { return tanh(in[0]); }},
      {"relu", {{6}}, [](Tape&, auto& in) { return relu(in[0]); }, 0.1, 1.0},
      {"relu_negative", {{6}}, [](Tape&, auto& in) { return relu(scale(in[0], -1.0)); }, 0.1,
       1.0},
      {"sigmoid", {{5}}, [](Tape&, auto& in) { return sigmoid(in[0]); }},
      {"exp", {{5}}, [](Tape&, auto& in) { return exp(in[0]); }},
      {"softmax_vec", {{5}}, [](Tape&, auto& in) { return softmax(in[0]); }},
      {"softmax_rows", {{3, 4}}, [](Tape&, auto& in) { return softmax(in[0]); }},
      {"masked_softmax", {{5}},
       [mask](Tape&, auto& in) { return masked_softmax(in[0], mask); }},
      {"embedding", {{4, 3}}, [](Tape&, auto& in) { return embedding_lookup(in[0], 2); }},
      {"weighted_sum", {{4}, {4, 3}},
       [](Tape&, auto& in) { return weighted_sum(in[0], in[1]); }},
      {"sum", {{2, 3}}, [](Tape&, auto& in) { return sum(in[0]); }},
      {"dot", {{4}, {4}}, [](Tape&, auto& in) { return dot(in[0], in[1]); }},
      {"l1_normalize", {{5}}, [](Tape&, auto& in) { return l1_normalize(in[0]); }, 0.1, 1.0},
      {"l2_normalize", {{5}}, [](Tape&, auto& in) { return l2_normalize(in[0]); }},
      {"row_difference", {{4, 3}}, [](Tape&, auto& in) { return row_difference(in[0], 1); }},
      {"select", {{5}}, [](Tape&, auto& in) { return select(in[0], 3); }},
      {"cross_entropy", {{6}}, [](Tape&, auto& in) { return cross_entropy(in[0], 4); }},
      {"gru_cell", {{3}, {4}, {12, 3}, {12, 4}, {12}, {12}},
       [](Tape&, auto& in) { return gru_cell(in[0], in[1], in[2], in[3], in[4], in[5]); }},
  };
}

// Runs the finite-difference check on every op; returns the failing names.
inline std::vector<std::string> check_all_ops(std::uint64_t seed, double* worst = nullptr) {
  std::mt19937_64 rng(seed);
  std::vector<std::string> failed;
  for (const OpCase& c : op_cases()) {
    std::vector<Parameter> storage;
    for (std::size_t i = 0; i < c.shapes.size(); ++i) {
      storage.push_back(make_param(c.name + std::to_string(i), c.shapes[i], rng, c.lo, c.hi));
    }
    std::vector<Parameter*> ptrs;
    for (auto& p : storage) ptrs.push_back(&p);
    const auto result = check_gradients(ptrs, [&](Tape& tape) {
      std::vector<Tensor> in;
      for (auto& p : storage) in.push_back(tape.parameter(p));
      return project(tape, c.build(tape, in));
    });
    if (worst) *worst = std::max(*worst, result.max_rel_error);
    if (!(result.max_rel_error < kFdTolerance)) failed.push_back(c.name);
  }
  return failed;
}

}  // namespace advse::testing

#endif  // ADVSE_TESTS_OP_CASES_HPP_
