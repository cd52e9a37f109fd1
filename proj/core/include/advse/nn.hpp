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

#ifndef ADVSE_NN_HPP_
#define ADVSE_NN_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "advse/params.hpp"
#include "advse/tensor.hpp"

namespace advse {

enum class Mode { kTrain, kEval };

// 64-bit mixer used to derive independent seeds from (seed, stream) pairs.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

// Open-interval uniform draw in (0, 1) from a 64-bit generator output.
double uniform_open01(std::uint64_t bits);

// g_i = -ln(-ln(u_i)), u_i ~ U(0,1), from a generator seeded with `seed`.
std::vector<double> gumbel_noise(std::size_t n, std::uint64_t seed);

// logits + Gumbel noise in training mode; the logits unchanged in eval mode.
Tensor gumbel_perturb(const Tensor& logits, std::uint64_t seed, Mode mode);

struct GruWeights {
  Parameter* w_input = nullptr;
  Parameter* w_hidden = nullptr;
  Parameter* b_input = nullptr;
  Parameter* b_hidden = nullptr;
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
};

GruWeights add_gru(ParameterStore& store, const std::string& prefix,
                   std::size_t input_dim, std::size_t hidden_dim);

Tensor gru_step(Tape& tape, const GruWeights& gru, const Tensor& x, const Tensor& h);

Tensor zeros(Tape& tape, Shape shape);

}  // namespace advse

#endif  // ADVSE_NN_HPP_
