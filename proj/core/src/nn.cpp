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

#include "advse/nn.hpp"

#include <cmath>
#include <random>

namespace advse {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the combined words.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double uniform_open01(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

std::vector<double> gumbel_noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> g(n);
  for (double& v : g) v = -std::log(-std::log(uniform_open01(rng())));
  return g;
}

Tensor gumbel_perturb(const Tensor& logits, std::uint64_t seed, Mode mode) {
  if (mode == Mode::kEval) return logits;
  Tape& tape = *logits.tape();
  return add(logits, tape.constant(logits.shape(), gumbel_noise(logits.size(), seed)));
}

GruWeights add_gru(ParameterStore& store, const std::string& prefix,
                   std::size_t input_dim, std::size_t hidden_dim) {
  GruWeights g;
  g.input_dim = input_dim;
  g.hidden_dim = hidden_dim;
  g.w_input = &store.add(prefix + ".w_input", {3 * hidden_dim, input_dim});
  g.w_hidden = &store.add(prefix + ".w_hidden", {3 * hidden_dim, hidden_dim});
  g.b_input = &store.add(prefix + ".b_input", {3 * hidden_dim}, Init::kZero);
  g.b_hidden = &store.add(prefix + ".b_hidden", {3 * hidden_dim}, Init::kZero);
  return g;
}

Tensor gru_step(Tape& tape, const GruWeights& gru, const Tensor& x, const Tensor& h) {
  return gru_cell(x, h, tape.parameter(*gru.w_input), tape.parameter(*gru.w_hidden),
                  tape.parameter(*gru.b_input), tape.parameter(*gru.b_hidden));
}

Tensor zeros(Tape& tape, Shape shape) {
  const std::size_t n = numel(shape);
  return tape.constant(std::move(shape), std::vector<double>(n, 0.0));
}

}  // namespace advse
