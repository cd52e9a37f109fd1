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

// Question generator: a GRU decoder started from F_t whose input at every
// step is [embedding(previous token); V_t].

#ifndef ADVSE_QGEN_HPP_
#define ADVSE_QGEN_HPP_

#include <cstdint>
#include <filesystem>
#include <random>
#include <utility>

#include "advse/decoding.hpp"
#include "advse/estimator.hpp"
#include "advse/params.hpp"

namespace advse {

inline constexpr const char* kQGenKind = "qgen";

struct DecoderState {
  Tensor hidden;  // d_h
  std::vector<world::Token> emitted;
};

class QuestionGenerator {
 public:
  QuestionGenerator(const ModelConfig& config, std::uint64_t init_seed);

  QuestionGenerator(QuestionGenerator&&) = default;
  QuestionGenerator& operator=(QuestionGenerator&&) = default;

  const ModelConfig& config() const { return estimator_.config(); }
  const Estimator& estimator() const { return estimator_; }
  ParameterStore& parameters() { return store_; }
  const ParameterStore& parameters() const { return store_; }

  DecoderState init_decoder(const DialogueState& state) const;

  // Logits over the vocabulary and the advanced decoder state. Throws Error
  // on an out-of-vocabulary token.
  std::pair<Tensor, DecoderState> decode_step(Tape& tape, world::Token prev,
                                              const Tensor& visual,
                                              const DecoderState& state) const;

  // Teacher-forced -log p(q | state) summed over the tokens of q, with a
  // <stop> appended when q does not already end with one.
  Tensor question_nll(Tape& tape, const DialogueState& state, const world::Question& q) const;

  // Supervised loss of a transcript: the NLL of every question given the
  // state before it, plus a stop-only question when the transcript ends
  // before `max_turns`.
  Tensor dialogue_nll(Tape& tape, const world::Game& game, std::size_t max_turns, Mode mode,
                      std::uint64_t noise_seed) const;

  world::Question generate(Tape& tape, const DialogueState& state,
                           const DecodeStrategy& strategy) const;

  // Draws a question and returns it with its summed NLL (differentiable).
  std::pair<world::Question, Tensor> sample(Tape& tape, const DialogueState& state,
                                            std::mt19937_64& rng) const;

  void save(const std::filesystem::path& path) const;
  static QuestionGenerator load(const std::filesystem::path& path);

 private:
  ParameterStore store_;
  Estimator estimator_;
  GruWeights decoder_;
  Parameter* output_weight_ = nullptr;  // vocab x d_h
  Parameter* output_bias_ = nullptr;    // vocab
};

}  // namespace advse

#endif  // ADVSE_QGEN_HPP_
