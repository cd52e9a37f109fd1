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

// Language-side encoders: the word-level question GRU, the dialogue-level
// history GRU and the history-free QA-pair encoder.

#ifndef ADVSE_ENCODERS_HPP_
#define ADVSE_ENCODERS_HPP_

#include <string>

#include "advse/model_config.hpp"
#include "advse/nn.hpp"
#include "advse/world.hpp"

namespace advse {

struct EncoderParams {
  Parameter* word_embedding = nullptr;  // vocab x d_word
  GruWeights word_gru;                  // d_word -> d_h
  Parameter* answer_embedding = nullptr;  // 3 x d_word
  GruWeights history_gru;               // (d_h + d_word) -> d_h
  Parameter* pair_answer_embedding = nullptr;  // 3 x d_h
  GruWeights pair_gru;                  // d_h -> d_h
};

EncoderParams add_encoders(ParameterStore& store, const ModelConfig& config,
                           const std::string& prefix);

struct QuestionEncoding {
  Tensor per_word;  // m x d_h
  Tensor summary;   // d_h, equal to the last row of per_word
};

struct HistoryState {
  Tensor hidden;  // d_h
};

// Encodes the question content (a trailing <stop> is not fed). Throws
// Error on an empty question or one longer than `max_length`.
QuestionEncoding encode_question(Tape& tape, const world::Question& q,
                                 const EncoderParams& params, std::size_t max_length);

HistoryState initial_history(Tape& tape, const EncoderParams& params);

Tensor embed_answer(Tape& tape, world::Answer a, const EncoderParams& params);

// H_t = GRU^c([Q_t; A_t], H_{t-1}).
HistoryState update_history(Tape& tape, const HistoryState& prev, const Tensor& q_summary,
                            const Tensor& answer, const EncoderParams& params);

// Two recurrent steps from the zero state: the question summary, then the
// answer embedding.
Tensor encode_qa_pair(Tape& tape, const Tensor& q_summary, world::Answer a,
                      const EncoderParams& params);
Tensor encode_qa_pair(Tape& tape, const world::Question& q, world::Answer a,
                      const EncoderParams& params, std::size_t max_length);

}  // namespace advse

#endif  // ADVSE_ENCODERS_HPP_
