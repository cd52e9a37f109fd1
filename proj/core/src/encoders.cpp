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

#include "advse/encoders.hpp"

#include <vector>

#include "advse/error.hpp"

namespace advse {

EncoderParams add_encoders(ParameterStore& store, const ModelConfig& config,
                           const std::string& prefix) {
  EncoderParams p;
  const std::size_t dw = config.word_dim;
  const std::size_t dh = config.hidden_dim;
  p.word_embedding = &store.add(prefix + ".word_embedding", {config.vocab_size, dw});
  p.word_gru = add_gru(store, prefix + ".word_gru", dw, dh);
  p.answer_embedding = &store.add(prefix + ".answer_embedding", {3, dw});
  p.history_gru = add_gru(store, prefix + ".history_gru", dh + dw, dh);
  p.pair_answer_embedding = &store.add(prefix + ".pair_answer_embedding", {3, dh});
  p.pair_gru = add_gru(store, prefix + ".pair_gru", dh, dh);
  return p;
}

QuestionEncoding encode_question(Tape& tape, const world::Question& q,
                                 const EncoderParams& params, std::size_t max_length) {
  const auto words = q.content();
  if (words.empty()) throw Error("encode_question: empty question");
  if (words.size() > max_length) {
    throw Error("encode_question: question longer than " + std::to_string(max_length));
  }
  const Tensor table = tape.parameter(*params.word_embedding);
  const std::size_t vocab = params.word_embedding->shape[0];
  Tensor h = zeros(tape, {params.word_gru.hidden_dim});
  std::vector<Tensor> states;
  states.reserve(words.size());
  for (const world::Token tok : words) {
    if (tok >= vocab) throw Error("encode_question: token id out of range");
    h = gru_step(tape, params.word_gru, embedding_lookup(table, tok), h);
    states.push_back(h);
  }
  return {stack_rows(states), h};
}

HistoryState initial_history(Tape& tape, const EncoderParams& params) {
  return {zeros(tape, {params.history_gru.hidden_dim})};
}

Tensor embed_answer(Tape& tape, world::Answer a, const EncoderParams& params) {
  return embedding_lookup(tape.parameter(*params.answer_embedding),
                          static_cast<std::size_t>(a));
}

HistoryState update_history(Tape& tape, const HistoryState& prev, const Tensor& q_summary,
                            const Tensor& answer, const EncoderParams& params) {
  const Tensor x = concat({q_summary, answer});
  if (x.size() != params.history_gru.input_dim) {
    throw ShapeError("update_history: [Q; A] has " + std::to_string(x.size()) +
                     " entries, expected " + std::to_string(params.history_gru.input_dim));
  }
  return {gru_step(tape, params.history_gru, x, prev.hidden)};
}

Tensor encode_qa_pair(Tape& tape, const Tensor& q_summary, world::Answer a,
                      const EncoderParams& params) {
  const Tensor h0 = zeros(tape, {params.pair_gru.hidden_dim});
  const Tensor hq = gru_step(tape, params.pair_gru, q_summary, h0);
  const Tensor ans = embedding_lookup(tape.parameter(*params.pair_answer_embedding),
                                      static_cast<std::size_t>(a));
  return gru_step(tape, params.pair_gru, ans, hq);
}

Tensor encode_qa_pair(Tape& tape, const world::Question& q, world::Answer a,
                      const EncoderParams& params, std::size_t max_length) {
  return encode_qa_pair(tape, encode_question(tape, q, params, max_length).summary, a, params);
}

}  // namespace advse
