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

#include "advse/qgen.hpp"

#include "advse/error.hpp"

namespace advse {

QuestionGenerator::QuestionGenerator(const ModelConfig& config, std::uint64_t init_seed)
    : store_(init_seed), estimator_(config, add_estimator(store_, config, "qgen.est")) {
  config.validate();
  decoder_ = add_gru(store_, "qgen.decoder", config.word_dim + config.visual_dim,
                     config.hidden_dim);
  output_weight_ = &store_.add("qgen.output_weight", {config.vocab_size, config.hidden_dim});
  output_bias_ = &store_.add("qgen.output_bias", {config.vocab_size}, Init::kZero);
}

DecoderState QuestionGenerator::init_decoder(const DialogueState& state) const {
  return {state.fused, {}};
}

std::pair<Tensor, DecoderState> QuestionGenerator::decode_step(Tape& tape, world::Token prev,
                                                               const Tensor& visual,
                                                               const DecoderState& state) const {
  if (prev >= config().vocab_size) {
    throw Error("decode_step: token id " + std::to_string(prev) + " out of range");
  }
  const EncoderParams& enc = estimator_.params().encoders;
  const Tensor emb = embedding_lookup(tape.parameter(*enc.word_embedding), prev);
  DecoderState next;
  next.hidden = gru_step(tape, decoder_, concat({emb, visual}), state.hidden);
  next.emitted = state.emitted;
  const Tensor logits = linear(tape.parameter(*output_weight_), next.hidden,
                               tape.parameter(*output_bias_));
  return {logits, std::move(next)};
}

Tensor QuestionGenerator::question_nll(Tape& tape, const DialogueState& state,
                                       const world::Question& q) const {
  std::vector<world::Token> targets(q.content().begin(), q.content().end());
  targets.push_back(world::vocab::kStop);
  if (targets.size() > config().max_question_length) {
    throw Error("question_nll: question longer than max_question_length");
  }
  DecoderState dec = init_decoder(state);
  world::Token prev = world::vocab::kStart;
  Tensor total;
  for (const world::Token tok : targets) {
    auto [logits, next] = decode_step(tape, prev, state.visual.v, dec);
    const Tensor ce = cross_entropy(logits, tok);
    total = total.defined() ? add(total, ce) : ce;
    dec = std::move(next);
    dec.emitted.push_back(tok);
    prev = tok;
  }
  return total;
}

Tensor QuestionGenerator::dialogue_nll(Tape& tape, const world::Game& game,
                                       std::size_t max_turns, Mode mode,
                                       std::uint64_t noise_seed) const {
  DialogueState state = estimator_.begin(tape, game.scene);
  Tensor total;
  const std::size_t turns = std::min(game.dialogue.size(), max_turns);
  for (std::size_t t = 0; t < turns; ++t) {
    const world::Turn& turn = game.dialogue[t];
    const Tensor nll = question_nll(tape, state, turn.question);
    total = total.defined() ? add(total, nll) : nll;
    estimator_.advance(tape, state, turn.question, turn.answer, mode, noise_seed);
  }
  if (turns < max_turns) {
    const Tensor nll = question_nll(tape, state, world::Question{{world::vocab::kStop}});
    total = total.defined() ? add(total, nll) : nll;
  }
  return total;
}

world::Question QuestionGenerator::generate(Tape& tape, const DialogueState& state,
                                            const DecodeStrategy& strategy) const {
  const Tensor visual = state.visual.v;
  auto step = [&](const Tensor& hidden, std::uint32_t prev) {
    auto [logits, next] = decode_step(tape, prev, visual, DecoderState{hidden, {}});
    return std::pair<std::vector<double>, Tensor>(log_softmax(logits.to_vector()),
                                                  next.hidden);
  };
  const std::size_t m = config().max_question_length;
  const auto start = world::vocab::kStart;
  const auto stop = world::vocab::kStop;
  Hypothesis h;
  switch (strategy.kind) {
    case DecodeKind::kGreedy:
      h = greedy_decode(state.fused, step, start, stop, m);
      break;
    case DecodeKind::kSample: {
      std::mt19937_64 rng(mix_seed(strategy.seed, state.turn));
      h = sample_decode(state.fused, step, start, stop, m, rng);
      break;
    }
    case DecodeKind::kBeam:
      h = beam_decode(state.fused, step, start, stop, m, strategy.beam_width,
                      strategy.length_normalize);
      break;
  }
  return world::Question{std::move(h.tokens)};
}

std::pair<world::Question, Tensor> QuestionGenerator::sample(Tape& tape,
                                                             const DialogueState& state,
                                                             std::mt19937_64& rng) const {
  DecoderState dec = init_decoder(state);
  world::Token prev = world::vocab::kStart;
  world::Question q;
  Tensor total;
  while (q.tokens.size() < config().max_question_length) {
    auto [logits, next] = decode_step(tape, prev, state.visual.v, dec);
    const auto lp = log_softmax(logits.to_vector());
    std::vector<double> probs(lp.size());
    for (std::size_t i = 0; i < lp.size(); ++i) probs[i] = std::exp(lp[i]);
    std::discrete_distribution<std::size_t> dist(probs.begin(), probs.end());
    const auto tok = static_cast<world::Token>(dist(rng));
    const Tensor ce = cross_entropy(logits, tok);
    total = total.defined() ? add(total, ce) : ce;
    q.tokens.push_back(tok);
    if (tok == world::vocab::kStop) break;
    dec = std::move(next);
    prev = tok;
  }
  return {std::move(q), total};
}

void QuestionGenerator::save(const std::filesystem::path& path) const {
  save_checkpoint(path, kQGenKind, config().to_json(), store_);
}

QuestionGenerator QuestionGenerator::load(const std::filesystem::path& path) {
  const CheckpointFile file = read_checkpoint(path);
  if (file.kind != kQGenKind) {
    throw Error("checkpoint " + path.string() + " holds a '" + file.kind +
                "' model, expected '" + kQGenKind + "'");
  }
  QuestionGenerator g(ModelConfig::from_json(file.config), 0);
  g.store_.load_json(file.parameters);
  return g;
}

}  // namespace advse
