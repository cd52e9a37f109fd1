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

#include "advse/guesser.hpp"

#include <algorithm>
#include <cmath>

#include "advse/error.hpp"

namespace advse {

GuessResult guess(std::span<const double> fused, std::span<const double> encodings,
                  std::size_t num_objects) {
  if (num_objects == 0) throw Error("guess: no candidate objects");
  const std::size_t d = fused.size();
  if (encodings.size() != num_objects * d) {
    throw ShapeError("guess: encoding matrix does not match fused state dimension");
  }
  GuessResult r;
  r.probabilities.resize(num_objects);
  for (std::size_t o = 0; o < num_objects; ++o) {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) s += fused[i] * encodings[o * d + i];
    r.probabilities[o] = s;
  }
  const double mx = *std::max_element(r.probabilities.begin(), r.probabilities.end());
  double total = 0.0;
  for (double& p : r.probabilities) {
    p = std::exp(p - mx);
    total += p;
  }
  for (std::size_t o = 0; o < num_objects; ++o) {
    r.probabilities[o] /= total;
    if (r.probabilities[o] > r.probabilities[r.predicted]) r.predicted = o;
  }
  return r;
}

Guesser::Guesser(const ModelConfig& config, std::uint64_t init_seed)
    : store_(init_seed), estimator_(config, add_estimator(store_, config, "guesser.est")) {
  config.validate();
  category_embedding_ =
      &store_.add("guesser.category_embedding", {config.num_categories, config.category_dim});
  object_w1_ = &store_.add("guesser.object_w1",
                           {config.object_hidden_dim, world::kSpatialDim + config.category_dim});
  object_b1_ = &store_.add("guesser.object_b1", {config.object_hidden_dim}, Init::kZero);
  object_w2_ = &store_.add("guesser.object_w2", {config.hidden_dim, config.object_hidden_dim});
  object_b2_ = &store_.add("guesser.object_b2", {config.hidden_dim}, Init::kZero);
  if (config.guesser_projection) {
    projection_ = &store_.add("guesser.projection", {config.hidden_dim, config.hidden_dim});
  }
}

Tensor Guesser::encode_object(Tape& tape, const world::SceneObject& object) const {
  if (object.category < 0 ||
      static_cast<std::size_t>(object.category) >= config().num_categories) {
    throw Error("encode_object: invalid category " + std::to_string(object.category));
  }
  const auto sp = object.spatial();
  const Tensor spatial = tape.constant({sp.size()}, std::vector<double>(sp.begin(), sp.end()));
  const Tensor cat = embedding_lookup(tape.parameter(*category_embedding_),
                                      static_cast<std::size_t>(object.category));
  const Tensor h = relu(linear(tape.parameter(*object_w1_), concat({spatial, cat}),
                               tape.parameter(*object_b1_)));
  return relu(linear(tape.parameter(*object_w2_), h, tape.parameter(*object_b2_)));
}

Tensor Guesser::encode_objects(Tape& tape, const world::Scene& scene) const {
  std::vector<Tensor> rows;
  rows.reserve(scene.size());
  for (const auto& o : scene.objects) rows.push_back(encode_object(tape, o));
  return stack_rows(rows);
}

DialogueState Guesser::replay(Tape& tape, const world::Scene& scene,
                              const world::Dialogue& dialogue, Mode mode,
                              std::uint64_t noise_seed) const {
  DialogueState state = estimator_.begin(tape, scene);
  for (const world::Turn& turn : dialogue) {
    if (turn.question.is_stop()) break;
    estimator_.advance(tape, state, turn.question, turn.answer, mode, noise_seed);
  }
  return state;
}

Tensor Guesser::logits(Tape& tape, const DialogueState& state, const world::Scene& scene) const {
  if (scene.size() == 0) throw Error("guess: no candidate objects");
  const Tensor f = projection_ ? linear(tape.parameter(*projection_), state.fused)
                               : state.fused;
  return matmul(encode_objects(tape, scene), f);
}

GuessResult Guesser::predict(const world::Scene& scene, const world::Dialogue& dialogue) const {
  Tape tape;
  const DialogueState state = replay(tape, scene, dialogue, Mode::kEval, 0);
  const Tensor f = projection_ ? linear(tape.parameter(*projection_), state.fused)
                               : state.fused;
  const Tensor enc = encode_objects(tape, scene);
  return guess(f.values(), enc.values(), scene.size());
}

Tensor Guesser::loss(Tape& tape, const world::Game& game, Mode mode,
                     std::uint64_t noise_seed) const {
  const DialogueState state = replay(tape, game.scene, game.dialogue, mode, noise_seed);
  return cross_entropy(logits(tape, state, game.scene), game.target);
}

void Guesser::save(const std::filesystem::path& path) const {
  save_checkpoint(path, kGuesserKind, config().to_json(), store_);
}

Guesser Guesser::load(const std::filesystem::path& path) {
  const CheckpointFile file = read_checkpoint(path);
  if (file.kind != kGuesserKind) {
    throw Error("checkpoint " + path.string() + " holds a '" + file.kind +
                "' model, expected '" + kGuesserKind + "'");
  }
  Guesser g(ModelConfig::from_json(file.config), 0);
  g.store_.load_json(file.parameters);
  return g;
}

}  // namespace advse
