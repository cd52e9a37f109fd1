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

// Guesser: replays the dialogue through its own state estimator and scores
// every candidate object by a dot product with the final fused state.
//
//   r_o = ReLU(W2 ReLU(W1 [s_o; c_o] + b1) + b2)
//   p   = softmax_o(F'_T . r_o),   F'_T = W_proj F_T (or F_T)

#ifndef ADVSE_GUESSER_HPP_
#define ADVSE_GUESSER_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "advse/estimator.hpp"
#include "advse/params.hpp"

namespace advse {

inline constexpr const char* kGuesserKind = "guesser";

struct GuessResult {
  std::vector<double> probabilities;
  std::size_t predicted = 0;
};

// Softmax over dot products of `fused` with each encoding row; prediction is
// the lowest-index argmax. Throws Error on zero candidates.
GuessResult guess(std::span<const double> fused, std::span<const double> encodings,
                  std::size_t num_objects);

class Guesser {
 public:
  Guesser(const ModelConfig& config, std::uint64_t init_seed);

  Guesser(Guesser&&) = default;
  Guesser& operator=(Guesser&&) = default;

  const ModelConfig& config() const { return estimator_.config(); }
  const Estimator& estimator() const { return estimator_; }
  ParameterStore& parameters() { return store_; }
  const ParameterStore& parameters() const { return store_; }

  // Throws Error on an invalid category.
  Tensor encode_object(Tape& tape, const world::SceneObject& object) const;
  Tensor encode_objects(Tape& tape, const world::Scene& scene) const;  // n x d_h

  // State after replaying `dialogue` (stop-only questions end it).
  DialogueState replay(Tape& tape, const world::Scene& scene, const world::Dialogue& dialogue,
                       Mode mode, std::uint64_t noise_seed) const;

  // Candidate logits given a replayed state.
  Tensor logits(Tape& tape, const DialogueState& state, const world::Scene& scene) const;

  GuessResult predict(const world::Scene& scene, const world::Dialogue& dialogue) const;

  // Cross-entropy of the target.
  Tensor loss(Tape& tape, const world::Game& game, Mode mode, std::uint64_t noise_seed) const;

  void save(const std::filesystem::path& path) const;
  static Guesser load(const std::filesystem::path& path);

 private:
  ParameterStore store_;
  Estimator estimator_;
  Parameter* category_embedding_ = nullptr;  // categories x d_cat
  Parameter* object_w1_ = nullptr;           // d_obj x (8 + d_cat)
  Parameter* object_b1_ = nullptr;
  Parameter* object_w2_ = nullptr;           // d_h x d_obj
  Parameter* object_b2_ = nullptr;
  Parameter* projection_ = nullptr;          // d_h x d_h, null for identity
};

}  // namespace advse

#endif  // ADVSE_GUESSER_HPP_
