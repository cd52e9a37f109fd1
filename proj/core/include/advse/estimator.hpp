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

// Answer-driven visual state estimator: the per-turn recurrence shared by
// the question generator and the guesser.
//
//   begin():   H_0 = 0, att_0 = 1/K, V_0 from CVIF with P_0 = 0, F_0
//   advance(): encode (q_t, a_t) -> H_t -> att_t -> V_t -> F_t

#ifndef ADVSE_ESTIMATOR_HPP_
#define ADVSE_ESTIMATOR_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "advse/adfa.hpp"
#include "advse/cvif.hpp"
#include "advse/encoders.hpp"
#include "advse/model_config.hpp"
#include "advse/world.hpp"

namespace advse {

// Attention trace for one turn. Turn 0 is the state before any question.
struct TurnTrace {
  std::size_t turn = 0;
  std::vector<double> alpha_q;
  std::vector<std::uint8_t> p;
  std::vector<std::uint8_t> m;
  std::vector<double> att_q;
  std::vector<double> att_h;
  std::vector<double> att;
  std::optional<double> lambda;
  std::size_t selected = 0;

  nlohmann::json to_json() const;
  bool operator==(const TurnTrace&) const = default;
};

struct EstimatorParams {
  EncoderParams encoders;
  AdfaParams adfa;
  CvifParams cvif;
  Parameter* fusion_weight = nullptr;  // d_h x (d_h + d_v)
  Parameter* fusion_bias = nullptr;    // d_h
};

EstimatorParams add_estimator(ParameterStore& store, const ModelConfig& config,
                              const std::string& prefix);

// F_t = tanh(W_f [H_t; V_t] + b_f).
Tensor fuse_multimodal(Tape& tape, const Tensor& history, const Tensor& visual,
                       const EstimatorParams& params);

struct DialogueState {
  Tensor regions;      // K x d_v
  Tensor projected_q;  // K x d_att
  Tensor projected_h;  // K x d_att
  HistoryState history;
  Tensor att;          // K
  VisualState visual;
  Tensor fused;        // d_h
  std::size_t turn = 0;
  std::vector<TurnTrace> traces;  // traces[t] describes turn t
};

class Estimator {
 public:
  Estimator(ModelConfig config, EstimatorParams params)
      : config_(std::move(config)), params_(params) {}

  DialogueState begin(Tape& tape, const world::Scene& scene) const;

  // One answered question. Gumbel noise for the turn is drawn from
  // mix_seed(noise_seed, turn). Throws Error on a stop-only question.
  void advance(Tape& tape, DialogueState& state, const world::Question& q, world::Answer a,
               Mode mode, std::uint64_t noise_seed) const;

  const EstimatorParams& params() const { return params_; }
  const ModelConfig& config() const { return config_; }

 private:
  ModelConfig config_;
  EstimatorParams params_;
};

}  // namespace advse

#endif  // ADVSE_ESTIMATOR_HPP_
