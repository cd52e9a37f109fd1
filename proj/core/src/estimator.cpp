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

#include "advse/estimator.hpp"

#include "advse/error.hpp"

namespace advse {

nlohmann::json TurnTrace::to_json() const {
  nlohmann::json j = {{"turn", turn},   {"alpha_q", alpha_q}, {"P", p},
                      {"M", m},         {"att_q", att_q},     {"att_h", att_h},
                      {"att", att},     {"selected", selected}};
  j["lambda"] = lambda ? nlohmann::json(*lambda) : nlohmann::json(nullptr);
  return j;
}

EstimatorParams add_estimator(ParameterStore& store, const ModelConfig& config,
                              const std::string& prefix) {
  EstimatorParams p;
  p.encoders = add_encoders(store, config, prefix + ".enc");
  p.adfa = add_adfa(store, config, prefix + ".adfa");
  p.cvif = add_cvif(store, config, prefix + ".cvif");
  p.fusion_weight = &store.add(prefix + ".fusion_weight",
                               {config.hidden_dim, config.hidden_dim + config.visual_dim});
  p.fusion_bias = &store.add(prefix + ".fusion_bias", {config.hidden_dim}, Init::kZero);
  return p;
}

Tensor fuse_multimodal(Tape& tape, const Tensor& history, const Tensor& visual,
                       const EstimatorParams& params) {
  return tanh(linear(tape.parameter(*params.fusion_weight), concat({history, visual}),
                     tape.parameter(*params.fusion_bias)));
}

DialogueState Estimator::begin(Tape& tape, const world::Scene& scene) const {
  const ModelConfig& cfg = config_;
  if (scene.size() == 0) throw Error("estimator: scene has no objects");
  if (scene.feature_dim != cfg.visual_dim) {
    throw ConfigError("scene feature_dim " + std::to_string(scene.feature_dim) +
                      " does not match model visual_dim " + std::to_string(cfg.visual_dim));
  }
  const std::size_t k = scene.size();
  DialogueState s;
  s.regions = tape.constant({k, scene.feature_dim}, scene.features);
  s.projected_q = project_regions(tape, s.regions, *params_.adfa.region_proj_q);
  s.projected_h = project_regions(tape, s.regions, *params_.adfa.region_proj_h);
  s.history = initial_history(tape, params_.encoders);
  s.att = tape.constant({k}, std::vector<double>(k, 1.0 / static_cast<double>(k)));
  const Tensor att_h = history_attention(tape, s.history.hidden, s.projected_h, params_.adfa);
  const Tensor pair0 = zeros(tape, {cfg.hidden_dim});
  s.visual = fuse_visual(tape, s.regions, s.att, pair0, params_.cvif, cfg);
  s.fused = fuse_multimodal(tape, s.history.hidden, s.visual.v, params_);

  TurnTrace t;
  t.att_h = att_h.to_vector();
  t.att = s.att.to_vector();
  t.selected = s.visual.selected;
  if (s.visual.lambda.defined()) t.lambda = s.visual.lambda.item();
  s.traces.push_back(std::move(t));
  return s;
}

void Estimator::advance(Tape& tape, DialogueState& s, const world::Question& q,
                        world::Answer a, Mode mode, std::uint64_t noise_seed) const {
  const ModelConfig& cfg = config_;
  const EstimatorParams& p = params_;
  ++s.turn;
  const QuestionEncoding qe = encode_question(tape, q, p.encoders, cfg.max_question_length);
  s.history = update_history(tape, s.history, qe.summary, embed_answer(tape, a, p.encoders),
                             p.encoders);
  const Tensor att_h = history_attention(tape, s.history.hidden, s.projected_h, p.adfa);

  TurnTrace t;
  t.turn = s.turn;
  t.att_h = att_h.to_vector();
  if (cfg.ablation.no_adfa) {
    s.att = att_h;
  } else {
    FocusResult f = answer_driven_focus(tape, qe.per_word, a, s.att, s.projected_q, p.adfa,
                                        cfg, mode, mix_seed(noise_seed, s.turn));
    s.att = combine(f.att_q, att_h);
    t.alpha_q = f.alpha.to_vector();
    t.p = std::move(f.p);
    t.m = std::move(f.m);
    t.att_q = f.att_q.to_vector();
  }
  const Tensor pair = encode_qa_pair(tape, qe.summary, a, p.encoders);
  s.visual = fuse_visual(tape, s.regions, s.att, pair, p.cvif, cfg);
  s.fused = fuse_multimodal(tape, s.history.hidden, s.visual.v, p);

  t.att = s.att.to_vector();
  t.selected = s.visual.selected;
  if (s.visual.lambda.defined()) t.lambda = s.visual.lambda.item();
  s.traces.push_back(std::move(t));
}

}  // namespace advse
