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

#ifndef ADVSE_MODEL_CONFIG_HPP_
#define ADVSE_MODEL_CONFIG_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "advse/world.hpp"

namespace advse {

// Components removed for ablation runs.
struct Ablation {
  bool no_sharpen = false;  // "w/o SO": the answer adjusts raw attention
  bool no_adfa = false;     // "w/o ADFA": attention from history only
  bool no_cvif = false;     // "w/o CVIF": overall visual information only

  std::vector<std::string> names() const;
  static Ablation from_names(const std::vector<std::string>& names);
  std::string label() const;
};

// Normalization applied to the masked previous attention before the
// temperature softmax.
enum class FocusNorm { kL1, kL2 };

struct ModelConfig {
  std::size_t vocab_size = world::vocab::kSize;
  std::size_t num_categories = world::kCategories.size();
  std::size_t word_dim = 64;
  std::size_t hidden_dim = 128;
  std::size_t visual_dim = 32;
  std::size_t attention_dim = 64;
  std::size_t category_dim = 32;
  std::size_t object_hidden_dim = 64;
  std::size_t max_question_length = 12;
  double gamma = 0.7;
  Ablation ablation;
  FocusNorm focus_norm = FocusNorm::kL1;
  // Pass gradients through the binary sharpening mask as if it were the
  // identity on the question attention.
  bool straight_through = false;
  // Weight CVIF by att / sum(att) instead of the raw attention state.
  bool normalize_fusion_attention = false;
  // Learned projection of F_T before the guesser dot product (else identity).
  bool guesser_projection = true;

  nlohmann::json to_json() const;
  // Missing keys keep their defaults; unknown keys are rejected.
  static ModelConfig from_json(const nlohmann::json& j);
  void validate() const;
};

}  // namespace advse

#endif  // ADVSE_MODEL_CONFIG_HPP_
