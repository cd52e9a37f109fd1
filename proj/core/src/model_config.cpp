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

#include "advse/model_config.hpp"

#include <set>

#include "advse/error.hpp"

namespace advse {

std::vector<std::string> Ablation::names() const {
  std::vector<std::string> out;
  if (no_sharpen) out.emplace_back("SO");
  if (no_adfa) out.emplace_back("ADFA");
  if (no_cvif) out.emplace_back("CVIF");
  return out;
}

Ablation Ablation::from_names(const std::vector<std::string>& names) {
  Ablation a;
  for (const auto& n : names) {
    if (n == "SO") a.no_sharpen = true;
    else if (n == "ADFA") a.no_adfa = true;
    else if (n == "CVIF") a.no_cvif = true;
    else throw ConfigError("unknown ablation '" + n + "' (expected SO, ADFA or CVIF)");
  }
  return a;
}

std::string Ablation::label() const {
  const auto n = names();
  if (n.empty()) return "full";
  std::string out = "w/o";
  for (const auto& s : n) out += " " + s;
  return out;
}

nlohmann::json ModelConfig::to_json() const {
  return {{"vocab_size", vocab_size},
          {"num_categories", num_categories},
          {"word_dim", word_dim},
          {"hidden_dim", hidden_dim},
          {"visual_dim", visual_dim},
          {"attention_dim", attention_dim},
          {"category_dim", category_dim},
          {"object_hidden_dim", object_hidden_dim},
          {"max_question_length", max_question_length},
          {"gamma", gamma},
          {"ablation", ablation.names()},
          {"focus_norm", focus_norm == FocusNorm::kL1 ? "l1" : "l2"},
          {"straight_through", straight_through},
          {"normalize_fusion_attention", normalize_fusion_attention},
          {"guesser_projection", guesser_projection}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  static const std::set<std::string> known = {
      "vocab_size",         "num_categories",   "word_dim",
      "hidden_dim",         "visual_dim",       "attention_dim",
      "category_dim",       "object_hidden_dim", "max_question_length",
      "gamma",              "ablation",         "focus_norm",
      "straight_through",   "normalize_fusion_attention",
      "guesser_projection"};
  if (!j.is_object()) throw ConfigError("model config must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw ConfigError("unknown model config key '" + key + "'");
  }
  ModelConfig c;
  try {
    c.vocab_size = j.value("vocab_size", c.vocab_size);
    c.num_categories = j.value("num_categories", c.num_categories);
    c.word_dim = j.value("word_dim", c.word_dim);
    c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
    c.visual_dim = j.value("visual_dim", c.visual_dim);
    c.attention_dim = j.value("attention_dim", c.attention_dim);
    c.category_dim = j.value("category_dim", c.category_dim);
    c.object_hidden_dim = j.value("object_hidden_dim", c.object_hidden_dim);
    c.max_question_length = j.value("max_question_length", c.max_question_length);
    c.gamma = j.value("gamma", c.gamma);
    if (j.contains("ablation")) {
      c.ablation = Ablation::from_names(j.at("ablation").get<std::vector<std::string>>());
    }
    const std::string norm = j.value("focus_norm", std::string("l1"));
    if (norm == "l1") c.focus_norm = FocusNorm::kL1;
    else if (norm == "l2") c.focus_norm = FocusNorm::kL2;
    else throw ConfigError("focus_norm must be l1 or l2");
    c.straight_through = j.value("straight_through", c.straight_through);
    c.normalize_fusion_attention =
        j.value("normalize_fusion_attention", c.normalize_fusion_attention);
    c.guesser_projection = j.value("guesser_projection", c.guesser_projection);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("model config: ") + e.what());
  }
  c.validate();
  return c;
}

void ModelConfig::validate() const {
  if (vocab_size == 0 || word_dim == 0 || hidden_dim == 0 || visual_dim == 0 ||
      attention_dim == 0 || category_dim == 0 || object_hidden_dim == 0) {
    throw ConfigError("model dimensions must be positive");
  }
  if (max_question_length == 0) throw ConfigError("max_question_length must be >= 1");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
}

}  // namespace advse
