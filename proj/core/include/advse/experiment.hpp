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


// End-to-end experiment plumbing shared by the command-line tool and the
// acceptance harness: one declarative config, deterministic datasets, and
// seeded training and ablation runs.

#ifndef ADVSE_EXPERIMENT_HPP_
#define ADVSE_EXPERIMENT_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "advse/game.hpp"
#include "advse/training.hpp"

namespace advse {

struct DataConfig {
  std::uint64_t base_seed = 1;
  std::size_t train = 10000;
  std::size_t val = 500;
  std::size_t new_game = 1000;
  std::size_t new_object = 1000;
};

struct EvalConfig {
  std::string strategy = "greedy";
  std::size_t beam_width = 20;
  std::uint64_t sample_seed = 0;
  std::string split = "new_game";
  std::size_t max_turns = 8;

  DecodeStrategy decode() const;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  world::WorldConfig world;
  world::ScriptConfig script;
  DataConfig data;
  ModelConfig model;
  TrainConfig qgen_sl;
  TrainConfig guesser_sl;
  RlConfig rl;
  EvalConfig eval;

  ExperimentConfig();
  nlohmann::json to_json() const;
  // Missing keys keep their defaults; unknown keys raise ConfigError.
  static ExperimentConfig from_json(const nlohmann::json& j);
  void validate() const;
};

// Applies "a.b.c=value" to `config`. The value is parsed as JSON when it
// parses, else taken as a string.
void apply_override(nlohmann::json& config, std::string_view assignment);

struct Datasets {
  std::vector<world::Game> train;
  std::vector<world::Game> val;
  std::vector<world::Game> new_game;
  std::vector<world::Game> new_object;

  const std::vector<world::Game>& split(world::Split s) const;
};

Datasets make_datasets(const ExperimentConfig& config);

// Model initialization and example order derive from `seed`.
Guesser train_guesser(const ExperimentConfig& config, const Datasets& data, std::uint64_t seed,
                      TrainLog* log = nullptr, const ProgressFn& progress = {});
QuestionGenerator train_qgen(const ExperimentConfig& config, const Datasets& data,
                             const Ablation& ablation, std::uint64_t seed,
                             TrainLog* log = nullptr, const ProgressFn& progress = {});

struct AblationRow {
  std::string label;
  std::vector<double> success;  // one entry per seed
  double median = 0.0;
  double mean = 0.0;
  std::optional<TTestResult> vs_full;  // absent for the full model

  nlohmann::json to_json() const;
};

// The four variants in fixed order: full, w/o SO, w/o ADFA, w/o CVIF.
std::vector<Ablation> ablation_variants();

// Trains one guesser per seed and one question generator per (variant,
// seed); evaluates every pair on the configured split.
std::vector<AblationRow> run_ablation(const ExperimentConfig& config, const Datasets& data,
                                      std::span<const std::uint64_t> seeds,
                                      const std::function<void(const std::string&)>& note = {});

std::string format_ablation_table(std::span<const AblationRow> rows);

}  // namespace advse

#endif  // ADVSE_EXPERIMENT_HPP_
