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

// Supervised and policy-gradient training loops.

#ifndef ADVSE_TRAINING_HPP_
#define ADVSE_TRAINING_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "advse/game.hpp"
#include "advse/optim.hpp"

namespace advse {

struct TrainConfig {
  OptimizerConfig optimizer;  // Adam, lr 1e-3
  std::size_t batch_size = 64;
  std::size_t epochs = 10;
  double lr_decay = 0.9;      // multiplied into lr after every epoch
  double clip_norm = 0.0;     // 0 disables clipping
  std::size_t max_turns = 8;
  std::uint64_t seed = 0;
};

struct RlConfig {
  OptimizerConfig optimizer{OptimizerKind::kSgd, 1e-3};
  std::size_t iterations = 200;
  std::size_t batch_size = 64;
  std::size_t max_turns = 8;
  double clip_norm = 5.0;
  double baseline_momentum = 0.95;  // per-episode running mean of rewards
  std::size_t eval_every = 0;       // 0 evaluates only at the end
  std::uint64_t seed = 0;
};

// One row of a training log; `success_rate` is NaN where not measured.
struct LogRow {
  std::size_t step = 0;
  std::string split;
  double loss = 0.0;
  double success_rate = 0.0;
};

struct TrainLog {
  std::vector<LogRow> rows;

  // Header: epoch,split,loss,success_rate
  void write_csv(const std::filesystem::path& path) const;
};

using ProgressFn = std::function<void(const LogRow&)>;

// Mean per-transcript teacher-forced NLL in eval mode.
double qgen_validation_nll(const QuestionGenerator& qgen, std::span<const world::Game> games,
                           std::size_t max_turns);

// Mean per-game cross-entropy in eval mode.
double guesser_validation_loss(const Guesser& guesser, std::span<const world::Game> games);

// Logs "train" and "val" loss per epoch; row 0 holds the validation loss at
// initialization. Throws Error on an empty training set.
TrainLog sl_train_qgen(QuestionGenerator& qgen, std::span<const world::Game> train,
                       std::span<const world::Game> val, const TrainConfig& config,
                       const ProgressFn& progress = {});

TrainLog sl_train_guesser(Guesser& guesser, std::span<const world::Game> train,
                          std::span<const world::Game> val, const TrainConfig& config,
                          const ProgressFn& progress = {});

// sum_i (r_i - baseline) * nll_i / n, whose gradient is the REINFORCE
// estimate -(1/n) sum_i (r_i - b) grad log p_i.
Tensor reinforce_loss(std::span<const Tensor> episode_nll, std::span<const double> rewards,
                      double baseline);

struct Rollout {
  world::Dialogue dialogue;
  Tensor nll;  // summed over every sampled token, including a final stop
  double reward = 0.0;
};

// Samples one self-play episode in training mode on `tape`.
Rollout rollout(Tape& tape, const QuestionGenerator& qgen, const Guesser& guesser,
                const world::Scene& scene, std::size_t target, std::size_t max_turns,
                std::mt19937_64& rng, std::uint64_t noise_seed);

// REINFORCE on self-play episodes over the scenes of `train` with uniformly
// drawn targets; the guesser is frozen. Logs "rl" rows with the mean batch
// reward and "eval" rows with greedy success on `eval`.
TrainLog rl_train_qgen(QuestionGenerator& qgen, const Guesser& guesser,
                       std::span<const world::Game> train, std::span<const world::Game> eval,
                       const RlConfig& config, const ProgressFn& progress = {});

}  // namespace advse

#endif  // ADVSE_TRAINING_HPP_
