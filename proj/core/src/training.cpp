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

#include "advse/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "advse/error.hpp"

namespace advse {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::size_t> shuffled(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

void emit(TrainLog& log, const ProgressFn& progress, LogRow row) {
  if (progress) progress(row);
  log.rows.push_back(std::move(row));
}

// Shared minibatch loop: `loss_of(tape, index, noise_seed)` builds one
// example's loss on a fresh tape.
template <typename LossFn, typename ValFn>
TrainLog supervised_loop(ParameterStore& store, std::size_t n_train, const TrainConfig& config,
                         LossFn&& loss_of, ValFn&& validate, const ProgressFn& progress) {
  if (n_train == 0) throw Error("training set is empty");
  if (config.batch_size == 0) throw ConfigError("batch_size must be >= 1");
  TrainLog log;
  emit(log, progress, {0, "val", validate(), kNaN});
  Optimizer opt(config.optimizer);
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto order = shuffled(n_train, mix_seed(config.seed, epoch));
    double total = 0.0;
    for (std::size_t start = 0; start < n_train; start += config.batch_size) {
      const std::size_t end = std::min(n_train, start + config.batch_size);
      const double inv = 1.0 / static_cast<double>(end - start);
      store.zero_grad();
      for (std::size_t i = start; i < end; ++i) {
        Tape tape;
        const std::uint64_t noise = mix_seed(config.seed, epoch * n_train + order[i]);
        const Tensor loss = loss_of(tape, order[i], noise);
        total += loss.item();
        tape.backward(scale(loss, inv));
      }
      if (config.clip_norm > 0.0) clip_grad_norm(store, config.clip_norm);
      opt.step(store);
    }
    emit(log, progress, {epoch, "train", total / static_cast<double>(n_train), kNaN});
    emit(log, progress, {epoch, "val", validate(), kNaN});
    opt.set_lr(opt.lr() * config.lr_decay);
  }
  return log;
}

}  // namespace

void TrainLog::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out.precision(10);
  out << "epoch,split,loss,success_rate\n";
  for (const auto& r : rows) {
    out << r.step << ',' << r.split << ',';
    if (!std::isnan(r.loss)) out << r.loss;
    out << ',';
    if (!std::isnan(r.success_rate)) out << r.success_rate;
    out << '\n';
  }
}

double qgen_validation_nll(const QuestionGenerator& qgen, std::span<const world::Game> games,
                           std::size_t max_turns) {
  if (games.empty()) return kNaN;
  double total = 0.0;
  for (const auto& g : games) {
    Tape tape;
    total += qgen.dialogue_nll(tape, g, max_turns, Mode::kEval, 0).item();
  }
  return total / static_cast<double>(games.size());
}

double guesser_validation_loss(const Guesser& guesser, std::span<const world::Game> games) {
  if (games.empty()) return kNaN;
  double total = 0.0;
  for (const auto& g : games) {
    Tape tape;
    total += guesser.loss(tape, g, Mode::kEval, 0).item();
  }
  return total / static_cast<double>(games.size());
}

TrainLog sl_train_qgen(QuestionGenerator& qgen, std::span<const world::Game> train,
                       std::span<const world::Game> val, const TrainConfig& config,
                       const ProgressFn& progress) {
  return supervised_loop(
      qgen.parameters(), train.size(), config,
      [&](Tape& tape, std::size_t i, std::uint64_t noise) {
        return qgen.dialogue_nll(tape, train[i], config.max_turns, Mode::kTrain, noise);
      },
      [&] { return qgen_validation_nll(qgen, val, config.max_turns); }, progress);
}

TrainLog sl_train_guesser(Guesser& guesser, std::span<const world::Game> train,
                          std::span<const world::Game> val, const TrainConfig& config,
                          const ProgressFn& progress) {
  return supervised_loop(
      guesser.parameters(), train.size(), config,
      [&](Tape& tape, std::size_t i, std::uint64_t noise) {
        return guesser.loss(tape, train[i], Mode::kTrain, noise);
      },
      [&] { return guesser_validation_loss(guesser, val); }, progress);
}

Tensor reinforce_loss(std::span<const Tensor> episode_nll, std::span<const double> rewards,
                      double baseline) {
  if (episode_nll.empty() || episode_nll.size() != rewards.size()) {
    throw Error("reinforce_loss: need one reward per episode");
  }
  const double inv = 1.0 / static_cast<double>(episode_nll.size());
  Tensor total;
  for (std::size_t i = 0; i < episode_nll.size(); ++i) {
    const Tensor term = scale(episode_nll[i], (rewards[i] - baseline) * inv);
    total = total.defined() ? add(total, term) : term;
  }
  return total;
}

Rollout rollout(Tape& tape, const QuestionGenerator& qgen, const Guesser& guesser,
                const world::Scene& scene, std::size_t target, std::size_t max_turns,
                std::mt19937_64& rng, std::uint64_t noise_seed) {
  Rollout r;
  DialogueState state = qgen.estimator().begin(tape, scene);
  for (std::size_t t = 0; t < max_turns; ++t) {
    auto [q, nll] = qgen.sample(tape, state, rng);
    r.nll = r.nll.defined() ? add(r.nll, nll) : nll;
    if (q.is_stop()) break;
    const world::Answer a = world::oracle_answer(scene, target, q);
    qgen.estimator().advance(tape, state, q, a, Mode::kTrain, noise_seed);
    r.dialogue.push_back({std::move(q), a});
  }
  r.reward = guesser.predict(scene, r.dialogue).predicted == target ? 1.0 : 0.0;
  return r;
}

TrainLog rl_train_qgen(QuestionGenerator& qgen, const Guesser& guesser,
                       std::span<const world::Game> train, std::span<const world::Game> eval,
                       const RlConfig& config, const ProgressFn& progress) {
  if (train.empty()) throw Error("RL training set is empty");
  if (config.batch_size == 0) throw ConfigError("batch_size must be >= 1");
  TrainLog log;
  auto evaluate_greedy = [&] {
    if (eval.empty()) return kNaN;
    return evaluate(qgen, guesser, eval, DecodeStrategy::greedy(), config.max_turns)
        .success_rate;
  };
  emit(log, progress, {0, "eval", kNaN, evaluate_greedy()});

  ParameterStore& store = qgen.parameters();
  Optimizer opt(config.optimizer);
  std::mt19937_64 rng(mix_seed(config.seed, 0));
  std::uniform_int_distribution<std::size_t> pick_game(0, train.size() - 1);
  double baseline = 0.0;
  const double inv = 1.0 / static_cast<double>(config.batch_size);
  for (std::size_t it = 1; it <= config.iterations; ++it) {
    store.zero_grad();
    double reward_sum = 0.0;
    double surrogate = 0.0;
    const double b = baseline;
    for (std::size_t e = 0; e < config.batch_size; ++e) {
      const world::Scene& scene = train[pick_game(rng)].scene;
      const std::size_t target =
          std::uniform_int_distribution<std::size_t>(0, scene.size() - 1)(rng);
      Tape tape;
      const Rollout r = rollout(tape, qgen, guesser, scene, target, config.max_turns, rng,
                                mix_seed(config.seed, it * config.batch_size + e));
      const Tensor loss = scale(r.nll, (r.reward - b) * inv);
      surrogate += loss.item();
      tape.backward(loss);
      reward_sum += r.reward;
      baseline = config.baseline_momentum * baseline +
                 (1.0 - config.baseline_momentum) * r.reward;
    }
    if (config.clip_norm > 0.0) clip_grad_norm(store, config.clip_norm);
    opt.step(store);
    emit(log, progress, {it, "rl", surrogate, reward_sum * inv});
    if (config.eval_every > 0 && it % config.eval_every == 0 && it != config.iterations) {
      emit(log, progress, {it, "eval", kNaN, evaluate_greedy()});
    }
  }
  emit(log, progress, {config.iterations, "eval", kNaN, evaluate_greedy()});
  return log;
}

}  // namespace advse
