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


#include <random>

#include <benchmark/benchmark.h>

#include "advse/game.hpp"
#include "advse/training.hpp"

namespace advse {
namespace {

ModelConfig bench_model() {
  ModelConfig c;
  c.word_dim = 32;
  c.hidden_dim = 64;
  c.attention_dim = 32;
  return c;
}

const world::Game& bench_game() {
  static const world::Game g = world::make_split(world::Split::kTrain, 1, {}, {}, 1).front();
  return g;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  std::vector<double> a(n * n), b(n);
  for (double& v : a) v = normal(rng);
  for (double& v : b) v = normal(rng);
  for (auto _ : state) {
    Tape tape;
    const Tensor y = matmul(tape.constant({n, n}, a), tape.constant({n}, b));
    benchmark::DoNotOptimize(y.values().data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Matmul)->RangeMultiplier(2)->Range(16, 256)->Complexity(benchmark::oNSquared);

void BM_SceneAndScriptedDialogue(benchmark::State& state) {
  world::WorldConfig wc;
  wc.num_objects = static_cast<std::size_t>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    const world::Scene s = world::generate_scene(seed, wc);
    benchmark::DoNotOptimize(world::sample_human_dialogue(s, seed % s.size(), seed, {}));
    ++seed;
  }
}
BENCHMARK(BM_SceneAndScriptedDialogue)->Arg(4)->Arg(8)->Arg(12);

void BM_EstimatorTurn(benchmark::State& state) {
  const QuestionGenerator q(bench_model(), 1);
  const world::Game& g = bench_game();
  for (auto _ : state) {
    Tape tape;
    DialogueState s = q.estimator().begin(tape, g.scene);
    for (const auto& turn : g.dialogue) {
      q.estimator().advance(tape, s, turn.question, turn.answer, Mode::kEval, 0);
    }
    benchmark::DoNotOptimize(s.fused.values().data());
  }
  state.counters["turns"] = static_cast<double>(g.dialogue.size());
}
BENCHMARK(BM_EstimatorTurn)->Unit(benchmark::kMicrosecond);

void BM_QGenDialogueLossAndBackward(benchmark::State& state) {
  QuestionGenerator q(bench_model(), 1);
  const world::Game& g = bench_game();
  for (auto _ : state) {
    Tape tape;
    const Tensor loss = q.dialogue_nll(tape, g, 8, Mode::kTrain, 3);
    tape.backward(loss);
    benchmark::DoNotOptimize(loss.item());
  }
}
BENCHMARK(BM_QGenDialogueLossAndBackward)->Unit(benchmark::kMillisecond);

void BM_GuesserLossAndBackward(benchmark::State& state) {
  Guesser guesser(bench_model(), 1);
  const world::Game& g = bench_game();
  for (auto _ : state) {
    Tape tape;
    const Tensor loss = guesser.loss(tape, g, Mode::kTrain, 3);
    tape.backward(loss);
    benchmark::DoNotOptimize(loss.item());
  }
}
BENCHMARK(BM_GuesserLossAndBackward)->Unit(benchmark::kMillisecond);

void BM_Generate(benchmark::State& state) {
  const QuestionGenerator q(bench_model(), 1);
  const world::Game& g = bench_game();
  const DecodeStrategy strategy = state.range(0) == 0
                                      ? DecodeStrategy::greedy()
                                      : DecodeStrategy::beam(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    Tape tape;
    const DialogueState s = q.estimator().begin(tape, g.scene);
    benchmark::DoNotOptimize(q.generate(tape, s, strategy));
  }
}
BENCHMARK(BM_Generate)->Arg(0)->Arg(5)->Arg(20)->Unit(benchmark::kMicrosecond);

void BM_SelfPlayEpisode(benchmark::State& state) {
  const QuestionGenerator q(bench_model(), 1);
  const Guesser guesser(bench_model(), 2);
  const world::Game& g = bench_game();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        play_episode(g.scene, g.target, q, guesser, DecodeStrategy::greedy(), 8).success);
  }
}
BENCHMARK(BM_SelfPlayEpisode)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace advse

BENCHMARK_MAIN();
