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

// Episode orchestration: the questioner asks, an answer source replies, the
// state advances, and the guesser decides after T rounds or a stop question.

#ifndef ADVSE_GAME_HPP_
#define ADVSE_GAME_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "advse/guesser.hpp"
#include "advse/qgen.hpp"
#include "advse/stats.hpp"

namespace advse {

struct EpisodeResult {
  world::Dialogue transcript;
  bool stopped_early = false;  // the questioner emitted a stop-only question
  std::vector<double> guess_distribution;
  std::size_t predicted = 0;
  std::size_t target = 0;
  bool success = false;
  std::vector<TurnTrace> traces;  // traces[t] for t = 0..transcript.size()

  nlohmann::json to_json() const;
};

// Turn-by-turn episode driven by externally supplied answers. The models
// must outlive the runner.
class EpisodeRunner {
 public:
  EpisodeRunner(const QuestionGenerator& qgen, const Guesser& guesser, world::Scene scene,
                std::size_t target, DecodeStrategy strategy, std::size_t max_turns);

  bool finished() const { return result_.has_value(); }
  // Throws Error once the episode is finished.
  const world::Question& pending_question() const;
  std::size_t turn() const { return transcript_.size(); }
  const std::vector<TurnTrace>& traces() const { return state_.traces; }
  const world::Dialogue& transcript() const { return transcript_; }
  const world::Scene& scene() const { return scene_; }
  std::size_t target() const { return target_; }

  // Throws Error when the episode is already finished.
  void submit(world::Answer answer);

  // Throws Error while the episode is still running.
  const EpisodeResult& result() const;

 private:
  void ask_or_finish();

  const QuestionGenerator* qgen_;
  const Guesser* guesser_;
  world::Scene scene_;
  std::size_t target_;
  DecodeStrategy strategy_;
  std::size_t max_turns_;
  std::unique_ptr<Tape> tape_;
  DialogueState state_;
  world::Dialogue transcript_;
  world::Question pending_;
  bool stopped_early_ = false;
  std::optional<EpisodeResult> result_;
};

// Self-play with the rule-based oracle.
EpisodeResult play_episode(const world::Scene& scene, std::size_t target,
                           const QuestionGenerator& qgen, const Guesser& guesser,
                           const DecodeStrategy& strategy, std::size_t max_turns);

struct EvalSummary {
  std::size_t games = 0;
  std::size_t successes = 0;
  double success_rate = 0.0;
  Interval ci;  // Wilson 95%

  nlohmann::json to_json() const;
};

EvalSummary summarize(std::span<const EpisodeResult> results);

// Plays every game (scene and target) in order. Throws Error on an empty set.
EvalSummary evaluate(const QuestionGenerator& qgen, const Guesser& guesser,
                     std::span<const world::Game> games, const DecodeStrategy& strategy,
                     std::size_t max_turns, std::vector<EpisodeResult>* results = nullptr);

// Baseline questioner asking uniformly drawn well-formed questions.
EvalSummary evaluate_random_questioner(const Guesser& guesser,
                                       std::span<const world::Game> games,
                                       std::size_t max_turns, std::uint64_t seed);

// Guesser error on the recorded transcripts.
double guesser_error(const Guesser& guesser, std::span<const world::Game> games);

world::Dialogue flip_answers(const world::Dialogue& dialogue);

// Guesser error on fake transcripts: same questions, YES and NO swapped.
double guesser_error_fake_history(const Guesser& guesser, std::span<const world::Game> games);

}  // namespace advse

#endif  // ADVSE_GAME_HPP_
