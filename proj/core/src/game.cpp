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

#include "advse/game.hpp"

#include <random>

#include "advse/error.hpp"

namespace advse {

namespace {

nlohmann::json question_json(const world::Question& q) {
  std::vector<std::string> words;
  for (const world::Token t : q.tokens) words.emplace_back(world::vocab::to_string(t));
  return {{"tokens", words}, {"text", q.text()}};
}

}  // namespace

nlohmann::json EpisodeResult::to_json() const {
  nlohmann::json turns = nlohmann::json::array();
  for (const auto& t : transcript) {
    nlohmann::json j = question_json(t.question);
    j["answer"] = world::to_string(t.answer);
    turns.push_back(std::move(j));
  }
  nlohmann::json tr = nlohmann::json::array();
  for (const auto& t : traces) tr.push_back(t.to_json());
  return {{"transcript", std::move(turns)},
          {"stopped_early", stopped_early},
          {"guess_distribution", guess_distribution},
          {"predicted", predicted},
          {"target", target},
          {"success", success},
          {"traces", std::move(tr)}};
}

EpisodeRunner::EpisodeRunner(const QuestionGenerator& qgen, const Guesser& guesser,
                             world::Scene scene, std::size_t target, DecodeStrategy strategy,
                             std::size_t max_turns)
    : qgen_(&qgen),
      guesser_(&guesser),
      scene_(std::move(scene)),
      target_(target),
      strategy_(strategy),
      max_turns_(max_turns),
      tape_(std::make_unique<Tape>()) {
  if (max_turns_ == 0) throw ConfigError("max_turns must be >= 1");
  if (target_ >= scene_.size()) throw Error("target index out of range");
  state_ = qgen_->estimator().begin(*tape_, scene_);
  ask_or_finish();
}

const world::Question& EpisodeRunner::pending_question() const {
  if (finished()) throw Error("episode finished: no pending question");
  return pending_;
}

void EpisodeRunner::submit(world::Answer answer) {
  if (finished()) throw Error("episode finished: answer rejected");
  transcript_.push_back({pending_, answer});
  qgen_->estimator().advance(*tape_, state_, pending_, answer, Mode::kEval, 0);
  ask_or_finish();
}

void EpisodeRunner::ask_or_finish() {
  if (transcript_.size() < max_turns_) {
    pending_ = qgen_->generate(*tape_, state_, strategy_);
    if (!pending_.is_stop()) return;
    stopped_early_ = true;
  }
  const GuessResult g = guesser_->predict(scene_, transcript_);
  EpisodeResult r;
  r.transcript = transcript_;
  r.stopped_early = stopped_early_;
  r.guess_distribution = g.probabilities;
  r.predicted = g.predicted;
  r.target = target_;
  r.success = g.predicted == target_;
  r.traces = state_.traces;
  result_ = std::move(r);
  pending_ = {};
  tape_.reset();
}

const EpisodeResult& EpisodeRunner::result() const {
  if (!finished()) throw Error("episode still running");
  return *result_;
}

EpisodeResult play_episode(const world::Scene& scene, std::size_t target,
                           const QuestionGenerator& qgen, const Guesser& guesser,
                           const DecodeStrategy& strategy, std::size_t max_turns) {
  EpisodeRunner runner(qgen, guesser, scene, target, strategy, max_turns);
  while (!runner.finished()) {
    runner.submit(world::oracle_answer(scene, target, runner.pending_question()));
  }
  return runner.result();
}

nlohmann::json EvalSummary::to_json() const {
  return {{"games", games},
          {"successes", successes},
          {"success_rate", success_rate},
          {"ci_low", ci.lo},
          {"ci_high", ci.hi}};
}

EvalSummary summarize(std::span<const EpisodeResult> results) {
  if (results.empty()) throw Error("evaluation over zero games");
  EvalSummary s;
  s.games = results.size();
  for (const auto& r : results) s.successes += r.success ? 1 : 0;
  s.success_rate = static_cast<double>(s.successes) / static_cast<double>(s.games);
  s.ci = wilson_interval(s.successes, s.games);
  return s;
}

EvalSummary evaluate(const QuestionGenerator& qgen, const Guesser& guesser,
                     std::span<const world::Game> games, const DecodeStrategy& strategy,
                     std::size_t max_turns, std::vector<EpisodeResult>* results) {
  if (games.empty()) throw Error("evaluation over zero games");
  std::vector<EpisodeResult> local;
  local.reserve(games.size());
  for (const auto& g : games) {
    local.push_back(play_episode(g.scene, g.target, qgen, guesser, strategy, max_turns));
  }
  const EvalSummary s = summarize(local);
  if (results) *results = std::move(local);
  return s;
}

EvalSummary evaluate_random_questioner(const Guesser& guesser,
                                       std::span<const world::Game> games,
                                       std::size_t max_turns, std::uint64_t seed) {
  if (games.empty()) throw Error("evaluation over zero games");
  const auto& preds = world::all_predicates();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, preds.size() - 1);
  EvalSummary s;
  s.games = games.size();
  for (const auto& g : games) {
    world::Dialogue d;
    for (std::size_t t = 0; t < max_turns; ++t) {
      const world::Question q = world::to_question(preds[pick(rng)]);
      d.push_back({q, world::oracle_answer(g.scene, g.target, q)});
    }
    s.successes += guesser.predict(g.scene, d).predicted == g.target ? 1 : 0;
  }
  s.success_rate = static_cast<double>(s.successes) / static_cast<double>(s.games);
  s.ci = wilson_interval(s.successes, s.games);
  return s;
}

double guesser_error(const Guesser& guesser, std::span<const world::Game> games) {
  if (games.empty()) throw Error("guesser error over zero games");
  std::size_t wrong = 0;
  for (const auto& g : games) {
    wrong += guesser.predict(g.scene, g.dialogue).predicted != g.target ? 1 : 0;
  }
  return static_cast<double>(wrong) / static_cast<double>(games.size());
}

world::Dialogue flip_answers(const world::Dialogue& dialogue) {
  world::Dialogue out = dialogue;
  for (auto& t : out) {
    if (t.answer == world::Answer::kYes) t.answer = world::Answer::kNo;
    else if (t.answer == world::Answer::kNo) t.answer = world::Answer::kYes;
  }
  return out;
}

double guesser_error_fake_history(const Guesser& guesser, std::span<const world::Game> games) {
  if (games.empty()) throw Error("guesser error over zero games");
  std::size_t wrong = 0;
  for (const auto& g : games) {
    wrong += guesser.predict(g.scene, flip_answers(g.dialogue)).predicted != g.target ? 1 : 0;
  }
  return static_cast<double>(wrong) / static_cast<double>(games.size());
}

}  // namespace advse
