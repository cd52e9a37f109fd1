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

#include <filesystem>

#include <doctest.h>

#include "advse/error.hpp"
#include "advse/guesser.hpp"
#include "advse/qgen.hpp"
#include "sl_gradcheck.hpp"

namespace advse {
namespace {

using testing::tiny_config;
using testing::tiny_game;

TEST_CASE("full supervised question loss passes finite differences, every ablation") {
  for (const auto& names : std::vector<std::vector<std::string>>{
           {}, {"SO"}, {"ADFA"}, {"CVIF"}}) {
    const Ablation ablation = Ablation::from_names(names);
    CAPTURE(ablation.label());
    const auto r = testing::check_qgen_loss(tiny_config(ablation));
    CAPTURE(r.worst);
    CHECK(r.max_rel_error < testing::kFdTolerance);
    CHECK(r.checked > 1000);
  }
}

TEST_CASE("L2 focus normalization and normalized fusion weights keep exact gradients") {
  ModelConfig c = tiny_config();
  c.focus_norm = FocusNorm::kL2;
  c.normalize_fusion_attention = true;
  const auto r = testing::check_qgen_loss(c);
  CHECK(r.max_rel_error < testing::kFdTolerance);
}

TEST_CASE("dialogue NLL is the sum of per-question NLLs plus the closing stop") {
  QuestionGenerator qgen(tiny_config(), 3);
  const world::Game g = tiny_game();
  Tape tape;
  const double total = qgen.dialogue_nll(tape, g, 8, Mode::kEval, 0).item();
  DialogueState s = qgen.estimator().begin(tape, g.scene);
  double manual = 0.0;
  for (const auto& turn : g.dialogue) {
    manual += qgen.question_nll(tape, s, turn.question).item();
    qgen.estimator().advance(tape, s, turn.question, turn.answer, Mode::kEval, 0);
  }
  manual += qgen.question_nll(tape, s, world::Question{{world::vocab::kStop}}).item();
  CHECK(total == doctest::Approx(manual).epsilon(1e-12));

  // A transcript as long as the turn budget gets no closing stop question.
  Tape t2;
  const double capped = qgen.dialogue_nll(t2, g, 3, Mode::kEval, 0).item();
  CHECK(capped == doctest::Approx(manual - qgen.question_nll(tape, s, world::Question{{world::vocab::kStop}}).item()).epsilon(1e-12));
}

TEST_CASE("question NLL rejects questions longer than the cap") {
  QuestionGenerator qgen(tiny_config(), 3);
  Tape tape;
  const DialogueState s = qgen.estimator().begin(tape, tiny_game().scene);
  CHECK_THROWS_AS(qgen.question_nll(tape, s, world::question_from_strings({"rank", "from-left", "2"})),
                  Error);
  CHECK_THROWS_AS(qgen.decode_step(tape, 999, s.visual.v, qgen.init_decoder(s)), Error);
}

TEST_CASE("generation: greedy deterministic, bounded, beam(1) equals greedy, samples seeded") {
  ModelConfig c = tiny_config();
  c.max_question_length = 5;
  QuestionGenerator qgen(c, 8);
  const world::Game g = tiny_game();
  for (std::size_t turns = 0; turns <= g.dialogue.size(); ++turns) {
    Tape tape;
    DialogueState s = qgen.estimator().begin(tape, g.scene);
    for (std::size_t t = 0; t < turns; ++t) {
      qgen.estimator().advance(tape, s, g.dialogue[t].question, g.dialogue[t].answer,
                               Mode::kEval, 0);
    }
    const auto a = qgen.generate(tape, s, DecodeStrategy::greedy());
    const auto b = qgen.generate(tape, s, DecodeStrategy::greedy());
    CHECK(a == b);
    CHECK(a.tokens.size() <= 5);
    CHECK(qgen.generate(tape, s, DecodeStrategy::beam(1)) == a);
    const auto w = qgen.generate(tape, s, DecodeStrategy::beam(4));
    CHECK(w.tokens.size() <= 5);
    CHECK(qgen.generate(tape, s, DecodeStrategy::sample(4)) ==
          qgen.generate(tape, s, DecodeStrategy::sample(4)));
  }
}

TEST_CASE("sample returns the NLL of the drawn question") {
  QuestionGenerator qgen(tiny_config(), 12);
  const world::Game g = tiny_game();
  std::mt19937_64 rng(3);
  int checked = 0;
  for (int i = 0; i < 50; ++i) {
    Tape tape;
    const DialogueState s = qgen.estimator().begin(tape, g.scene);
    const auto [q, nll] = qgen.sample(tape, s, rng);
    CHECK(q.tokens.size() <= 3);
    if (q.tokens.back() != world::vocab::kStop) continue;
    CHECK(nll.item() == doctest::Approx(qgen.question_nll(tape, s, q).item()).epsilon(1e-12));
    ++checked;
  }
  CHECK(checked > 0);
}

TEST_CASE("checkpoint round trip reproduces generation and rejects the wrong kind") {
  QuestionGenerator qgen(tiny_config(), 21);
  const auto dir = std::filesystem::temp_directory_path();
  const auto path = dir / "advse_qgen_roundtrip.json";
  qgen.save(path);
  const QuestionGenerator back = QuestionGenerator::load(path);
  CHECK(back.config().to_json() == qgen.config().to_json());
  const world::Game g = tiny_game();
  Tape t1, t2;
  const auto s1 = qgen.estimator().begin(t1, g.scene);
  const auto s2 = back.estimator().begin(t2, g.scene);
  CHECK(qgen.generate(t1, s1, DecodeStrategy::beam(3)) ==
        back.generate(t2, s2, DecodeStrategy::beam(3)));
  Tape l1, l2;
  CHECK(qgen.dialogue_nll(l1, g, 8, Mode::kEval, 0).item() ==
        back.dialogue_nll(l2, g, 8, Mode::kEval, 0).item());

  const auto gpath = dir / "advse_guesser_as_qgen.json";
  Guesser(tiny_config(), 1).save(gpath);
  CHECK_THROWS_AS(QuestionGenerator::load(gpath), Error);
  std::filesystem::remove(path);
  std::filesystem::remove(gpath);
}

TEST_CASE("model config JSON round trip and validation") {
  ModelConfig c = tiny_config(Ablation::from_names({"ADFA", "CVIF"}));
  c.focus_norm = FocusNorm::kL2;
  const ModelConfig back = ModelConfig::from_json(c.to_json());
  CHECK(back.to_json() == c.to_json());
  CHECK(back.ablation.label() == c.ablation.label());
  auto j = c.to_json();
  j["bogus"] = 1;
  CHECK_THROWS_AS(ModelConfig::from_json(j), ConfigError);
  c.gamma = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK(Ablation{}.label() == "full");
  CHECK(Ablation::from_names({"SO"}).label() == "w/o SO");
  CHECK_THROWS_AS(Ablation::from_names({"XYZ"}), ConfigError);
}

}  // namespace
}  // namespace advse
