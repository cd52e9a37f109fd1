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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <set>
#include <random>
#include <tuple>

#include <doctest.h>

#include "advse/error.hpp"
#include "advse/world.hpp"
#include "oracle.hpp"

namespace advse::world {
namespace {

TEST_CASE("vocabulary round-trips and has the documented size") {
  CHECK(vocab::kSize == 51);
  CHECK(vocab::to_string(vocab::kStart) == "<start>");
  CHECK(vocab::to_string(vocab::kStop) == "<stop>");
  for (Token t = 0; t < vocab::kSize; ++t) {
    CHECK(vocab::from_string(vocab::to_string(t)) == t);
  }
  CHECK_FALSE(vocab::from_string("zebra").has_value());
}

TEST_CASE("answers parse from their canonical spellings") {
  CHECK(parse_answer("yes") == Answer::kYes);
  CHECK(parse_answer("no") == Answer::kNo);
  CHECK(parse_answer("na") == Answer::kNa);
  CHECK_THROWS_AS(parse_answer("maybe"), ConfigError);
}

TEST_CASE("generate_scene is deterministic and honours the non-identical guarantee") {
  const WorldConfig config;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const Scene a = generate_scene(seed, config);
    const Scene b = generate_scene(seed, config);
    REQUIRE(a.size() == config.num_objects);
    CHECK(a.features == b.features);
    CHECK(a.features.size() == a.size() * config.feature_dim);
    std::set<std::tuple<int, int, int, int>> seen;
    for (const auto& o : a.objects) {
      CHECK(o.bbox.x_min < o.bbox.x_max);
      CHECK(o.bbox.y_min < o.bbox.y_max);
      CHECK(o.bbox.x_min >= 0.0);
      CHECK(o.bbox.y_max <= 1.0);
      CHECK(seen.emplace(o.category, o.color, o.size, o.quadrant()).second);
    }
    for (double v : a.features) CHECK(std::isfinite(v));
  }
}

TEST_CASE("two-object scenes hold distinct objects") {
  WorldConfig config;
  config.num_objects = 2;
  const Scene s = generate_scene(3, config);
  const auto& a = s.objects[0];
  const auto& b = s.objects[1];
  CHECK((a.category != b.category || a.color != b.color || a.size != b.size ||
         a.quadrant() != b.quadrant()));
}

TEST_CASE("too many objects is a configuration error") {
  WorldConfig config;
  config.num_objects = 12 * 6 * 3 * 4 + 1;
  CHECK_THROWS_AS(generate_scene(0, config), ConfigError);
}

TEST_CASE("features are a fixed projection of attributes plus small noise") {
  WorldConfig quiet;
  quiet.feature_noise = 0.0;
  const Scene a = generate_scene(5, quiet);
  const Scene b = make_scene(a.objects, 999, quiet);
  CHECK(a.features == b.features);
  const Scene noisy = make_scene(a.objects, 5, WorldConfig{});
  double max_dev = 0.0;
  for (std::size_t i = 0; i < a.features.size(); ++i) {
    max_dev = std::max(max_dev, std::abs(noisy.features[i] - a.features[i]));
  }
  CHECK(max_dev > 0.0);
  CHECK(max_dev < 0.05 * 6.0);
}

TEST_CASE("oracle agrees with an independent string-level evaluator over grammar x 200 scenes") {
  const auto grammar = testing::grammar_sentences();
  CHECK(grammar.size() == all_predicates().size());
  std::size_t checked = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const Scene s = generate_scene(seed * 7919 + 1, WorldConfig{});
    for (std::size_t t = 0; t < s.size(); ++t) {
      for (const auto& words : grammar) {
        const Question q = question_from_strings(words);
        const bool expected = testing::brute_force_holds(words, s, t);
        REQUIRE(oracle_answer(s, t, q) == (expected ? Answer::kYes : Answer::kNo));
        ++checked;
      }
    }
  }
  CHECK(checked == 200 * 8 * grammar.size());
}

TEST_CASE("every short token sequence outside the grammar is answered N/A") {
  const Scene s = generate_scene(42, WorldConfig{});
  std::set<std::vector<Token>> grammar;
  for (const auto& p : all_predicates()) grammar.insert(to_tokens(p, false));
  for (Token a = 0; a < vocab::kSize; ++a) {
    const Question q1{{a}};
    if (!grammar.contains(q1.tokens)) CHECK(oracle_answer(s, 0, q1) == Answer::kNa);
    for (Token b = 0; b < vocab::kSize; ++b) {
      Question q2{{a, b}};
      const bool well_formed = grammar.contains(std::vector<Token>(q2.content().begin(),
                                                                   q2.content().end()));
      CHECK((oracle_answer(s, 0, q2) == Answer::kNa) == !well_formed);
    }
  }
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<Token> tok(0, vocab::kSize - 1);
  for (int i = 0; i < 20000; ++i) {
    Question q{{tok(rng), tok(rng), tok(rng)}};
    const bool well_formed =
        grammar.contains(std::vector<Token>(q.content().begin(), q.content().end()));
    CHECK((oracle_answer(s, 3, q) == Answer::kNa) == !well_formed);
  }
}

TEST_CASE("oracle spec examples") {
  WorldConfig config;
  const Scene s = make_scene({{3, 0, 1, {0.1, 0.1, 0.3, 0.3}}, {1, 2, 0, {0.6, 0.6, 0.7, 0.7}}},
                             0, config);
  CHECK(oracle_answer(s, 0, question_from_strings({"category", "car"})) == Answer::kYes);
  CHECK(oracle_answer(s, 0, question_from_strings({"color", "blue"})) == Answer::kNo);
  CHECK(oracle_answer(s, 0, question_from_strings({"car", "category", "left"})) == Answer::kNa);
  CHECK(oracle_answer(s, 0, question_from_strings({"<stop>"})) == Answer::kNa);
}

TEST_CASE("to_question and parse_question are inverse over the grammar") {
  for (const auto& p : all_predicates()) {
    const Question q = to_question(p);
    CHECK(q.tokens.back() == vocab::kStop);
    CHECK(parse_question(q) == p);
  }
}

TEST_CASE("scripted dialogue: unique dog is asked about first") {
  WorldConfig config;
  std::vector<SceneObject> objs = {
      {1, 0, 1, {0.05, 0.05, 0.2, 0.2}},  // the only dog
      {2, 0, 1, {0.55, 0.55, 0.7, 0.7}},
  };
  // Every splitting question scores 1; category questions come first in grammar order.
  const Scene s = make_scene(objs, 0, config);
  const Dialogue d = sample_human_dialogue(s, 0, 1, ScriptConfig{8, 0.0});
  REQUIRE(d.size() >= 1);
  CHECK(d[0].question.text() == "category dog <stop>");
  CHECK(d[0].answer == Answer::kYes);
}

TEST_CASE("scripted dialogue: same-category objects differing by position get a spatial question") {
  WorldConfig config;
  const Scene s = make_scene({{3, 0, 1, {0.05, 0.4, 0.2, 0.6}}, {3, 0, 1, {0.7, 0.4, 0.85, 0.6}}},
                             0, config);
  const Dialogue d = sample_human_dialogue(s, 1, 9, ScriptConfig{});
  bool spatial = false;
  for (const auto& t : d) {
    const auto p = parse_question(t.question);
    REQUIRE(p.has_value());
    spatial |= p->kind == PredicateKind::kHalf || p->kind == PredicateKind::kQuadrant ||
               p->kind == PredicateKind::kRank;
  }
  CHECK(spatial);
}

TEST_CASE("scripted dialogues: deterministic, 2..T turns, consistent answers, winnable") {
  const auto games = make_split(Split::kTrain, 300, WorldConfig{}, ScriptConfig{}, 1);
  const auto again = make_split(Split::kTrain, 300, WorldConfig{}, ScriptConfig{}, 1);
  for (std::size_t i = 0; i < games.size(); ++i) {
    const Game& g = games[i];
    REQUIRE(g.dialogue.size() == again[i].dialogue.size());
    for (std::size_t t = 0; t < g.dialogue.size(); ++t) {
      CHECK(g.dialogue[t].question == again[i].dialogue[t].question);
    }
    CHECK(g.dialogue.size() >= 2);
    CHECK(g.dialogue.size() <= 8);
    for (const auto& turn : g.dialogue) {
      CHECK(oracle_answer(g.scene, g.target, turn.question) == turn.answer);
    }
    // Bayesian filter with a uniform prior: the consistent set is the posterior support.
    const auto consistent = testing::consistent_candidates(g.scene, g.dialogue);
    REQUIRE(std::find(consistent.begin(), consistent.end(), g.target) != consistent.end());
    CHECK(consistent.size() == 1);
  }
}

TEST_CASE("splits: new_game scenes are disjoint from train, new_object reuses scenes with new targets") {
  const WorldConfig wc;
  const ScriptConfig sc;
  const auto train = make_split(Split::kTrain, 100, wc, sc, 1);
  const auto val = make_split(Split::kVal, 100, wc, sc, 1);
  const auto new_game = make_split(Split::kNewGame, 100, wc, sc, 1);
  const auto new_object = make_split(Split::kNewObject, 100, wc, sc, 1);
  std::set<std::uint64_t> train_seeds;
  for (const auto& g : train) train_seeds.insert(g.scene.seed);
  for (const auto& g : val) CHECK_FALSE(train_seeds.contains(g.scene.seed));
  for (const auto& g : new_game) {
    CHECK_FALSE(train_seeds.contains(g.scene.seed));
    CHECK_FALSE(is_training_scene(g.scene.seed, 1, 100));
  }
  for (std::size_t i = 0; i < train.size(); ++i) {
    CHECK(new_object[i].scene.seed == train[i].scene.seed);
    CHECK(new_object[i].target != train[i].target);
  }
  CHECK(parse_split("new_image") == Split::kNewGame);
  CHECK_THROWS_AS(parse_split("bogus"), ConfigError);
}

TEST_CASE("JSONL round trip reproduces games exactly") {
  const auto games = make_split(Split::kVal, 20, WorldConfig{}, ScriptConfig{}, 4);
  const auto path = std::filesystem::temp_directory_path() / "advse_world_roundtrip.jsonl";
  write_games(path, games);
  const auto back = read_games(path, WorldConfig{});
  REQUIRE(back.size() == games.size());
  for (std::size_t i = 0; i < games.size(); ++i) {
    CHECK(back[i].scene.seed == games[i].scene.seed);
    CHECK(back[i].scene.features == games[i].scene.features);
    CHECK(back[i].target == games[i].target);
    REQUIRE(back[i].dialogue.size() == games[i].dialogue.size());
    for (std::size_t t = 0; t < games[i].dialogue.size(); ++t) {
      CHECK(back[i].dialogue[t].question == games[i].dialogue[t].question);
      CHECK(back[i].dialogue[t].answer == games[i].dialogue[t].answer);
    }
  }
  std::filesystem::remove(path);
}

TEST_CASE("malformed records raise ConfigError") {
  nlohmann::json j = game_to_json(make_split(Split::kVal, 1, WorldConfig{}, ScriptConfig{}, 4)[0]);
  j["target"] = 99;
  CHECK_THROWS_AS(game_from_json(j, WorldConfig{}), ConfigError);
  j.erase("objects");
  CHECK_THROWS_AS(game_from_json(j, WorldConfig{}), ConfigError);
}

}  // namespace
}  // namespace advse::world
