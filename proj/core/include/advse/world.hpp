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

// Synthetic object-guessing world: procedural scenes, the question
// mini-language, a rule-based Oracle and a scripted questioner used to
// produce supervised transcripts.
//
// Question grammar (tokens, optionally followed by <stop>):
//
//   category <person|dog|cat|car|truck|bus|bicycle|chair|table|cup|bottle|vase>
//   color    <red|green|blue|yellow|white|black>
//   size     <small|medium|large>
//   half     <left|right|top|bottom>
//   quadrant <top-left|top-right|bottom-left|bottom-right>
//   rank     <from-left|from-top> <1..12>
//
// Any other token sequence is malformed and answered N/A.

#ifndef ADVSE_WORLD_HPP_
#define ADVSE_WORLD_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace advse::world {

using Token = std::uint32_t;

inline constexpr std::array<std::string_view, 12> kCategories = {
    "person", "dog", "cat", "car", "truck", "bus",
    "bicycle", "chair", "table", "cup", "bottle", "vase"};
inline constexpr std::array<std::string_view, 6> kColors = {
    "red", "green", "blue", "yellow", "white", "black"};
inline constexpr std::array<std::string_view, 3> kSizes = {"small", "medium", "large"};
inline constexpr std::array<std::string_view, 4> kHalves = {"left", "right", "top",
                                                           "bottom"};
inline constexpr std::array<std::string_view, 4> kQuadrants = {
    "top-left", "top-right", "bottom-left", "bottom-right"};
inline constexpr std::array<std::string_view, 2> kAxes = {"from-left", "from-top"};
inline constexpr std::size_t kMaxOrdinal = 12;
inline constexpr std::size_t kSpatialDim = 8;
inline constexpr std::size_t kAttributeDim =
    kCategories.size() + kColors.size() + kSizes.size() + kSpatialDim;

enum class PredicateKind : std::uint8_t { kCategory, kColor, kSize, kHalf, kQuadrant, kRank };

namespace vocab {
inline constexpr Token kStart = 0;
inline constexpr Token kStop = 1;
inline constexpr Token kHeadBase = 2;  // one head token per PredicateKind
inline constexpr Token kCategoryBase = kHeadBase + 6;
inline constexpr Token kColorBase = kCategoryBase + kCategories.size();
inline constexpr Token kSizeBase = kColorBase + kColors.size();
inline constexpr Token kHalfBase = kSizeBase + kSizes.size();
inline constexpr Token kQuadrantBase = kHalfBase + kHalves.size();
inline constexpr Token kAxisBase = kQuadrantBase + kQuadrants.size();
inline constexpr Token kOrdinalBase = kAxisBase + kAxes.size();
inline constexpr std::size_t kSize = kOrdinalBase + kMaxOrdinal;

std::string_view to_string(Token t);
std::optional<Token> from_string(std::string_view s);
}  // namespace vocab

enum class Answer : std::uint8_t { kYes = 0, kNo = 1, kNa = 2 };

std::string_view to_string(Answer a);
Answer parse_answer(std::string_view s);

struct Question {
  std::vector<Token> tokens;

  bool is_stop() const;
  // Tokens without a trailing <stop>.
  std::span<const Token> content() const;
  std::string text() const;
  bool operator==(const Question&) const = default;
};

Question question_from_strings(const std::vector<std::string>& words);

struct BBox {
  double x_min = 0, y_min = 0, x_max = 0, y_max = 0;
  double x_center() const { return 0.5 * (x_min + x_max); }
  double y_center() const { return 0.5 * (y_min + y_max); }
};

enum class Size : std::uint8_t { kSmall, kMedium, kLarge };

struct SceneObject {
  int category = 0;
  int color = 0;
  int size = 0;
  BBox bbox;

  int quadrant() const;
  // (x_min, y_min, x_max, y_max, x_center, y_center, width, height)
  std::array<double, kSpatialDim> spatial() const;
};

struct WorldConfig {
  std::size_t num_objects = 8;
  std::size_t feature_dim = 32;
  double feature_noise = 0.05;
  std::uint64_t projection_seed = 7;
};

struct Scene {
  std::uint64_t seed = 0;
  std::vector<SceneObject> objects;
  std::vector<double> features;  // row-major, size() x feature_dim
  std::size_t feature_dim = 0;

  std::size_t size() const { return objects.size(); }
  std::span<const double> feature_row(std::size_t k) const;
};

// Random scene with no two objects sharing category, color, size and
// quadrant. Throws ConfigError when K exceeds the attribute combinations.
Scene generate_scene(std::uint64_t seed, const WorldConfig& config);

// Featurizes explicit objects; features depend only on (objects, seed).
Scene make_scene(std::vector<SceneObject> objects, std::uint64_t seed,
                 const WorldConfig& config);

struct Predicate {
  PredicateKind kind = PredicateKind::kCategory;
  int value = 0;    // attribute id, half id or quadrant id; axis for kRank
  int ordinal = 0;  // 1-based, kRank only

  bool operator==(const Predicate&) const = default;
};

std::vector<Token> to_tokens(const Predicate& p, bool with_stop = true);
Question to_question(const Predicate& p);
std::optional<Predicate> parse_question(const Question& q);
bool holds(const Predicate& p, const Scene& scene, std::size_t target);
// 1-based position of `target` when objects are ordered along the axis by
// center coordinate, lower index first on ties.
std::size_t rank_along(const Scene& scene, std::size_t target, int axis);
// Every well-formed predicate, in grammar order.
const std::vector<Predicate>& all_predicates();

Answer oracle_answer(const Scene& scene, std::size_t target, const Question& q);

struct Turn {
  Question question;
  Answer answer = Answer::kNa;
  bool operator==(const Turn&) const = default;
};
using Dialogue = std::vector<Turn>;

struct ScriptConfig {
  std::size_t max_turns = 8;
  // Probability of asking a uniformly drawn splitting question instead of
  // the best-balanced one.
  double variety = 0.1;
};

// Binary search over the candidate set: each question is the predicate that
// splits the candidates consistent with the answers so far most evenly
// (ties: category, color, size, half, quadrant, rank, then value order).
// Stops once the target is the only candidate.
Dialogue sample_human_dialogue(const Scene& scene, std::size_t target,
                               std::uint64_t seed, const ScriptConfig& config);

struct Game {
  Scene scene;
  std::size_t target = 0;
  Dialogue dialogue;
};

enum class Split { kTrain, kVal, kNewGame, kNewObject };

std::string_view to_string(Split s);
Split parse_split(std::string_view s);

std::uint64_t scene_seed(Split split, std::size_t index, std::uint64_t base_seed);
bool is_training_scene(std::uint64_t seed, std::uint64_t base_seed, std::size_t n_train);

std::vector<Game> make_split(Split split, std::size_t n, const WorldConfig& world,
                             const ScriptConfig& script, std::uint64_t base_seed);

nlohmann::json scene_to_json(const Scene& scene);
nlohmann::json game_to_json(const Game& game);
Game game_from_json(const nlohmann::json& j, const WorldConfig& config);

void write_games(const std::filesystem::path& path, std::span<const Game> games);
std::vector<Game> read_games(const std::filesystem::path& path, const WorldConfig& config);

}  // namespace advse::world

#endif  // ADVSE_WORLD_HPP_
