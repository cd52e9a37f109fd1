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

#include "advse/world.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <tuple>

#include "advse/error.hpp"
#include "advse/nn.hpp"

namespace advse::world {

namespace {

constexpr std::uint64_t kTrainTargetStream = 11;
constexpr std::uint64_t kNewObjectTargetStream = 12;
constexpr std::uint64_t kTrainDialogueStream = 13;
constexpr std::uint64_t kNewObjectDialogueStream = 14;
constexpr std::uint64_t kSplitStride = 10'000'000;

constexpr std::array<std::pair<double, double>, 3> kSideRange = {
    std::pair{0.08, 0.15}, std::pair{0.15, 0.25}, std::pair{0.25, 0.40}};

template <std::size_t N>
std::optional<int> index_in(const std::array<std::string_view, N>& names,
                            std::string_view s) {
  for (std::size_t i = 0; i < N; ++i)
    if (names[i] == s) return static_cast<int>(i);
  return std::nullopt;
}

template <std::size_t N>
int require_index(const std::array<std::string_view, N>& names, std::string_view s,
                  const char* what) {
  if (auto i = index_in(names, s)) return *i;
  throw ConfigError(std::string("unknown ") + what + " '" + std::string(s) + "'");
}

std::vector<std::string> build_vocab() {
  std::vector<std::string> v = {"<start>", "<stop>", "category", "color",
                                "size",    "half",   "quadrant", "rank"};
  for (auto s : kCategories) v.emplace_back(s);
  for (auto s : kColors) v.emplace_back(s);
  for (auto s : kSizes) v.emplace_back(s);
  for (auto s : kHalves) v.emplace_back(s);
  for (auto s : kQuadrants) v.emplace_back(s);
  for (auto s : kAxes) v.emplace_back(s);
  for (std::size_t i = 1; i <= kMaxOrdinal; ++i) v.push_back(std::to_string(i));
  return v;
}

const std::vector<std::string>& vocab_strings() {
  static const std::vector<std::string> v = build_vocab();
  return v;
}

const std::vector<double>& projection(const WorldConfig& config) {
  // Cached per (seed, dim); configs rarely change within a process.
  static thread_local std::uint64_t cached_seed = ~0ULL;
  static thread_local std::size_t cached_dim = 0;
  static thread_local std::vector<double> matrix;
  if (cached_seed != config.projection_seed || cached_dim != config.feature_dim) {
    std::mt19937_64 rng(config.projection_seed);
    std::normal_distribution<double> normal(0.0, 0.5);
    matrix.resize(config.feature_dim * kAttributeDim);
    for (double& v : matrix) v = normal(rng);
    cached_seed = config.projection_seed;
    cached_dim = config.feature_dim;
  }
  return matrix;
}

}  // namespace

namespace vocab {
std::string_view to_string(Token t) {
  const auto& v = vocab_strings();
  if (t >= v.size()) throw ConfigError("token id " + std::to_string(t) + " out of range");
  return v[t];
}

std::optional<Token> from_string(std::string_view s) {
  const auto& v = vocab_strings();
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] == s) return static_cast<Token>(i);
  return std::nullopt;
}
}  // namespace vocab

std::string_view to_string(Answer a) {
  switch (a) {
    case Answer::kYes: return "yes";
    case Answer::kNo: return "no";
    case Answer::kNa: return "na";
  }
  return "na";
}

Answer parse_answer(std::string_view s) {
  if (s == "yes" || s == "YES") return Answer::kYes;
  if (s == "no" || s == "NO") return Answer::kNo;
  if (s == "na" || s == "NA" || s == "n/a" || s == "N/A") return Answer::kNa;
  throw ConfigError("unknown answer '" + std::string(s) + "'");
}

bool Question::is_stop() const {
  return tokens.size() == 1 && tokens[0] == vocab::kStop;
}

std::span<const Token> Question::content() const {
  std::span<const Token> s(tokens);
  if (!s.empty() && s.back() == vocab::kStop) s = s.first(s.size() - 1);
  return s;
}

std::string Question::text() const {
  std::string out;
  for (Token t : tokens) {
    if (!out.empty()) out += ' ';
    out += vocab::to_string(t);
  }
  return out;
}

Question question_from_strings(const std::vector<std::string>& words) {
  Question q;
  for (const auto& w : words) {
    auto t = vocab::from_string(w);
    if (!t) throw ConfigError("unknown token '" + w + "'");
    q.tokens.push_back(*t);
  }
  return q;
}

int SceneObject::quadrant() const {
  const int right = bbox.x_center() >= 0.5 ? 1 : 0;
  const int bottom = bbox.y_center() >= 0.5 ? 1 : 0;
  return bottom * 2 + right;
}

std::array<double, kSpatialDim> SceneObject::spatial() const {
  return {bbox.x_min,      bbox.y_min,      bbox.x_max,
          bbox.y_max,      bbox.x_center(), bbox.y_center(),
          bbox.x_max - bbox.x_min, bbox.y_max - bbox.y_min};
}

std::span<const double> Scene::feature_row(std::size_t k) const {
  return std::span<const double>(features).subspan(k * feature_dim, feature_dim);
}

Scene make_scene(std::vector<SceneObject> objects, std::uint64_t seed,
                 const WorldConfig& config) {
  if (config.feature_dim == 0) throw ConfigError("feature_dim must be positive");
  for (const auto& o : objects) {
    if (o.category < 0 || o.category >= static_cast<int>(kCategories.size()) ||
        o.color < 0 || o.color >= static_cast<int>(kColors.size()) || o.size < 0 ||
        o.size >= static_cast<int>(kSizes.size())) {
      throw ConfigError("scene object attribute out of range");
    }
    if (!(o.bbox.x_min < o.bbox.x_max) || !(o.bbox.y_min < o.bbox.y_max)) {
      throw ConfigError("scene object has an empty bounding box");
    }
  }
  Scene scene;
  scene.seed = seed;
  scene.objects = std::move(objects);
  scene.feature_dim = config.feature_dim;
  const auto& proj = projection(config);
  std::mt19937_64 rng(mix_seed(seed, 1));
  std::normal_distribution<double> noise(0.0, config.feature_noise);
  scene.features.assign(scene.objects.size() * config.feature_dim, 0.0);
  std::array<double, kAttributeDim> attrs{};
  for (std::size_t k = 0; k < scene.objects.size(); ++k) {
    const SceneObject& o = scene.objects[k];
    attrs.fill(0.0);
    attrs[o.category] = 1.0;
    attrs[kCategories.size() + o.color] = 1.0;
    attrs[kCategories.size() + kColors.size() + o.size] = 1.0;
    const auto sp = o.spatial();
    std::copy(sp.begin(), sp.end(),
              attrs.begin() + kCategories.size() + kColors.size() + kSizes.size());
    double* row = scene.features.data() + k * config.feature_dim;
    for (std::size_t d = 0; d < config.feature_dim; ++d) {
      double acc = 0.0;
      for (std::size_t a = 0; a < kAttributeDim; ++a)
        acc += proj[d * kAttributeDim + a] * attrs[a];
      row[d] = acc + (config.feature_noise > 0.0 ? noise(rng) : 0.0);
    }
  }
  return scene;
}

Scene generate_scene(std::uint64_t seed, const WorldConfig& config) {
  const std::size_t k = config.num_objects;
  const std::size_t combos = kCategories.size() * kColors.size() * kSizes.size() * 4;
  if (k < 1) throw ConfigError("scene needs at least one object");
  if (k > combos) {
    throw ConfigError("num_objects " + std::to_string(k) + " exceeds the " +
                      std::to_string(combos) + " distinct attribute combinations");
  }
  std::mt19937_64 rng(mix_seed(seed, 0));
  std::uniform_int_distribution<int> cat(0, kCategories.size() - 1);
  std::uniform_int_distribution<int> col(0, kColors.size() - 1);
  std::uniform_int_distribution<int> sz(0, kSizes.size() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::set<std::tuple<int, int, int, int>> used;
  std::vector<SceneObject> objects;
  objects.reserve(k);
  for (int attempt = 0; objects.size() < k; ++attempt) {
    if (attempt > 100'000) throw Error("generate_scene: could not place objects");
    SceneObject o;
    o.category = cat(rng);
    o.color = col(rng);
    o.size = sz(rng);
    const auto [lo, hi] = kSideRange[o.size];
    const double w = lo + (hi - lo) * unit(rng);
    const double h = lo + (hi - lo) * unit(rng);
    o.bbox.x_min = (1.0 - w) * unit(rng);
    o.bbox.y_min = (1.0 - h) * unit(rng);
    o.bbox.x_max = o.bbox.x_min + w;
    o.bbox.y_max = o.bbox.y_min + h;
    if (used.emplace(o.category, o.color, o.size, o.quadrant()).second) {
      objects.push_back(o);
    }
  }
  return make_scene(std::move(objects), seed, config);
}

std::vector<Token> to_tokens(const Predicate& p, bool with_stop) {
  std::vector<Token> t;
  t.push_back(vocab::kHeadBase + static_cast<Token>(p.kind));
  switch (p.kind) {
    case PredicateKind::kCategory: t.push_back(vocab::kCategoryBase + p.value); break;
    case PredicateKind::kColor: t.push_back(vocab::kColorBase + p.value); break;
    case PredicateKind::kSize: t.push_back(vocab::kSizeBase + p.value); break;
    case PredicateKind::kHalf: t.push_back(vocab::kHalfBase + p.value); break;
    case PredicateKind::kQuadrant: t.push_back(vocab::kQuadrantBase + p.value); break;
    case PredicateKind::kRank:
      t.push_back(vocab::kAxisBase + p.value);
      t.push_back(vocab::kOrdinalBase + p.ordinal - 1);
      break;
  }
  if (with_stop) t.push_back(vocab::kStop);
  return t;
}

Question to_question(const Predicate& p) { return Question{to_tokens(p, true)}; }

std::optional<Predicate> parse_question(const Question& q) {
  const auto c = q.content();
  if (c.size() < 2) return std::nullopt;
  const Token head = c[0];
  if (head < vocab::kHeadBase || head >= vocab::kCategoryBase) return std::nullopt;
  Predicate p;
  p.kind = static_cast<PredicateKind>(head - vocab::kHeadBase);
  auto in_range = [](Token t, Token base, std::size_t n) {
    return t >= base && t < base + n;
  };
  const Token v = c[1];
  switch (p.kind) {
    case PredicateKind::kCategory:
      if (c.size() != 2 || !in_range(v, vocab::kCategoryBase, kCategories.size())) return std::nullopt;
      p.value = static_cast<int>(v - vocab::kCategoryBase);
      return p;
    case PredicateKind::kColor:
      if (c.size() != 2 || !in_range(v, vocab::kColorBase, kColors.size())) return std::nullopt;
      p.value = static_cast<int>(v - vocab::kColorBase);
      return p;
    case PredicateKind::kSize:
      if (c.size() != 2 || !in_range(v, vocab::kSizeBase, kSizes.size())) return std::nullopt;
      p.value = static_cast<int>(v - vocab::kSizeBase);
      return p;
    case PredicateKind::kHalf:
      if (c.size() != 2 || !in_range(v, vocab::kHalfBase, kHalves.size())) return std::nullopt;
      p.value = static_cast<int>(v - vocab::kHalfBase);
      return p;
    case PredicateKind::kQuadrant:
      if (c.size() != 2 || !in_range(v, vocab::kQuadrantBase, kQuadrants.size())) return std::nullopt;
      p.value = static_cast<int>(v - vocab::kQuadrantBase);
      return p;
    case PredicateKind::kRank:
      if (c.size() != 3 || !in_range(v, vocab::kAxisBase, kAxes.size()) ||
          !in_range(c[2], vocab::kOrdinalBase, kMaxOrdinal)) {
        return std::nullopt;
      }
      p.value = static_cast<int>(v - vocab::kAxisBase);
      p.ordinal = static_cast<int>(c[2] - vocab::kOrdinalBase) + 1;
      return p;
  }
  return std::nullopt;
}

std::size_t rank_along(const Scene& scene, std::size_t target, int axis) {
  auto coord = [&](std::size_t k) {
    const BBox& b = scene.objects[k].bbox;
    return axis == 0 ? b.x_center() : b.y_center();
  };
  const double t = coord(target);
  std::size_t rank = 1;
  for (std::size_t k = 0; k < scene.size(); ++k) {
    if (k == target) continue;
    const double c = coord(k);
    if (c < t || (c == t && k < target)) ++rank;
  }
  return rank;
}

bool holds(const Predicate& p, const Scene& scene, std::size_t target) {
  const SceneObject& o = scene.objects.at(target);
  switch (p.kind) {
    case PredicateKind::kCategory: return o.category == p.value;
    case PredicateKind::kColor: return o.color == p.value;
    case PredicateKind::kSize: return o.size == p.value;
    case PredicateKind::kHalf:
      switch (p.value) {
        case 0: return o.bbox.x_center() < 0.5;
        case 1: return o.bbox.x_center() >= 0.5;
        case 2: return o.bbox.y_center() < 0.5;
        default: return o.bbox.y_center() >= 0.5;
      }
    case PredicateKind::kQuadrant: return o.quadrant() == p.value;
    case PredicateKind::kRank:
      return rank_along(scene, target, p.value) == static_cast<std::size_t>(p.ordinal);
  }
  return false;
}

const std::vector<Predicate>& all_predicates() {
  static const std::vector<Predicate> preds = [] {
    std::vector<Predicate> out;
    for (int i = 0; i < static_cast<int>(kCategories.size()); ++i)
      out.push_back({PredicateKind::kCategory, i, 0});
    for (int i = 0; i < static_cast<int>(kColors.size()); ++i)
      out.push_back({PredicateKind::kColor, i, 0});
    for (int i = 0; i < static_cast<int>(kSizes.size()); ++i)
      out.push_back({PredicateKind::kSize, i, 0});
    for (int i = 0; i < static_cast<int>(kHalves.size()); ++i)
      out.push_back({PredicateKind::kHalf, i, 0});
    for (int i = 0; i < static_cast<int>(kQuadrants.size()); ++i)
      out.push_back({PredicateKind::kQuadrant, i, 0});
    for (int axis = 0; axis < 2; ++axis)
      for (int r = 1; r <= static_cast<int>(kMaxOrdinal); ++r)
        out.push_back({PredicateKind::kRank, axis, r});
    return out;
  }();
  return preds;
}

Answer oracle_answer(const Scene& scene, std::size_t target, const Question& q) {
  if (target >= scene.size()) throw ConfigError("oracle: target index out of range");
  const auto p = parse_question(q);
  if (!p) return Answer::kNa;
  return holds(*p, scene, target) ? Answer::kYes : Answer::kNo;
}

Dialogue sample_human_dialogue(const Scene& scene, std::size_t target,
                               std::uint64_t seed, const ScriptConfig& config) {
  if (target >= scene.size()) throw ConfigError("dialogue: target index out of range");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::size_t> candidates(scene.size());
  for (std::size_t k = 0; k < scene.size(); ++k) candidates[k] = k;

  Dialogue dialogue;
  const auto& preds = all_predicates();
  while (candidates.size() > 1 && dialogue.size() < config.max_turns) {
    std::vector<std::size_t> splitting;
    std::size_t best = 0, best_score = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      std::size_t yes = 0;
      for (std::size_t k : candidates) yes += holds(preds[i], scene, k) ? 1 : 0;
      if (yes == 0 || yes == candidates.size()) continue;
      splitting.push_back(i);
      const std::size_t score = std::min(yes, candidates.size() - yes);
      if (score > best_score) {
        best_score = score;
        best = i;
      }
    }
    // Every pair of objects differs in rank, so `splitting` is never empty.
    std::size_t chosen = best;
    if (config.variety > 0.0 && unit(rng) < config.variety) {
      std::uniform_int_distribution<std::size_t> pick(0, splitting.size() - 1);
      chosen = splitting[pick(rng)];
    }
    const Predicate& p = preds[chosen];
    const bool yes = holds(p, scene, target);
    dialogue.push_back({to_question(p), yes ? Answer::kYes : Answer::kNo});
    std::erase_if(candidates,
                  [&](std::size_t k) { return holds(p, scene, k) != yes; });
  }
  if (dialogue.size() == 1 && config.max_turns >= 2) {
    const Predicate confirm{PredicateKind::kCategory, scene.objects[target].category, 0};
    dialogue.push_back({to_question(confirm), Answer::kYes});
  }
  return dialogue;
}

std::string_view to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kNewGame: return "new_game";
    case Split::kNewObject: return "new_object";
  }
  return "train";
}

Split parse_split(std::string_view s) {
  if (s == "train") return Split::kTrain;
  if (s == "val") return Split::kVal;
  if (s == "new_game" || s == "new_image") return Split::kNewGame;
  if (s == "new_object") return Split::kNewObject;
  throw ConfigError("unknown split '" + std::string(s) +
                    "' (expected train, val, new_game or new_object)");
}

std::uint64_t scene_seed(Split split, std::size_t index, std::uint64_t base_seed) {
  if (index >= kSplitStride) throw ConfigError("split index too large");
  switch (split) {
    case Split::kTrain:
    case Split::kNewObject: return base_seed + index;
    case Split::kVal: return base_seed + kSplitStride + index;
    case Split::kNewGame: return base_seed + 2 * kSplitStride + index;
  }
  return base_seed + index;
}

bool is_training_scene(std::uint64_t seed, std::uint64_t base_seed, std::size_t n_train) {
  return seed >= base_seed && seed < base_seed + n_train;
}

std::vector<Game> make_split(Split split, std::size_t n, const WorldConfig& world,
                             const ScriptConfig& script, std::uint64_t base_seed) {
  std::vector<Game> games;
  games.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t seed = scene_seed(split, i, base_seed);
    Game g;
    g.scene = generate_scene(seed, world);
    const std::size_t k = g.scene.size();
    std::mt19937_64 train_rng(mix_seed(seed, kTrainTargetStream));
    const std::size_t train_target =
        std::uniform_int_distribution<std::size_t>(0, k - 1)(train_rng);
    std::uint64_t dialogue_stream = kTrainDialogueStream;
    g.target = train_target;
    if (split == Split::kNewObject && k > 1) {
      std::mt19937_64 rng(mix_seed(seed, kNewObjectTargetStream));
      const std::size_t draw = std::uniform_int_distribution<std::size_t>(0, k - 2)(rng);
      g.target = draw >= train_target ? draw + 1 : draw;
      dialogue_stream = kNewObjectDialogueStream;
    }
    g.dialogue = sample_human_dialogue(g.scene, g.target, mix_seed(seed, dialogue_stream),
                                       script);
    games.push_back(std::move(g));
  }
  return games;
}

nlohmann::json scene_to_json(const Scene& scene) {
  nlohmann::json objects = nlohmann::json::array();
  for (const auto& o : scene.objects) {
    objects.push_back({{"category", kCategories[o.category]},
                       {"color", kColors[o.color]},
                       {"size", kSizes[o.size]},
                       {"bbox", {o.bbox.x_min, o.bbox.y_min, o.bbox.x_max, o.bbox.y_max}}});
  }
  return {{"seed", scene.seed}, {"objects", objects}};
}

nlohmann::json game_to_json(const Game& game) {
  nlohmann::json j = scene_to_json(game.scene);
  j["target"] = game.target;
  nlohmann::json dialogue = nlohmann::json::array();
  for (const auto& turn : game.dialogue) {
    std::vector<std::string> words;
    for (Token t : turn.question.tokens) words.emplace_back(vocab::to_string(t));
    dialogue.push_back({{"tokens", words}, {"answer", to_string(turn.answer)}});
  }
  j["dialogue"] = dialogue;
  return j;
}

Game game_from_json(const nlohmann::json& j, const WorldConfig& config) {
  try {
    std::vector<SceneObject> objects;
    for (const auto& o : j.at("objects")) {
      SceneObject so;
      so.category = require_index(kCategories, o.at("category").get<std::string>(), "category");
      so.color = require_index(kColors, o.at("color").get<std::string>(), "color");
      so.size = require_index(kSizes, o.at("size").get<std::string>(), "size");
      const auto bb = o.at("bbox").get<std::vector<double>>();
      if (bb.size() != 4) throw ConfigError("bbox must have 4 entries");
      so.bbox = {bb[0], bb[1], bb[2], bb[3]};
      objects.push_back(so);
    }
    Game g;
    g.scene = make_scene(std::move(objects), j.at("seed").get<std::uint64_t>(), config);
    g.target = j.at("target").get<std::size_t>();
    if (g.target >= g.scene.size()) throw ConfigError("target index out of range");
    for (const auto& t : j.at("dialogue")) {
      Turn turn;
      turn.question = question_from_strings(t.at("tokens").get<std::vector<std::string>>());
      turn.answer = parse_answer(t.at("answer").get<std::string>());
      g.dialogue.push_back(std::move(turn));
    }
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed game record: ") + e.what());
  }
}

void write_games(const std::filesystem::path& path, std::span<const Game> games) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& g : games) out << game_to_json(g).dump() << '\n';
}

std::vector<Game> read_games(const std::filesystem::path& path, const WorldConfig& config) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::vector<Game> games;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("malformed line in " + path.string() + ": " + e.what());
    }
    games.push_back(game_from_json(j, config));
  }
  return games;
}

}  // namespace advse::world
