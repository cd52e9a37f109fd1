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


#include "advse/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <type_traits>

#include "advse/error.hpp"
#include "advse/stats.hpp"

namespace advse {

namespace {

using nlohmann::json;

// Strict reader over one JSON object: unknown keys and ill-typed values
// raise ConfigError naming the offending path.
class Reader {
 public:
  Reader(const json& j, std::string where, const std::set<std::string>& known)
      : j_(j), where_(std::move(where)) {
    if (!j.is_object()) throw ConfigError(where_ + " must be a JSON object");
    for (const auto& [key, _] : j.items()) {
      if (!known.contains(key)) throw ConfigError("unknown key '" + where_ + "." + key + "'");
    }
  }

  template <typename T>
  void get(const char* key, T& out) const {
    if (!j_.contains(key)) return;
    const json& v = j_.at(key);
    if constexpr (std::is_integral_v<T> && std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
      if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
        throw ConfigError(path(key) + " must be a non-negative integer");
      }
    }
    try {
      out = v.get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(path(key) + ": " + e.what());
    }
  }

  bool has(const char* key) const { return j_.contains(key); }
  const json& at(const char* key) const { return j_.at(key); }
  std::string path(const char* key) const { return where_ + "." + key; }

 private:
  const json& j_;
  std::string where_;
};

const char* optimizer_name(OptimizerKind k) { return k == OptimizerKind::kAdam ? "adam" : "sgd"; }

json optimizer_to_json(const OptimizerConfig& c) {
  return {{"kind", optimizer_name(c.kind)},
          {"lr", c.lr},
          {"beta1", c.beta1},
          {"beta2", c.beta2},
          {"eps", c.eps}};
}

OptimizerConfig optimizer_from_json(const json& j, const std::string& where,
                                    OptimizerConfig c) {
  const Reader r(j, where, {"kind", "lr", "beta1", "beta2", "eps"});
  std::string kind = optimizer_name(c.kind);
  r.get("kind", kind);
  c.kind = parse_optimizer(kind);
  r.get("lr", c.lr);
  r.get("beta1", c.beta1);
  r.get("beta2", c.beta2);
  r.get("eps", c.eps);
  return c;
}

json train_to_json(const TrainConfig& c) {
  return {{"optimizer", optimizer_to_json(c.optimizer)},
          {"batch_size", c.batch_size},
          {"epochs", c.epochs},
          {"lr_decay", c.lr_decay},
          {"clip_norm", c.clip_norm},
          {"max_turns", c.max_turns}};
}

TrainConfig train_from_json(const json& j, const std::string& where, TrainConfig c) {
  const Reader r(j, where,
                 {"optimizer", "batch_size", "epochs", "lr_decay", "clip_norm", "max_turns"});
  if (r.has("optimizer")) c.optimizer = optimizer_from_json(r.at("optimizer"), r.path("optimizer"), c.optimizer);
  r.get("batch_size", c.batch_size);
  r.get("epochs", c.epochs);
  r.get("lr_decay", c.lr_decay);
  r.get("clip_norm", c.clip_norm);
  r.get("max_turns", c.max_turns);
  return c;
}

json rl_to_json(const RlConfig& c) {
  return {{"optimizer", optimizer_to_json(c.optimizer)},
          {"iterations", c.iterations},
          {"batch_size", c.batch_size},
          {"max_turns", c.max_turns},
          {"clip_norm", c.clip_norm},
          {"baseline_momentum", c.baseline_momentum},
          {"eval_every", c.eval_every}};
}

RlConfig rl_from_json(const json& j, const std::string& where, RlConfig c) {
  const Reader r(j, where,
                 {"optimizer", "iterations", "batch_size", "max_turns", "clip_norm",
                  "baseline_momentum", "eval_every"});
  if (r.has("optimizer")) c.optimizer = optimizer_from_json(r.at("optimizer"), r.path("optimizer"), c.optimizer);
  r.get("iterations", c.iterations);
  r.get("batch_size", c.batch_size);
  r.get("max_turns", c.max_turns);
  r.get("clip_norm", c.clip_norm);
  r.get("baseline_momentum", c.baseline_momentum);
  r.get("eval_every", c.eval_every);
  return c;
}

}  // namespace

DecodeStrategy EvalConfig::decode() const {
  return parse_strategy(strategy, beam_width, sample_seed);
}

ExperimentConfig::ExperimentConfig() {
  model.visual_dim = world.feature_dim;
  model.word_dim = 32;
  model.hidden_dim = 64;
  model.attention_dim = 32;
  qgen_sl.optimizer.lr = 3e-3;
  qgen_sl.epochs = 10;
  qgen_sl.lr_decay = 1.0;
  guesser_sl.epochs = 30;
  guesser_sl.lr_decay = 1.0;
  rl.optimizer.lr = 1e-2;
  rl.iterations = 1000;
}

json ExperimentConfig::to_json() const {
  return {{"seed", seed},
          {"world",
           {{"num_objects", world.num_objects},
            {"feature_dim", world.feature_dim},
            {"feature_noise", world.feature_noise},
            {"projection_seed", world.projection_seed}}},
          {"script", {{"max_turns", script.max_turns}, {"variety", script.variety}}},
          {"data",
           {{"base_seed", data.base_seed},
            {"train", data.train},
            {"val", data.val},
            {"new_game", data.new_game},
            {"new_object", data.new_object}}},
          {"model", model.to_json()},
          {"qgen_sl", train_to_json(qgen_sl)},
          {"guesser_sl", train_to_json(guesser_sl)},
          {"rl", rl_to_json(rl)},
          {"eval",
           {{"strategy", eval.strategy},
            {"beam_width", eval.beam_width},
            {"sample_seed", eval.sample_seed},
            {"split", eval.split},
            {"max_turns", eval.max_turns}}}};
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig c;
  const Reader r(j, "config",
                 {"seed", "world", "script", "data", "model", "qgen_sl", "guesser_sl", "rl",
                  "eval"});
  r.get("seed", c.seed);
  if (r.has("world")) {
    const Reader w(r.at("world"), "world",
                   {"num_objects", "feature_dim", "feature_noise", "projection_seed"});
    w.get("num_objects", c.world.num_objects);
    w.get("feature_dim", c.world.feature_dim);
    w.get("feature_noise", c.world.feature_noise);
    w.get("projection_seed", c.world.projection_seed);
  }
  if (r.has("script")) {
    const Reader s(r.at("script"), "script", {"max_turns", "variety"});
    s.get("max_turns", c.script.max_turns);
    s.get("variety", c.script.variety);
  }
  if (r.has("data")) {
    const Reader d(r.at("data"), "data", {"base_seed", "train", "val", "new_game", "new_object"});
    d.get("base_seed", c.data.base_seed);
    d.get("train", c.data.train);
    d.get("val", c.data.val);
    d.get("new_game", c.data.new_game);
    d.get("new_object", c.data.new_object);
  }
  if (r.has("model")) {
    json m = r.at("model");
    if (m.is_object() && !m.contains("visual_dim")) m["visual_dim"] = c.world.feature_dim;
    c.model = ModelConfig::from_json(m);
  } else {
    c.model.visual_dim = c.world.feature_dim;
  }
  if (r.has("qgen_sl")) c.qgen_sl = train_from_json(r.at("qgen_sl"), "qgen_sl", c.qgen_sl);
  if (r.has("guesser_sl")) {
    c.guesser_sl = train_from_json(r.at("guesser_sl"), "guesser_sl", c.guesser_sl);
  }
  if (r.has("rl")) c.rl = rl_from_json(r.at("rl"), "rl", c.rl);
  if (r.has("eval")) {
    const Reader e(r.at("eval"), "eval",
                   {"strategy", "beam_width", "sample_seed", "split", "max_turns"});
    e.get("strategy", c.eval.strategy);
    e.get("beam_width", c.eval.beam_width);
    e.get("sample_seed", c.eval.sample_seed);
    e.get("split", c.eval.split);
    e.get("max_turns", c.eval.max_turns);
  }
  c.validate();
  return c;
}

void ExperimentConfig::validate() const {
  model.validate();
  if (model.visual_dim != world.feature_dim) {
    throw ConfigError("model.visual_dim must equal world.feature_dim");
  }
  if (world.num_objects == 0) throw ConfigError("world.num_objects must be >= 1");
  if (data.train == 0) throw ConfigError("data.train must be >= 1");
  for (const TrainConfig* t : {&qgen_sl, &guesser_sl}) {
    if (t->batch_size == 0) throw ConfigError("batch_size must be >= 1");
    if (!(t->optimizer.lr > 0.0)) throw ConfigError("learning rates must be positive");
    if (!(t->lr_decay > 0.0 && t->lr_decay <= 1.0)) throw ConfigError("lr_decay must lie in (0, 1]");
  }
  if (rl.batch_size == 0) throw ConfigError("rl.batch_size must be >= 1");
  if (!(rl.baseline_momentum >= 0.0 && rl.baseline_momentum < 1.0)) {
    throw ConfigError("rl.baseline_momentum must lie in [0, 1)");
  }
  if (eval.max_turns == 0) throw ConfigError("eval.max_turns must be >= 1");
  (void)eval.decode();
  (void)world::parse_split(eval.split);
}

void apply_override(json& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("override '" + std::string(assignment) + "' is not of the form key=value");
  }
  const std::string path(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  json* node = &config;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot - start);
    if (key.empty()) throw ConfigError("override path '" + path + "' has an empty component");
    if (!node->is_object()) throw ConfigError("override path '" + path + "' crosses a non-object");
    if (dot == std::string::npos) {
      (*node)[key] = std::move(value);
      return;
    }
    node = &(*node)[key];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

const std::vector<world::Game>& Datasets::split(world::Split s) const {
  switch (s) {
    case world::Split::kTrain: return train;
    case world::Split::kVal: return val;
    case world::Split::kNewGame: return new_game;
    case world::Split::kNewObject: return new_object;
  }
  throw ConfigError("unknown split");
}

Datasets make_datasets(const ExperimentConfig& c) {
  Datasets d;
  auto make = [&](world::Split s, std::size_t n) {
    return world::make_split(s, n, c.world, c.script, c.data.base_seed);
  };
  d.train = make(world::Split::kTrain, c.data.train);
  d.val = make(world::Split::kVal, c.data.val);
  d.new_game = make(world::Split::kNewGame, c.data.new_game);
  d.new_object = make(world::Split::kNewObject, c.data.new_object);
  return d;
}

Guesser train_guesser(const ExperimentConfig& config, const Datasets& data, std::uint64_t seed,
                      TrainLog* log, const ProgressFn& progress) {
  Guesser g(config.model, mix_seed(seed, 0x9e55));
  TrainConfig tc = config.guesser_sl;
  tc.seed = mix_seed(seed, 1);
  TrainLog l = sl_train_guesser(g, data.train, data.val, tc, progress);
  if (log) *log = std::move(l);
  return g;
}

QuestionGenerator train_qgen(const ExperimentConfig& config, const Datasets& data,
                             const Ablation& ablation, std::uint64_t seed, TrainLog* log,
                             const ProgressFn& progress) {
  ModelConfig mc = config.model;
  mc.ablation = ablation;
  QuestionGenerator q(mc, mix_seed(seed, 0x9e11));
  TrainConfig tc = config.qgen_sl;
  tc.seed = mix_seed(seed, 2);
  TrainLog l = sl_train_qgen(q, data.train, data.val, tc, progress);
  if (log) *log = std::move(l);
  return q;
}

json AblationRow::to_json() const {
  json j = {{"label", label}, {"success", success}, {"median", median}, {"mean", mean}};
  if (vs_full) {
    j["t"] = vs_full->t;
    j["df"] = vs_full->df;
    j["p_value"] = vs_full->p_value;
  }
  return j;
}

std::vector<Ablation> ablation_variants() {
  return {Ablation{}, Ablation::from_names({"SO"}), Ablation::from_names({"ADFA"}),
          Ablation::from_names({"CVIF"})};
}

std::vector<AblationRow> run_ablation(const ExperimentConfig& config, const Datasets& data,
                                      std::span<const std::uint64_t> seeds,
                                      const std::function<void(const std::string&)>& note) {
  if (seeds.empty()) throw ConfigError("ablation needs at least one seed");
  const auto variants = ablation_variants();
  const auto& games = data.split(world::parse_split(config.eval.split));
  if (games.empty()) throw ConfigError("evaluation split '" + config.eval.split + "' is empty");
  std::vector<AblationRow> rows(variants.size());
  for (std::size_t v = 0; v < variants.size(); ++v) rows[v].label = variants[v].label();
  for (const std::uint64_t seed : seeds) {
    const Guesser guesser = train_guesser(config, data, seed);
    for (std::size_t v = 0; v < variants.size(); ++v) {
      const QuestionGenerator q = train_qgen(config, data, variants[v], seed);
      const double s = evaluate(q, guesser, games, config.eval.decode(), config.eval.max_turns)
                           .success_rate;
      rows[v].success.push_back(s);
      if (note) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "seed %llu  %-10s  success %.4f",
                      static_cast<unsigned long long>(seed), rows[v].label.c_str(), s);
        note(buf);
      }
    }
  }
  for (auto& row : rows) {
    row.median = median(row.success);
    row.mean = mean(row.success);
    if (&row != &rows.front() && row.success.size() >= 2) {
      row.vs_full = welch_t_test(rows.front().success, row.success);
    }
  }
  return rows;
}

std::string format_ablation_table(std::span<const AblationRow> rows) {
  std::string out = "model        median   mean     runs  p(vs full)\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%-12s %6.2f%%  %6.2f%%  %4zu  ", r.label.c_str(),
                  100.0 * r.median, 100.0 * r.mean, r.success.size());
    out += buf;
    if (r.vs_full) {
      std::snprintf(buf, sizeof(buf), "%.4f", r.vs_full->p_value);
      out += buf;
    } else {
      out += "-";
    }
    out += '\n';
  }
  return out;
}

}  // namespace advse
