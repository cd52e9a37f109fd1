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


// advse: dataset generation, training, evaluation, ablation, tracing and
// serving from one JSON config plus --set overrides.
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error.

#include <chrono>
#include <csignal>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "advse/error.hpp"
#include "advse/experiment.hpp"
#include "advse/serve.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace advse::cli {
namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string run_root = "runs";
};

struct Context {
  ExperimentConfig config;
  fs::path run_dir;
};

ExperimentConfig load_config(const Common& common) {
  json j = json::object();
  if (!common.config_path.empty()) {
    std::ifstream in(common.config_path);
    if (!in) throw ConfigError("cannot open config " + common.config_path);
    j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config " + common.config_path + " is not valid JSON");
  }
  for (const auto& o : common.overrides) apply_override(j, o);
  return ExperimentConfig::from_json(j);
}

fs::path make_run_dir(const std::string& root, std::uint64_t seed) {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  localtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y%m%d-%H%M%S", &tm);
  fs::path dir = fs::path(root) / (std::string(stamp) + "-seed" + std::to_string(seed));
  for (int n = 1; fs::exists(dir); ++n) {
    dir = fs::path(root) / (std::string(stamp) + "-seed" + std::to_string(seed) + "-" +
                            std::to_string(n));
  }
  fs::create_directories(dir);
  return dir;
}

Context open_run(const Common& common) {
  Context ctx{load_config(common), {}};
  ctx.run_dir = make_run_dir(common.run_root, ctx.config.seed);
  std::ofstream(ctx.run_dir / "config.json") << ctx.config.to_json().dump(2) << '\n';
  return ctx;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void log_row(const LogRow& r) {
  std::cerr << r.split << " step " << r.step;
  if (!std::isnan(r.loss)) std::cerr << " loss " << r.loss;
  if (!std::isnan(r.success_rate)) std::cerr << " success " << r.success_rate;
  std::cerr << '\n';
}

std::vector<std::uint64_t> parse_seeds(const std::string& s) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoull(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("bad seed list '" + s + "'");
    }
  }
  if (out.empty()) throw ConfigError("empty seed list");
  return out;
}

void print_summary(const std::string& what, const EvalSummary& s) {
  std::printf("%s: success %.4f  95%% CI [%.4f, %.4f]  over %zu games\n", what.c_str(),
              s.success_rate, s.ci.lo, s.ci.hi, s.games);
}

int cmd_gen_data(const Common& common) {
  const Context ctx = open_run(common);
  const Datasets d = make_datasets(ctx.config);
  for (const auto split : {world::Split::kTrain, world::Split::kVal, world::Split::kNewGame,
                           world::Split::kNewObject}) {
    const fs::path p = ctx.run_dir / (std::string(world::to_string(split)) + ".jsonl");
    world::write_games(p, d.split(split));
    std::printf("%-10s %6zu games -> %s\n", std::string(world::to_string(split)).c_str(),
                d.split(split).size(), p.c_str());
  }
  return 0;
}

int cmd_train_qgen(const Common& common, const std::vector<std::string>& ablate) {
  const Context ctx = open_run(common);
  const Datasets d = make_datasets(ctx.config);
  TrainLog log;
  const QuestionGenerator q =
      train_qgen(ctx.config, d, Ablation::from_names(ablate), ctx.config.seed, &log, log_row);
  q.save(ctx.run_dir / "qgen.json");
  log.write_csv(ctx.run_dir / "qgen_sl.csv");
  std::printf("validation NLL %.4f\nwrote %s\n", log.rows.back().loss,
              (ctx.run_dir / "qgen.json").c_str());
  return 0;
}

int cmd_train_guesser(const Common& common) {
  const Context ctx = open_run(common);
  const Datasets d = make_datasets(ctx.config);
  TrainLog log;
  const Guesser g = train_guesser(ctx.config, d, ctx.config.seed, &log, log_row);
  g.save(ctx.run_dir / "guesser.json");
  log.write_csv(ctx.run_dir / "guesser_sl.csv");
  const auto& held_out = d.split(world::parse_split(ctx.config.eval.split));
  const json report = {{"error", guesser_error(g, held_out)},
                       {"fake_history_error", guesser_error_fake_history(g, held_out)},
                       {"split", ctx.config.eval.split}};
  write_json(ctx.run_dir / "guesser_eval.json", report);
  std::printf("held-out error %.4f  fake-history error %.4f\nwrote %s\n",
              report["error"].get<double>(), report["fake_history_error"].get<double>(),
              (ctx.run_dir / "guesser.json").c_str());
  return 0;
}

int cmd_rl(const Common& common, const std::string& qgen_path, const std::string& guesser_path) {
  const Context ctx = open_run(common);
  const Datasets d = make_datasets(ctx.config);
  QuestionGenerator q = QuestionGenerator::load(qgen_path);
  const Guesser g = Guesser::load(guesser_path);
  RlConfig rc = ctx.config.rl;
  rc.seed = ctx.config.seed;
  const auto& eval = d.split(world::parse_split(ctx.config.eval.split));
  const TrainLog log = rl_train_qgen(q, g, d.train, eval, rc, log_row);
  q.save(ctx.run_dir / "qgen_rl.json");
  log.write_csv(ctx.run_dir / "rl.csv");
  std::printf("greedy success before %.4f after %.4f\nwrote %s\n", log.rows.front().success_rate,
              log.rows.back().success_rate, (ctx.run_dir / "qgen_rl.json").c_str());
  return 0;
}

int cmd_eval(const Common& common, const std::string& qgen_path, const std::string& guesser_path,
             bool random_baseline) {
  const Context ctx = open_run(common);
  const Datasets d = make_datasets(ctx.config);
  const Guesser g = Guesser::load(guesser_path);
  const auto& games = d.split(world::parse_split(ctx.config.eval.split));
  json report = {{"split", ctx.config.eval.split}};
  if (!qgen_path.empty()) {
    const QuestionGenerator q = QuestionGenerator::load(qgen_path);
    const EvalSummary s = evaluate(q, g, games, ctx.config.eval.decode(), ctx.config.eval.max_turns);
    print_summary(ctx.config.eval.split + " " + to_string(ctx.config.eval.decode()), s);
    report["qgen"] = s.to_json();
    report["strategy"] = to_string(ctx.config.eval.decode());
  }
  if (random_baseline) {
    const EvalSummary s =
        evaluate_random_questioner(g, games, ctx.config.eval.max_turns, ctx.config.seed);
    print_summary(ctx.config.eval.split + " random questioner", s);
    report["random_questioner"] = s.to_json();
  }
  write_json(ctx.run_dir / "eval.json", report);
  return 0;
}

int cmd_ablate(const Common& common, const std::string& seeds) {
  const Context ctx = open_run(common);
  const Datasets d = make_datasets(ctx.config);
  const auto seed_list = parse_seeds(seeds);
  const auto rows =
      run_ablation(ctx.config, d, seed_list, [](const std::string& s) { std::cerr << s << '\n'; });
  std::cout << format_ablation_table(rows);
  json j = json::array();
  for (const auto& r : rows) j.push_back(r.to_json());
  write_json(ctx.run_dir / "ablation.json", {{"split", ctx.config.eval.split}, {"rows", j}});
  return 0;
}

int cmd_trace(const Common& common, const std::string& qgen_path, const std::string& guesser_path,
              std::size_t episode) {
  const Context ctx = open_run(common);
  const Datasets d = make_datasets(ctx.config);
  const auto& games = d.split(world::parse_split(ctx.config.eval.split));
  if (episode >= games.size()) {
    throw ConfigError("episode " + std::to_string(episode) + " out of range for split " +
                      ctx.config.eval.split + " (" + std::to_string(games.size()) + " games)");
  }
  const QuestionGenerator q = QuestionGenerator::load(qgen_path);
  const Guesser g = Guesser::load(guesser_path);
  const world::Game& game = games[episode];
  const EpisodeResult r = play_episode(game.scene, game.target, q, g, ctx.config.eval.decode(),
                                       ctx.config.eval.max_turns);
  json doc = r.to_json();
  doc["split"] = ctx.config.eval.split;
  doc["episode"] = episode;
  doc["scene"] = world::scene_to_json(game.scene);
  const fs::path out =
      ctx.run_dir / ("trace_" + ctx.config.eval.split + "_" + std::to_string(episode) + ".json");
  write_json(out, doc);
  std::printf("%s\n", out.c_str());
  return 0;
}

extern "C" void handle_signal(int) { stop_server(); }

int cmd_serve(const Common& common, const std::string& qgen_path, const std::string& guesser_path,
              const std::string& host, int port, const std::string& static_dir, long ttl) {
  const ExperimentConfig config = load_config(common);
  ServeOptions opts;
  opts.host = host;
  opts.port = port;
  opts.static_dir = static_dir;
  opts.session_ttl = std::chrono::seconds(ttl);
  opts.max_turns = config.eval.max_turns;
  opts.strategy = config.eval.decode();
  opts.world = config.world;
  auto q = std::make_shared<const QuestionGenerator>(QuestionGenerator::load(qgen_path));
  auto g = std::make_shared<const Guesser>(Guesser::load(guesser_path));
  SessionManager manager(q, g, opts);
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  std::fprintf(stderr, "listening on http://%s:%d\n", host.c_str(), port);
  run_server(manager);
  return 0;
}

int run(int argc, char** argv) {
  CLI::App app{"Answer-driven visual state estimation: train, evaluate and play"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", common.config_path, "JSON config file");
    sub->add_option("--set", common.overrides, "Override a config key, e.g. model.hidden_dim=64");
    sub->add_option("--run-root", common.run_root, "Directory that receives run directories");
  };
  std::string qgen_path, guesser_path, seeds = "0,1,2", host = "127.0.0.1", static_dir;
  std::vector<std::string> ablate;
  std::size_t episode = 0;
  int port = 8080;
  long ttl = 1800;
  bool random_baseline = false;

  auto* gen = app.add_subcommand("gen-data", "Write the four dataset splits as JSONL");
  auto* tq = app.add_subcommand("train-qgen", "Supervised training of the question generator");
  tq->add_option("--ablate", ablate, "Components to remove: SO, ADFA, CVIF")->delimiter(',');
  auto* tg = app.add_subcommand("train-guesser", "Supervised training of the guesser");
  auto* rl = app.add_subcommand("rl-finetune", "REINFORCE fine-tuning of a question generator");
  auto* ev = app.add_subcommand("eval", "Self-play success rate with a Wilson interval");
  ev->add_flag("--random-baseline", random_baseline, "Also score a uniformly random questioner");
  auto* ab = app.add_subcommand("ablate", "Full model against w/o SO, w/o ADFA, w/o CVIF");
  ab->add_option("--seeds", seeds, "Comma-separated run seeds")->capture_default_str();
  auto* tr = app.add_subcommand("trace", "Per-turn attention trace of one episode");
  tr->add_option("--episode", episode, "Game index within the evaluation split")->required();
  auto* sv = app.add_subcommand("serve", "JSON-over-HTTP API for human-answered games");
  sv->add_option("--host", host)->capture_default_str();
  sv->add_option("--port", port)->capture_default_str();
  sv->add_option("--static-dir", static_dir, "Directory served at /");
  sv->add_option("--ttl", ttl, "Idle session lifetime in seconds")->capture_default_str();

  for (auto* s : {gen, tq, tg, rl, ev, ab, tr, sv}) add_common(s);
  for (auto* s : {rl, tr, sv}) {
    s->add_option("--qgen", qgen_path, "Question generator checkpoint")->required()->check(CLI::ExistingFile);
  }
  ev->add_option("--qgen", qgen_path, "Question generator checkpoint")->check(CLI::ExistingFile);
  for (auto* s : {rl, ev, tr, sv}) {
    s->add_option("--guesser", guesser_path, "Guesser checkpoint")->required()->check(CLI::ExistingFile);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (*gen) return cmd_gen_data(common);
  if (*tq) return cmd_train_qgen(common, ablate);
  if (*tg) return cmd_train_guesser(common);
  if (*rl) return cmd_rl(common, qgen_path, guesser_path);
  if (*ev) {
    if (qgen_path.empty() && !random_baseline) {
      throw ConfigError("eval needs --qgen, --random-baseline, or both");
    }
    return cmd_eval(common, qgen_path, guesser_path, random_baseline);
  }
  if (*ab) return cmd_ablate(common, seeds);
  if (*tr) return cmd_trace(common, qgen_path, guesser_path, episode);
  return cmd_serve(common, qgen_path, guesser_path, host, port, static_dir, ttl);
}

}  // namespace
}  // namespace advse::cli

int main(int argc, char** argv) {
  try {
    return advse::cli::run(argc, argv);
  } catch (const advse::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return advse::cli::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return advse::cli::kExitRuntime;
  }
}
