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


// Acceptance harness: one PASS/FAIL line per primary criterion. Tolerances
// and budgets are pinned below. Exit status is the number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "adfa_suite.hpp"
#include "advse/experiment.hpp"
#include "advse/serve.hpp"
#include "bandit.hpp"
#include "op_cases.hpp"
#include "oracle.hpp"
#include "sl_gradcheck.hpp"
#include "toy_lm.hpp"

namespace advse {
namespace {

using Clock = std::chrono::steady_clock;

constexpr double kGradientBudgetSeconds = 120.0;
constexpr std::size_t kAdfaCases = 1000;
constexpr std::size_t kOracleScenes = 200;
constexpr std::size_t kToyLms = 50;
constexpr double kBanditTolerance = 1e-6;
constexpr double kRandomFloor = 1.0 / 8.0;
constexpr double kSlSuccessFactor = 3.0;
constexpr double kSlBudgetSeconds = 30.0 * 60.0;
constexpr double kRlGainPoints = 0.05;
constexpr double kRlBudgetSeconds = 60.0 * 60.0;
constexpr double kGuesserMaxError = 0.30;
constexpr double kFakeHistoryGainPoints = 0.20;
constexpr std::size_t kSignificanceRuns = 10;
constexpr double kTStatTolerance = 1e-12;
constexpr double kClosedFormPTolerance = 1e-10;
constexpr std::size_t kServeGames = 50;
const std::vector<std::uint64_t> kSeeds = {0, 1, 2};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return buf;
}

void note(const std::string& line) {
  std::printf("  . %s\n", line.c_str());
  std::fflush(stdout);
}

Outcome gradient_integrity() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::vector<std::string> failed = testing::check_all_ops(2024, &worst);
  std::vector<std::pair<std::string, ModelConfig>> graphs;
  for (const auto& names : std::vector<std::vector<std::string>>{{}, {"SO"}, {"ADFA"}, {"CVIF"}}) {
    const Ablation a = Ablation::from_names(names);
    graphs.emplace_back("qgen " + a.label(), testing::tiny_config(a));
  }
  ModelConfig l2 = testing::tiny_config();
  l2.focus_norm = FocusNorm::kL2;
  l2.normalize_fusion_attention = true;
  graphs.emplace_back("qgen l2", l2);
  for (const auto& [name, config] : graphs) {
    const auto r = testing::check_qgen_loss(config);
    worst = std::max(worst, r.max_rel_error);
    if (!(r.max_rel_error < testing::kFdTolerance)) failed.push_back(name);
  }
  for (const bool projection : {true, false}) {
    ModelConfig c = testing::tiny_config();
    c.guesser_projection = projection;
    const auto r = testing::check_guesser_loss(c);
    worst = std::max(worst, r.max_rel_error);
    if (!(r.max_rel_error < testing::kFdTolerance)) failed.push_back("guesser");
  }
  const double elapsed = seconds_since(t0);
  std::string detail = format("%zu ops + %zu loss graphs, worst rel err %.2e (< %.0e), %.1fs (< %.0fs)",
                              testing::op_cases().size(), graphs.size() + 2, worst,
                              testing::kFdTolerance, elapsed, kGradientBudgetSeconds);
  for (const auto& f : failed) detail += "; failed " + f;
  return {failed.empty() && elapsed < kGradientBudgetSeconds, detail};
}

Outcome adfa_invariants() {
  const testing::SuiteReport r = testing::run_adfa_suite(kAdfaCases, 31337);
  std::string detail = format("%zu/%zu cases pass (%zu with constant alpha)",
                              r.cases - r.failed_cases, r.cases, r.degenerate);
  for (const auto& [property, n] : r.failures) detail += format("; %s x%zu", property.c_str(), n);
  return {r.ok() && r.cases == kAdfaCases, detail};
}

Outcome oracle_exhaustive() {
  const auto grammar = testing::grammar_sentences();
  std::size_t checked = 0, mismatches = 0;
  for (std::uint64_t seed = 0; seed < kOracleScenes; ++seed) {
    const world::Scene s = world::generate_scene(seed * 7919 + 1, world::WorldConfig{});
    for (std::size_t t = 0; t < s.size(); ++t) {
      for (const auto& words : grammar) {
        const bool expected = testing::brute_force_holds(words, s, t);
        const auto a = world::oracle_answer(s, t, world::question_from_strings(words));
        mismatches += a != (expected ? world::Answer::kYes : world::Answer::kNo);
        ++checked;
      }
    }
  }
  std::size_t beam_cases = 0, beam_mismatches = 0;
  for (std::uint64_t seed = 0; seed < kToyLms; ++seed) {
    const testing::ToyLm lm(seed);
    for (const bool norm : {false, true}) {
      const Hypothesis expected = lm.brute_force_best(norm);
      const Hypothesis got = beam_decode(testing::ToyLm::State{}, lm, testing::ToyLm::kStart,
                                         testing::ToyLm::kStop, testing::ToyLm::kMaxLen, 1000,
                                         norm);
      beam_mismatches += got.tokens != expected.tokens;
      ++beam_cases;
    }
  }
  const double bandit = testing::bandit_max_deviation();
  return {mismatches == 0 && checked == kOracleScenes * 8 * grammar.size() &&
              beam_mismatches == 0 && bandit < kBanditTolerance,
          format("oracle %zu/%zu answers match brute force; beam top-1 %zu/%zu; "
                 "bandit max |dev| %.1e (< %.0e)",
                 checked - mismatches, checked, beam_cases - beam_mismatches, beam_cases, bandit,
                 kBanditTolerance)};
}

// Welch t by direct transcription, independent of the library routine.
double welch_t_reference(const std::vector<double>& a, const std::vector<double>& b) {
  auto moments = [](const std::vector<double>& x) {
    double m = 0.0;
    for (double v : x) m += v;
    m /= static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return std::pair{m, ss / static_cast<double>(x.size() - 1)};
  };
  const auto [ma, va] = moments(a);
  const auto [mb, vb] = moments(b);
  return (ma - mb) / std::sqrt(va / static_cast<double>(a.size()) +
                               vb / static_cast<double>(b.size()));
}

Outcome significance_harness(const ExperimentConfig& base) {
  ExperimentConfig config = base;
  config.data.train = 1500;
  config.data.val = 200;
  config.data.new_game = 300;
  config.data.new_object = 0;
  config.guesser_sl.epochs = 4;
  const Datasets data = make_datasets(config);
  const auto variants = ablation_variants();
  std::vector<std::vector<double>> errors(variants.size());
  for (std::size_t run = 0; run < kSignificanceRuns; ++run) {
    for (std::size_t v = 0; v < variants.size(); ++v) {
      ExperimentConfig c = config;
      c.model.ablation = variants[v];
      errors[v].push_back(guesser_error(train_guesser(c, data, 100 + run), data.new_game));
    }
  }
  bool ok = true;
  std::string detail = format("%zu runs per variant, guesser error:", kSignificanceRuns);
  for (std::size_t v = 1; v < variants.size(); ++v) {
    const TTestResult r = welch_t_test(errors[0], errors[v]);
    const double t_ref = welch_t_reference(errors[0], errors[v]);
    const bool t_ok = r.degenerate || std::fabs(r.t - t_ref) <= kTStatTolerance * std::max(1.0, std::fabs(t_ref));
    ok = ok && t_ok && std::isfinite(r.p_value) && r.p_value >= 0.0 && r.p_value <= 1.0;
    detail += format(" %s vs full t=%.3f p=%.4f;", variants[v].label().c_str(), r.t, r.p_value);
  }
  // Two samples of size two with equal variance have df = 2, where the
  // two-sided tail is 1 - |t| / sqrt(2 + t^2).
  double closed_form_dev = 0.0;
  for (double shift : {0.5, 1.0, 3.0, 10.0}) {
    const TTestResult r = welch_t_test(std::vector<double>{0.0, 2.0},
                                       std::vector<double>{shift, shift + 2.0});
    const double t = -shift / std::sqrt(2.0);
    closed_form_dev = std::max({closed_form_dev, std::fabs(r.t - t),
                                std::fabs(r.p_value - (1.0 - std::fabs(t) / std::sqrt(2.0 + t * t)))});
  }
  ok = ok && closed_form_dev < kClosedFormPTolerance;
  detail += format(" df=2 closed-form max dev %.1e", closed_form_dev);
  return {ok, detail};
}

Outcome serve_equivalence(const ExperimentConfig& config, const Datasets& data,
                          std::shared_ptr<const QuestionGenerator> qgen,
                          std::shared_ptr<const Guesser> guesser) {
  ServeOptions options;
  options.world = config.world;
  options.max_turns = config.eval.max_turns;
  options.strategy = config.eval.decode();
  SessionManager manager(qgen, guesser, options);
  std::size_t identical = 0, games = 0;
  for (std::size_t i = 0; i < kServeGames && i < data.new_game.size(); ++i) {
    const world::Game& game = data.new_game[i];
    ++games;
    ApiResponse r = manager.create_session(
        nlohmann::json::object({{"seed", game.scene.seed}, {"target", game.target}}));
    if (r.status != 201) continue;
    const std::string id = r.body["id"];
    bool ok = true;
    while (ok && r.body["status"] == "awaiting_answer") {
      std::vector<std::string> words = r.body["pending_question"]["tokens"];
      words.pop_back();
      const auto a = world::oracle_answer(game.scene, game.target,
                                          world::question_from_strings(words));
      r = manager.submit_answer(id, nlohmann::json::object({{"answer", world::to_string(a)}}));
      ok = r.status == 200;
    }
    if (!ok) continue;
    const EpisodeResult ref = play_episode(game.scene, game.target, *qgen, *guesser,
                                           options.strategy, options.max_turns);
    bool same = r.body["result"]["guess_distribution"].get<std::vector<double>>() ==
                    ref.guess_distribution &&
                r.body["result"]["predicted"] == ref.predicted &&
                r.body["traces"].size() == ref.traces.size();
    for (std::size_t t = 0; same && t < ref.traces.size(); ++t) {
      same = r.body["traces"][t] == ref.traces[t].to_json();
    }
    identical += same;
  }
  return {games > 0 && identical == games,
          format("%zu/%zu scripted-answer sessions bit-identical to play_episode", identical,
                 games)};
}

// Trained artifacts shared by the reproduction criteria.
struct Reproduction {
  std::vector<AblationRow> rows;
  std::vector<double> pipeline_seconds;  // guesser + full questioner, per seed
  std::vector<double> guesser_error;
  std::vector<double> fake_history_error;
  std::vector<double> sl_success;
  std::vector<double> rl_success;
  double rl_seconds = 0.0;
  std::shared_ptr<const QuestionGenerator> qgen;
  std::shared_ptr<const Guesser> guesser;
};

Reproduction reproduce(const ExperimentConfig& config, const Datasets& data, bool with_rl) {
  Reproduction out;
  const auto variants = ablation_variants();
  const auto& games = data.split(world::parse_split(config.eval.split));
  out.rows.resize(variants.size());
  for (std::size_t v = 0; v < variants.size(); ++v) out.rows[v].label = variants[v].label();
  for (const std::uint64_t seed : kSeeds) {
    const auto t0 = Clock::now();
    auto guesser = std::make_shared<Guesser>(train_guesser(config, data, seed));
    out.guesser_error.push_back(guesser_error(*guesser, data.new_game));
    out.fake_history_error.push_back(guesser_error_fake_history(*guesser, data.new_game));
    note(format("seed %llu guesser error %.4f, fake history %.4f (%.0fs)",
                static_cast<unsigned long long>(seed), out.guesser_error.back(),
                out.fake_history_error.back(), seconds_since(t0)));
    std::shared_ptr<QuestionGenerator> full;
    for (std::size_t v = 0; v < variants.size(); ++v) {
      auto q = std::make_shared<QuestionGenerator>(train_qgen(config, data, variants[v], seed));
      const double s =
          evaluate(*q, *guesser, games, config.eval.decode(), config.eval.max_turns).success_rate;
      out.rows[v].success.push_back(s);
      if (v == 0) {
        out.pipeline_seconds.push_back(seconds_since(t0));
        full = q;
      }
      note(format("seed %llu %-10s success %.4f", static_cast<unsigned long long>(seed),
                  out.rows[v].label.c_str(), s));
    }
    if (!out.qgen) {
      out.qgen = full;
      out.guesser = guesser;
    }
    if (!with_rl) continue;
    out.sl_success.push_back(out.rows[0].success.back());
    const auto t1 = Clock::now();
    RlConfig rl = config.rl;
    rl.seed = mix_seed(seed, 3);
    rl_train_qgen(*full, *guesser, data.train, {}, rl);
    out.rl_seconds += seconds_since(t1);
    out.rl_success.push_back(
        evaluate(*full, *guesser, games, config.eval.decode(), config.eval.max_turns)
            .success_rate);
    note(format("seed %llu RL success %.4f (SL %.4f, %.0fs)",
                static_cast<unsigned long long>(seed), out.rl_success.back(),
                out.sl_success.back(), seconds_since(t1)));
  }
  for (std::size_t v = 0; v < out.rows.size(); ++v) {
    out.rows[v].median = median(out.rows[v].success);
    out.rows[v].mean = mean(out.rows[v].success);
    if (v > 0) out.rows[v].vs_full = welch_t_test(out.rows[0].success, out.rows[v].success);
  }
  return out;
}

Outcome sl_reproduction(const Reproduction& r) {
  std::printf("%s", format_ablation_table(r.rows).c_str());
  const double full = r.rows[0].median;
  bool ordered = true;
  std::string detail = format("full median %.4f (>= %.4f)", full, kSlSuccessFactor * kRandomFloor);
  for (std::size_t v = 1; v < r.rows.size(); ++v) {
    ordered = ordered && r.rows[v].median <= full;
    detail += format("; %s %.4f", r.rows[v].label.c_str(), r.rows[v].median);
  }
  const double slowest = *std::max_element(r.pipeline_seconds.begin(), r.pipeline_seconds.end());
  detail += format("; slowest seed %.0fs (<= %.0fs)", slowest, kSlBudgetSeconds);
  return {full >= kSlSuccessFactor * kRandomFloor && ordered && slowest <= kSlBudgetSeconds,
          detail};
}

Outcome rl_reproduction(const Reproduction& r) {
  std::vector<double> gain;
  for (std::size_t i = 0; i < r.rl_success.size(); ++i) {
    gain.push_back(r.rl_success[i] - r.sl_success[i]);
  }
  const double g = median(gain);
  return {g >= kRlGainPoints && r.rl_seconds <= kRlBudgetSeconds,
          format("median gain %+.4f (>= %+.2f): SL median %.4f -> RL median %.4f; %.0fs (<= %.0fs)",
                 g, kRlGainPoints, median(r.sl_success), median(r.rl_success), r.rl_seconds,
                 kRlBudgetSeconds)};
}

Outcome guesser_criterion(const Reproduction& r) {
  std::vector<double> gap;
  for (std::size_t i = 0; i < r.guesser_error.size(); ++i) {
    gap.push_back(r.fake_history_error[i] - r.guesser_error[i]);
  }
  const double err = median(r.guesser_error);
  const double g = median(gap);
  return {err < kGuesserMaxError && g >= kFakeHistoryGainPoints,
          format("median error %.4f (< %.2f, chance 0.875); fake history %+.4f (>= %+.2f)", err,
                 kGuesserMaxError, g, kFakeHistoryGainPoints)};
}

}  // namespace
}  // namespace advse

int main(int argc, char** argv) {
  using namespace advse;
  CLI::App app{"ADVSE acceptance harness"};
  std::vector<std::string> only;
  app.add_option("--only", only, "Run only these criteria")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::string> names = {
      "gradient_integrity", "adfa_invariants", "oracle_exhaustive", "sl_reproduction",
      "rl_reproduction",    "guesser",         "significance",      "serve_equivalence"};
  for (const auto& o : only) {
    if (std::find(names.begin(), names.end(), o) == names.end()) {
      std::fprintf(stderr, "unknown criterion '%s'\n", o.c_str());
      return 2;
    }
  }
  auto wanted = [&](const std::string& n) {
    return only.empty() || std::find(only.begin(), only.end(), n) != only.end();
  };

  int failures = 0;
  auto run = [&](const std::string& name, const std::function<Outcome()>& fn) {
    if (!wanted(name)) return;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %-18s %s [%.0fs]\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  };

  run("gradient_integrity", gradient_integrity);
  run("adfa_invariants", adfa_invariants);
  run("oracle_exhaustive", oracle_exhaustive);

  const ExperimentConfig config;
  const bool need_training = wanted("sl_reproduction") || wanted("rl_reproduction") ||
                             wanted("guesser") || wanted("serve_equivalence");
  std::optional<Datasets> data;
  std::optional<Reproduction> repro;
  if (need_training) data = make_datasets(config);
  if (wanted("sl_reproduction") || wanted("rl_reproduction") || wanted("guesser")) {
    try {
      repro = reproduce(config, *data, wanted("rl_reproduction"));
    } catch (const std::exception& e) {
      std::printf("  . training failed: %s\n", e.what());
    }
  }
  auto with_repro = [&](auto fn) {
    return [&, fn]() -> Outcome {
      if (!repro) return {false, "training did not complete"};
      return fn(*repro);
    };
  };
  run("sl_reproduction", with_repro(sl_reproduction));
  run("rl_reproduction", with_repro(rl_reproduction));
  run("guesser", with_repro(guesser_criterion));
  run("significance", [&] { return significance_harness(config); });
  run("serve_equivalence", [&] {
    if (repro) return serve_equivalence(config, *data, repro->qgen, repro->guesser);
    return serve_equivalence(config, *data, std::make_shared<QuestionGenerator>(config.model, 1),
                             std::make_shared<Guesser>(config.model, 2));
  });
  std::printf("%d criteria failed\n", failures);
  return failures;
}
