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

// Session API for playing the Oracle by hand.
//
//   POST /session               {"seed"?: int, "target"?: int}
//   POST /session/{id}/answer   {"answer": "yes" | "no" | "na"}
//   GET  /session/{id}
//
// Every response body is a session document:
//
//   {"id", "status": "awaiting_answer" | "finished", "seed", "target",
//    "max_turns", "turn",
//    "scene": {"objects": [{"index", "category", "color", "size",
//                           "bbox": [x_min, y_min, x_max, y_max]}]},
//    "pending_question": {"tokens": [...], "text"} | null,
//    "transcript": [{"tokens", "text", "answer"}],
//    "trace": <latest turn trace>, "lambda": <latest lambda or null>,
//    "traces": [<turn trace>...],
//    "result": null | {"guess_distribution", "predicted", "success",
//                      "stopped_early"}}
//
// Errors are {"error": message} with 400 (bad body or answer literal), 404
// (unknown or expired session), 409 (session finished) or 503 (models not
// loaded).

#ifndef ADVSE_SERVE_HPP_
#define ADVSE_SERVE_HPP_

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <string>

#include <nlohmann/json.hpp>

#include "advse/game.hpp"

namespace advse {

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path static_dir;  // empty disables static hosting
  std::chrono::seconds session_ttl{1800};
  std::size_t max_turns = 8;
  DecodeStrategy strategy;
  world::WorldConfig world;
};

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

class SessionManager {
 public:
  using Clock = std::chrono::steady_clock;

  // Null models make every session call answer 503.
  SessionManager(std::shared_ptr<const QuestionGenerator> qgen,
                 std::shared_ptr<const Guesser> guesser, ServeOptions options,
                 std::function<Clock::time_point()> clock = Clock::now);

  ApiResponse create_session(const nlohmann::json& request);
  ApiResponse submit_answer(const std::string& id, const nlohmann::json& request);
  ApiResponse get_session(const std::string& id);

  // Drops sessions idle for longer than the TTL; returns how many.
  std::size_t expire_idle();
  std::size_t size() const;

  const ServeOptions& options() const { return options_; }

 private:
  struct Session {
    std::string id;
    std::uint64_t seed = 0;
    std::unique_ptr<EpisodeRunner> runner;
    Clock::time_point last_used;
    std::mutex mu;
  };

  bool models_loaded() const { return qgen_ && guesser_; }
  std::shared_ptr<Session> find(const std::string& id);
  nlohmann::json describe(const Session& s) const;
  std::string new_id();

  std::shared_ptr<const QuestionGenerator> qgen_;
  std::shared_ptr<const Guesser> guesser_;
  ServeOptions options_;
  std::function<Clock::time_point()> clock_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::mt19937_64 id_rng_;
  std::uint64_t next_seed_ = 0;
};

// Session document for an episode runner (shared by the API and tests).
nlohmann::json session_document(const std::string& id, std::uint64_t seed,
                                std::size_t max_turns, const EpisodeRunner& runner);

// Blocks serving HTTP until stop_server() or process exit.
void run_server(SessionManager& manager);
// Callable from another thread to stop a running run_server().
void stop_server();

}  // namespace advse

#endif  // ADVSE_SERVE_HPP_
