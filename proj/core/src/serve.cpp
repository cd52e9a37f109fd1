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

#include "advse/serve.hpp"

#include <atomic>
#include <cstdio>

#include <httplib.h>

#include "advse/error.hpp"

namespace advse {

namespace {

ApiResponse error_response(int status, const std::string& message) {
  return {status, {{"error", message}}};
}

nlohmann::json question_json(const world::Question& q) {
  std::vector<std::string> words;
  for (const world::Token t : q.tokens) words.emplace_back(world::vocab::to_string(t));
  return {{"tokens", words}, {"text", q.text()}};
}

std::atomic<httplib::Server*> g_server{nullptr};

}  // namespace

nlohmann::json session_document(const std::string& id, std::uint64_t seed,
                                std::size_t max_turns, const EpisodeRunner& runner) {
  nlohmann::json objects = nlohmann::json::array();
  const world::Scene& scene = runner.scene();
  for (std::size_t k = 0; k < scene.size(); ++k) {
    const auto& o = scene.objects[k];
    objects.push_back({{"index", k},
                       {"category", world::kCategories[o.category]},
                       {"color", world::kColors[o.color]},
                       {"size", world::kSizes[o.size]},
                       {"bbox", {o.bbox.x_min, o.bbox.y_min, o.bbox.x_max, o.bbox.y_max}}});
  }
  nlohmann::json transcript = nlohmann::json::array();
  for (const auto& t : runner.transcript()) {
    nlohmann::json j = question_json(t.question);
    j["answer"] = world::to_string(t.answer);
    transcript.push_back(std::move(j));
  }
  nlohmann::json traces = nlohmann::json::array();
  for (const auto& t : runner.traces()) traces.push_back(t.to_json());
  const TurnTrace& latest = runner.traces().back();

  nlohmann::json doc = {
      {"id", id},
      {"status", runner.finished() ? "finished" : "awaiting_answer"},
      {"seed", seed},
      {"target", runner.target()},
      {"max_turns", max_turns},
      {"turn", runner.turn()},
      {"scene", {{"objects", std::move(objects)}}},
      {"transcript", std::move(transcript)},
      {"trace", latest.to_json()},
      {"traces", std::move(traces)},
  };
  doc["lambda"] = latest.lambda ? nlohmann::json(*latest.lambda) : nlohmann::json(nullptr);
  if (runner.finished()) {
    const EpisodeResult& r = runner.result();
    doc["pending_question"] = nullptr;
    doc["result"] = {{"guess_distribution", r.guess_distribution},
                     {"predicted", r.predicted},
                     {"success", r.success},
                     {"stopped_early", r.stopped_early}};
  } else {
    doc["pending_question"] = question_json(runner.pending_question());
    doc["result"] = nullptr;
  }
  return doc;
}

SessionManager::SessionManager(std::shared_ptr<const QuestionGenerator> qgen,
                               std::shared_ptr<const Guesser> guesser, ServeOptions options,
                               std::function<Clock::time_point()> clock)
    : qgen_(std::move(qgen)),
      guesser_(std::move(guesser)),
      options_(std::move(options)),
      clock_(std::move(clock)),
      id_rng_(std::random_device{}()) {
  next_seed_ = id_rng_() >> 16;
}

std::string SessionManager::new_id() {
  char buf[33];
  do {
    std::snprintf(buf, sizeof(buf), "%016llx%016llx",
                  static_cast<unsigned long long>(id_rng_()),
                  static_cast<unsigned long long>(id_rng_()));
  } while (sessions_.contains(buf));
  return buf;
}

ApiResponse SessionManager::create_session(const nlohmann::json& request) {
  if (!models_loaded()) return error_response(503, "models not loaded");
  if (!request.is_null() && !request.is_object()) {
    return error_response(400, "request body must be a JSON object");
  }
  expire_idle();
  auto session = std::make_shared<Session>();
  std::optional<std::size_t> target;
  {
    std::lock_guard lock(mu_);
    const bool has_seed = request.is_object() && request.contains("seed");
    const bool has_target = request.is_object() && request.contains("target");
    auto non_negative = [](const nlohmann::json& v) {
      return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
    };
    if ((has_seed && !non_negative(request["seed"])) ||
        (has_target && !non_negative(request["target"]))) {
      return error_response(400, "seed and target must be non-negative integers");
    }
    session->seed = has_seed ? request["seed"].get<std::uint64_t>() : next_seed_++;
    if (has_target) target = request["target"].get<std::size_t>();
    session->id = new_id();
  }
  world::Scene scene = world::generate_scene(session->seed, options_.world);
  if (!target) target = mix_seed(session->seed, 0x5e55) % scene.size();
  if (*target >= scene.size()) return error_response(400, "target index out of range");
  session->runner = std::make_unique<EpisodeRunner>(*qgen_, *guesser_, std::move(scene),
                                                    *target, options_.strategy,
                                                    options_.max_turns);
  session->last_used = clock_();
  nlohmann::json doc =
      session_document(session->id, session->seed, options_.max_turns, *session->runner);
  std::lock_guard lock(mu_);
  sessions_.emplace(session->id, std::move(session));
  return {201, std::move(doc)};
}

std::shared_ptr<SessionManager::Session> SessionManager::find(const std::string& id) {
  std::lock_guard lock(mu_);
  const auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

ApiResponse SessionManager::submit_answer(const std::string& id,
                                          const nlohmann::json& request) {
  if (!models_loaded()) return error_response(503, "models not loaded");
  expire_idle();
  const auto session = find(id);
  if (!session) return error_response(404, "unknown session " + id);
  std::lock_guard lock(session->mu);
  if (session->runner->finished()) return error_response(409, "session is finished");
  if (!request.is_object() || !request.contains("answer") || !request["answer"].is_string()) {
    return error_response(400, "body must be {\"answer\": \"yes\" | \"no\" | \"na\"}");
  }
  world::Answer answer;
  try {
    answer = world::parse_answer(request["answer"].get<std::string>());
  } catch (const Error& e) {
    return error_response(400, e.what());
  }
  session->runner->submit(answer);
  session->last_used = clock_();
  return {200, session_document(session->id, session->seed, options_.max_turns,
                                *session->runner)};
}

ApiResponse SessionManager::get_session(const std::string& id) {
  if (!models_loaded()) return error_response(503, "models not loaded");
  expire_idle();
  const auto session = find(id);
  if (!session) return error_response(404, "unknown session " + id);
  std::lock_guard lock(session->mu);
  session->last_used = clock_();
  return {200, session_document(session->id, session->seed, options_.max_turns,
                                *session->runner)};
}

std::size_t SessionManager::expire_idle() {
  const auto now = clock_();
  std::lock_guard lock(mu_);
  return std::erase_if(sessions_, [&](const auto& kv) {
    std::lock_guard session_lock(kv.second->mu);
    return now - kv.second->last_used > options_.session_ttl;
  });
}

std::size_t SessionManager::size() const {
  std::lock_guard lock(mu_);
  return sessions_.size();
}

void run_server(SessionManager& manager) {
  httplib::Server server;
  auto reply = [](httplib::Response& res, const ApiResponse& api) {
    res.status = api.status;
    res.set_content(api.body.dump(), "application/json");
  };
  auto parse_body = [](const httplib::Request& req, nlohmann::json& out) {
    if (req.body.empty()) {
      out = nlohmann::json::object();
      return true;
    }
    out = nlohmann::json::parse(req.body, nullptr, false);
    return !out.is_discarded();
  };

  server.Post("/session", [&](const httplib::Request& req, httplib::Response& res) {
    nlohmann::json body;
    if (!parse_body(req, body)) return reply(res, error_response(400, "malformed JSON"));
    reply(res, manager.create_session(body));
  });
  server.Post(R"(/session/([0-9a-f]+)/answer)",
              [&](const httplib::Request& req, httplib::Response& res) {
                nlohmann::json body;
                if (!parse_body(req, body)) {
                  return reply(res, error_response(400, "malformed JSON"));
                }
                reply(res, manager.submit_answer(req.matches[1], body));
              });
  server.Get(R"(/session/([0-9a-f]+))", [&](const httplib::Request& req, httplib::Response& res) {
    reply(res, manager.get_session(req.matches[1]));
  });
  server.set_exception_handler(
      [&](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string msg = "internal error";
        try {
          std::rethrow_exception(ep);
        } catch (const std::exception& e) {
          msg = e.what();
        } catch (...) {
        }
        reply(res, error_response(500, msg));
      });
  const auto& opts = manager.options();
  if (!opts.static_dir.empty() && !server.set_mount_point("/", opts.static_dir.string())) {
    throw ConfigError("static directory " + opts.static_dir.string() + " does not exist");
  }
  g_server = &server;
  const bool ok = server.listen(opts.host, opts.port);
  g_server = nullptr;
  if (!ok) {
    throw Error("cannot listen on " + opts.host + ":" + std::to_string(opts.port));
  }
}

void stop_server() {
  if (httplib::Server* s = g_server.load()) s->stop();
}

}  // namespace advse
