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

#include "advse/params.hpp"

#include <cmath>
#include <fstream>

#include "advse/error.hpp"

namespace advse {

Parameter& ParameterStore::add(const std::string& name, Shape shape, Init init) {
  if (index_.contains(name)) throw ConfigError("duplicate parameter '" + name + "'");
  if (shape.empty() || numel(shape) == 0) {
    throw ShapeError("parameter '" + name + "' has empty shape");
  }
  auto p = std::make_unique<Parameter>();
  p->name = name;
  p->shape = shape;
  p->value.assign(numel(shape), 0.0);
  p->grad.assign(p->value.size(), 0.0);
  if (init == Init::kUniformFanIn) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(shape.back()));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& v : p->value) v = dist(rng_);
  }
  index_.emplace(name, params_.size());
  params_.push_back(std::move(p));
  return *params_.back();
}

Parameter& ParameterStore::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("unknown parameter '" + name + "'");
  return *params_[it->second];
}

const Parameter& ParameterStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("unknown parameter '" + name + "'");
  return *params_[it->second];
}

std::size_t ParameterStore::num_values() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) p->zero_grad();
}

void ParameterStore::scale_grad(double factor) {
  for (auto& p : params_)
    for (double& g : p->grad) g *= factor;
}

double ParameterStore::grad_norm() const {
  double s = 0.0;
  for (const auto& p : params_)
    for (double g : p->grad) s += g * g;
  return std::sqrt(s);
}

void ParameterStore::copy_values_from(const ParameterStore& other) {
  for (auto& p : params_) {
    const Parameter& src = other.get(p->name);
    if (src.shape != p->shape) {
      throw ShapeError("copy_values_from: '" + p->name + "' shape " +
                       shape_string(src.shape) + " vs " + shape_string(p->shape));
    }
    p->value = src.value;
  }
}

nlohmann::json ParameterStore::to_json() const {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& p : params_) {
    out[p->name] = {{"shape", p->shape}, {"values", p->value}};
  }
  return out;
}

void ParameterStore::load_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("checkpoint parameters must be an object");
  for (auto& p : params_) {
    if (!j.contains(p->name)) {
      throw ConfigError("checkpoint is missing parameter '" + p->name + "'");
    }
    const auto& entry = j.at(p->name);
    const auto shape = entry.at("shape").get<Shape>();
    if (shape != p->shape) {
      throw ConfigError("checkpoint parameter '" + p->name + "' has shape " +
                        shape_string(shape) + ", model expects " +
                        shape_string(p->shape));
    }
    auto values = entry.at("values").get<std::vector<double>>();
    if (values.size() != p->value.size()) {
      throw ConfigError("checkpoint parameter '" + p->name + "' has " +
                        std::to_string(values.size()) + " values");
    }
    p->value = std::move(values);
    p->zero_grad();
  }
  for (const auto& [name, _] : j.items()) {
    if (!index_.contains(name)) {
      throw ConfigError("checkpoint has unexpected parameter '" + name + "'");
    }
  }
}

void save_checkpoint(const std::filesystem::path& path, const std::string& kind,
                     const nlohmann::json& config, const ParameterStore& store) {
  nlohmann::json j = {{"format", "advse-checkpoint"},
                      {"version", kCheckpointVersion},
                      {"kind", kind},
                      {"config", config},
                      {"parameters", store.to_json()}};
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  out << j.dump() << '\n';
}

CheckpointFile read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open checkpoint " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed checkpoint " + path.string() + ": " + e.what());
  }
  if (j.value("format", "") != "advse-checkpoint") {
    throw ConfigError("not an advse checkpoint: " + path.string());
  }
  if (j.value("version", 0) != kCheckpointVersion) {
    throw ConfigError("unsupported checkpoint version in " + path.string());
  }
  return {j.at("kind").get<std::string>(), j.at("config"), j.at("parameters")};
}

}  // namespace advse
