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

#ifndef ADVSE_PARAMS_HPP_
#define ADVSE_PARAMS_HPP_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "advse/tensor.hpp"

namespace advse {

enum class Init {
  kUniformFanIn,  // U(-1/sqrt(fan_in), +1/sqrt(fan_in)), fan_in = last dim
  kZero,
};

// Named parameters in registration order. Addresses are stable for the
// lifetime of the store.
class ParameterStore {
 public:
  explicit ParameterStore(std::uint64_t init_seed = 0) : rng_(init_seed) {}
  ParameterStore(const ParameterStore&) = delete;
  ParameterStore& operator=(const ParameterStore&) = delete;
  ParameterStore(ParameterStore&&) = default;
  ParameterStore& operator=(ParameterStore&&) = default;

  Parameter& add(const std::string& name, Shape shape, Init init = Init::kUniformFanIn);
  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.contains(name); }

  std::size_t size() const { return params_.size(); }
  std::size_t num_values() const;
  Parameter& operator[](std::size_t i) { return *params_[i]; }
  const Parameter& operator[](std::size_t i) const { return *params_[i]; }

  void zero_grad();
  void scale_grad(double factor);
  double grad_norm() const;

  void copy_values_from(const ParameterStore& other);

  // {"name": {"shape": [...], "values": [...]}, ...}
  nlohmann::json to_json() const;
  // Values for every registered parameter must be present with matching
  // shapes; extra entries are rejected.
  void load_json(const nlohmann::json& j);

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::unordered_map<std::string, std::size_t> index_;
  std::mt19937_64 rng_;
};

// Checkpoint file:
//   {"format": "advse-checkpoint", "version": 1, "kind": <model kind>,
//    "config": {...}, "parameters": {name: {"shape": [...], "values": [...]}}}
inline constexpr int kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const std::string& kind,
                     const nlohmann::json& config, const ParameterStore& store);

struct CheckpointFile {
  std::string kind;
  nlohmann::json config;
  nlohmann::json parameters;
};
CheckpointFile read_checkpoint(const std::filesystem::path& path);

}  // namespace advse

#endif  // ADVSE_PARAMS_HPP_
