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

#ifndef ADVSE_OPTIM_HPP_
#define ADVSE_OPTIM_HPP_

#include <string>
#include <unordered_map>
#include <vector>

#include "advse/params.hpp"

namespace advse {

enum class OptimizerKind { kAdam, kSgd };

OptimizerKind parse_optimizer(const std::string& name);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdam;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Applies Parameter::grad to Parameter::value. Adam moments are kept per
// parameter name and persist across step() calls.
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig config);

  void step(ParameterStore& store);
  void set_lr(double lr);
  double lr() const { return config_.lr; }
  long steps() const { return steps_; }

 private:
  struct Moments {
    std::vector<double> m;
    std::vector<double> v;
  };
  OptimizerConfig config_;
  long steps_ = 0;
  std::unordered_map<std::string, Moments> moments_;
};

// Rescales all gradients so their global L2 norm is at most max_norm.
// Returns the norm before clipping.
double clip_grad_norm(ParameterStore& store, double max_norm);

}  // namespace advse

#endif  // ADVSE_OPTIM_HPP_
