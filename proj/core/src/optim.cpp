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

#include "advse/optim.hpp"

#include <cmath>

#include "advse/error.hpp"

namespace advse {

OptimizerKind parse_optimizer(const std::string& name) {
  if (name == "adam") return OptimizerKind::kAdam;
  if (name == "sgd") return OptimizerKind::kSgd;
  throw ConfigError("unknown optimizer '" + name + "' (expected adam or sgd)");
}

Optimizer::Optimizer(OptimizerConfig config) : config_(config) {
  set_lr(config.lr);
}

void Optimizer::set_lr(double lr) {
  if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
  config_.lr = lr;
}

void Optimizer::step(ParameterStore& store) {
  ++steps_;
  const double lr = config_.lr;
  if (config_.kind == OptimizerKind::kSgd) {
    for (std::size_t i = 0; i < store.size(); ++i) {
      Parameter& p = store[i];
      if (p.grad.size() != p.value.size()) {
        throw ShapeError("optimizer: gradient size mismatch for " + p.name);
      }
      for (std::size_t k = 0; k < p.value.size(); ++k) p.value[k] -= lr * p.grad[k];
    }
    return;
  }
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  for (std::size_t i = 0; i < store.size(); ++i) {
    Parameter& p = store[i];
    if (p.grad.size() != p.value.size()) {
      throw ShapeError("optimizer: gradient size mismatch for " + p.name);
    }
    Moments& mo = moments_[p.name];
    if (mo.m.size() != p.value.size()) {
      mo.m.assign(p.value.size(), 0.0);
      mo.v.assign(p.value.size(), 0.0);
    }
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      const double g = p.grad[k];
      mo.m[k] = b1 * mo.m[k] + (1.0 - b1) * g;
      mo.v[k] = b2 * mo.v[k] + (1.0 - b2) * g * g;
      const double mhat = mo.m[k] / c1;
      const double vhat = mo.v[k] / c2;
      p.value[k] -= lr * mhat / (std::sqrt(vhat) + config_.eps);
    }
  }
}

double clip_grad_norm(ParameterStore& store, double max_norm) {
  const double norm = store.grad_norm();
  if (norm > max_norm && norm > 0.0) store.scale_grad(max_norm / norm);
  return norm;
}

}  // namespace advse
