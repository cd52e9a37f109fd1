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

// Central finite-difference gradient checker shared by unit and acceptance
// tests.

#ifndef ADVSE_TESTS_GRADCHECK_HPP_
#define ADVSE_TESTS_GRADCHECK_HPP_

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "advse/params.hpp"
#include "advse/tensor.hpp"

namespace advse::testing {

inline constexpr double kFdStep = 1e-5;
inline constexpr double kFdTolerance = 1e-4;

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst;  // parameter with the largest error
  std::size_t checked = 0;
};

// For each parameter, ||g_analytic - g_numeric|| / (||g_analytic|| +
// ||g_numeric||); both norms below `floor` count as agreement.
inline GradCheckResult check_gradients(const std::vector<Parameter*>& params,
                                       const std::function<Tensor(Tape&)>& loss_fn,
                                       double step = kFdStep, double floor = 1e-9) {
  for (Parameter* p : params) p->zero_grad();
  {
    Tape tape;
    tape.backward(loss_fn(tape));
  }
  auto value_at = [&] {
    Tape tape;
    return loss_fn(tape).item();
  };
  GradCheckResult r;
  for (Parameter* p : params) {
    double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double saved = p->value[i];
      p->value[i] = saved + step;
      const double up = value_at();
      p->value[i] = saved - step;
      const double down = value_at();
      p->value[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double analytic = p->grad[i];
      diff2 += (analytic - numeric) * (analytic - numeric);
      a2 += analytic * analytic;
      n2 += numeric * numeric;
      ++r.checked;
    }
    const double denom = std::sqrt(a2) + std::sqrt(n2);
    const double rel = denom < floor ? 0.0 : std::sqrt(diff2) / denom;
    if (rel >= r.max_rel_error) {
      r.max_rel_error = rel;
      r.worst = p->name;
    }
  }
  return r;
}

inline Parameter make_param(const std::string& name, Shape shape, std::mt19937_64& rng,
                            double lo = -1.0, double hi = 1.0) {
  Parameter p;
  p.name = name;
  p.value.resize(numel(shape));
  std::uniform_real_distribution<double> u(lo, hi);
  for (double& v : p.value) v = u(rng);
  p.shape = std::move(shape);
  p.grad.assign(p.value.size(), 0.0);
  return p;
}

}  // namespace advse::testing

#endif  // ADVSE_TESTS_GRADCHECK_HPP_
