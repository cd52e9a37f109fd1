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

#ifndef ADVSE_STATS_HPP_
#define ADVSE_STATS_HPP_

#include <cstddef>
#include <span>
#include <vector>

namespace advse {

double mean(std::span<const double> x);
// Unbiased sample variance; zero for fewer than two values.
double sample_variance(std::span<const double> x);
double median(std::vector<double> x);

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p_value = 1.0;  // two-sided
  // Both samples have zero variance; t is 0 (equal means) or +-inf.
  bool degenerate = false;
};

// Welch's unequal-variance two-sample t-test. Throws Error when either
// sample has fewer than two values.
TTestResult welch_t_test(std::span<const double> a, std::span<const double> b);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Wilson score interval for a binomial proportion at the given normal
// quantile (1.96 for 95%). Throws Error when n is zero.
Interval wilson_interval(std::size_t successes, std::size_t n, double z = 1.959963984540054);

}  // namespace advse

#endif  // ADVSE_STATS_HPP_
