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


#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <doctest.h>

#include "advse/error.hpp"
#include "advse/stats.hpp"

namespace advse {
namespace {

// Two-sided tail of Student's t by Simpson integration of the density.
double t_tail_quadrature(double t, double df) {
  const double c = std::exp(std::lgamma((df + 1) / 2) - std::lgamma(df / 2)) /
                   std::sqrt(df * std::numbers::pi);
  auto pdf = [&](double x) { return c * std::pow(1 + x * x / df, -(df + 1) / 2); };
  const int n = 200000;
  const double a = 0.0, b = std::fabs(t), h = (b - a) / n;
  double s = pdf(a) + pdf(b);
  for (int i = 1; i < n; ++i) s += pdf(a + i * h) * (i % 2 ? 4 : 2);
  return 1.0 - 2.0 * s * h / 3.0;
}

TEST_CASE("descriptive statistics") {
  const std::vector<double> x = {2, 4, 4, 4, 5, 5, 7, 9};
  CHECK(mean(x) == 5.0);
  CHECK(sample_variance(x) == doctest::Approx(32.0 / 7.0));
  CHECK(median(x) == 4.5);
  CHECK(median({3, 1, 2}) == 2.0);
  CHECK_THROWS_AS(median({}), Error);
}

TEST_CASE("Welch t-test against the df = 2 closed form") {
  // Equal variances and n = 2 per arm give exactly two degrees of freedom,
  // where the two-sided tail is 1 - |t| / sqrt(2 + t^2).
  const std::vector<double> a = {0.0, 2.0};
  for (double shift : {0.5, 1.0, 3.0, 10.0}) {
    const std::vector<double> b = {shift, shift + 2.0};
    const TTestResult r = welch_t_test(a, b);
    const double t = -shift / std::sqrt(2.0);
    CHECK(r.t == doctest::Approx(t).epsilon(1e-12));
    CHECK(r.df == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(r.p_value == doctest::Approx(1.0 - std::fabs(t) / std::sqrt(2.0 + t * t)).epsilon(1e-10));
  }
}

TEST_CASE("Welch t-test against quadrature at fractional degrees of freedom") {
  const std::vector<double> a = {0.41, 0.39, 0.44, 0.38, 0.40, 0.43, 0.42, 0.37, 0.45, 0.41};
  const std::vector<double> b = {0.35, 0.30, 0.41, 0.28, 0.36, 0.33, 0.39, 0.31, 0.34, 0.29};
  const TTestResult r = welch_t_test(a, b);
  const double va = sample_variance(a) / 10, vb = sample_variance(b) / 10;
  CHECK(r.t == doctest::Approx((mean(a) - mean(b)) / std::sqrt(va + vb)).epsilon(1e-12));
  CHECK(r.df > 9.0);
  CHECK(r.df < 18.0);
  CHECK(r.p_value == doctest::Approx(t_tail_quadrature(r.t, r.df)).epsilon(1e-6));
}

TEST_CASE("ten-run harness separates shifted normals and not identical samples") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> n0(0.0, 1.0), n1(1.5, 1.0);
  std::vector<double> a, b;
  for (int i = 0; i < 10; ++i) {
    a.push_back(n0(rng));
    b.push_back(n1(rng));
  }
  CHECK(welch_t_test(a, b).p_value < 0.05);
  const TTestResult same = welch_t_test(a, a);
  CHECK(same.p_value == doctest::Approx(1.0));
  CHECK(same.t == 0.0);
  const std::vector<double> flat = {0.25, 0.25, 0.25};
  CHECK(welch_t_test(flat, flat).degenerate);
  CHECK(welch_t_test(flat, flat).p_value == 1.0);
  CHECK(welch_t_test(flat, std::vector<double>{0.5, 0.5}).p_value == 0.0);
  CHECK_THROWS_AS(welch_t_test(std::vector<double>{1.0}, flat), Error);
}

TEST_CASE("Wilson interval") {
  const Interval i = wilson_interval(8, 10);
  CHECK(i.lo == doctest::Approx(0.4902).epsilon(1e-3));
  CHECK(i.hi == doctest::Approx(0.9433).epsilon(1e-3));
  const Interval zero = wilson_interval(0, 50);
  CHECK(zero.lo == doctest::Approx(0.0));
  CHECK(zero.hi > 0.0);
  const Interval all = wilson_interval(50, 50);
  CHECK(all.hi == doctest::Approx(1.0));
  CHECK_THROWS_AS(wilson_interval(0, 0), Error);
}

}  // namespace
}  // namespace advse
