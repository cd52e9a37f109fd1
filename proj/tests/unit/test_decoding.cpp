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

#include <doctest.h>

#include "advse/decoding.hpp"
#include "advse/error.hpp"
#include "toy_lm.hpp"

namespace advse {
namespace {

using testing::ToyLm;

TEST_CASE("log_softmax is normalized and shift invariant") {
  const auto a = log_softmax({1.0, 2.0, 3.0});
  const auto b = log_softmax({101.0, 102.0, 103.0});
  double z = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    z += std::exp(a[i]);
    CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
  }
  CHECK(z == doctest::Approx(1.0));
}

TEST_CASE("beam search matches brute-force enumeration on a toy vocabulary") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    ToyLm lm(seed);
    for (const bool norm : {false, true}) {
      CAPTURE(seed);
      CAPTURE(norm);
      const Hypothesis expected = lm.brute_force_best(norm);
      const Hypothesis got = beam_decode(ToyLm::State{}, lm, ToyLm::kStart, ToyLm::kStop,
                                         ToyLm::kMaxLen, 1000, norm);
      CHECK(got.tokens == expected.tokens);
      CHECK(got.logprob == doctest::Approx(expected.logprob).epsilon(1e-12));
    }
  }
}

TEST_CASE("beam of width one equals greedy decoding") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    ToyLm lm(seed);
    const Hypothesis g = greedy_decode(ToyLm::State{}, lm, ToyLm::kStart, ToyLm::kStop,
                                       ToyLm::kMaxLen);
    for (const bool norm : {false, true}) {
      const Hypothesis b = beam_decode(ToyLm::State{}, lm, ToyLm::kStart, ToyLm::kStop,
                                       ToyLm::kMaxLen, 1, norm);
      CHECK(b.tokens == g.tokens);
    }
  }
}

TEST_CASE("beam never scores below greedy and respects the length cap") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    ToyLm lm(seed);
    const Hypothesis g = greedy_decode(ToyLm::State{}, lm, ToyLm::kStart, ToyLm::kStop,
                                       ToyLm::kMaxLen);
    for (std::size_t width : {2, 3, 5}) {
      const Hypothesis b = beam_decode(ToyLm::State{}, lm, ToyLm::kStart, ToyLm::kStop,
                                       ToyLm::kMaxLen, width, false);
      CHECK(b.logprob >= g.logprob - 1e-12);
      CHECK(b.tokens.size() <= ToyLm::kMaxLen);
      CHECK(lm.sequence_logprob(b.tokens) == doctest::Approx(b.logprob).epsilon(1e-12));
    }
  }
}

TEST_CASE("greedy and sampled decoding: deterministic, bounded, stop kept") {
  ToyLm lm(3);
  const Hypothesis a = greedy_decode(ToyLm::State{}, lm, ToyLm::kStart, ToyLm::kStop, 4);
  const Hypothesis b = greedy_decode(ToyLm::State{}, lm, ToyLm::kStart, ToyLm::kStop, 4);
  CHECK(a.tokens == b.tokens);
  CHECK(a.tokens.size() <= 4);
  std::mt19937_64 r1(9), r2(9);
  for (int i = 0; i < 100; ++i) {
    const Hypothesis s1 = sample_decode(ToyLm::State{}, lm, ToyLm::kStart, ToyLm::kStop, 4, r1);
    const Hypothesis s2 = sample_decode(ToyLm::State{}, lm, ToyLm::kStart, ToyLm::kStop, 4, r2);
    CHECK(s1.tokens == s2.tokens);
    CHECK(s1.tokens.size() <= 4);
    if (s1.tokens.size() < 4) CHECK(s1.tokens.back() == ToyLm::kStop);
    CHECK(lm.sequence_logprob(s1.tokens) == doctest::Approx(s1.logprob).epsilon(1e-12));
  }
}

TEST_CASE("sampled sequences follow the model distribution") {
  ToyLm lm(11);
  std::mt19937_64 rng(1);
  constexpr int kDraws = 40000;
  std::map<std::vector<std::uint32_t>, int> counts;
  for (int i = 0; i < kDraws; ++i) {
    ++counts[sample_decode(ToyLm::State{}, lm, ToyLm::kStart, ToyLm::kStop, 2, rng).tokens];
  }
  for (const auto& [tokens, n] : counts) {
    const double p = std::exp(lm.sequence_logprob(tokens));
    CHECK(std::abs(n / static_cast<double>(kDraws) - p) < 0.015);
  }
}

TEST_CASE("strategy parsing") {
  CHECK(parse_strategy("greedy").kind == DecodeKind::kGreedy);
  const auto b = parse_strategy("beam", 7);
  CHECK(b.kind == DecodeKind::kBeam);
  CHECK(b.beam_width == 7);
  CHECK(parse_strategy("sample", 20, 4).seed == 4);
  CHECK_THROWS_AS(parse_strategy("nucleus"), ConfigError);
  CHECK_THROWS_AS(parse_strategy("beam", 0), ConfigError);
  ToyLm lm(0);
  CHECK_THROWS_AS(beam_decode(ToyLm::State{}, lm, ToyLm::kStart, ToyLm::kStop, 3, 0, true),
                  Error);
}

}  // namespace
}  // namespace advse
