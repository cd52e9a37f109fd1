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

// Five-token language model with history-dependent pseudo-random
// log-probabilities, plus exhaustive enumeration of its sequences.

#ifndef ADVSE_TESTS_TOY_LM_HPP_
#define ADVSE_TESTS_TOY_LM_HPP_

#include <cmath>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "advse/decoding.hpp"
#include "advse/nn.hpp"

namespace advse::testing {

class ToyLm {
 public:
  using State = std::vector<std::uint32_t>;
  static constexpr std::uint32_t kVocab = 5;
  static constexpr std::uint32_t kStart = 0;
  static constexpr std::uint32_t kStop = 1;
  static constexpr std::size_t kMaxLen = 4;

  explicit ToyLm(std::uint64_t seed) : seed_(seed) {}

  std::pair<std::vector<double>, State> operator()(const State& history,
                                                   std::uint32_t prev) const {
    State next = history;
    next.push_back(prev);
    std::uint64_t h = seed_;
    for (std::uint32_t t : next) h = mix_seed(h, t + 1);
    std::vector<double> logits(kVocab);
    for (std::uint32_t v = 0; v < kVocab; ++v) {
      logits[v] = 3.0 * uniform_open01(mix_seed(h, 100 + v));
    }
    return {log_softmax(logits), std::move(next)};
  }

  double sequence_logprob(const std::vector<std::uint32_t>& tokens) const {
    State s;
    std::uint32_t prev = kStart;
    double lp = 0.0;
    for (std::uint32_t t : tokens) {
      auto [logprobs, next] = (*this)(s, prev);
      lp += logprobs[t];
      s = std::move(next);
      prev = t;
    }
    return lp;
  }

  // Best complete sequence (ends in stop or has kMaxLen tokens); ties go to
  // the lexicographically smaller sequence.
  Hypothesis brute_force_best(bool length_normalize) const {
    Hypothesis best;
    bool have = false;
    std::vector<std::uint32_t> seq;
    enumerate(seq, [&](const std::vector<std::uint32_t>& s) {
      Hypothesis h{s, sequence_logprob(s)};
      if (!have || h.score(length_normalize) > best.score(length_normalize)) {
        best = h;
        have = true;
      }
    });
    return best;
  }

 private:
  template <typename Fn>
  void enumerate(std::vector<std::uint32_t>& prefix, Fn&& visit) const {
    for (std::uint32_t v = 0; v < kVocab; ++v) {
      prefix.push_back(v);
      if (v == kStop || prefix.size() == kMaxLen) {
        visit(prefix);
      } else {
        enumerate(prefix, visit);
      }
      prefix.pop_back();
    }
  }

  std::uint64_t seed_;
};

}  // namespace advse::testing

#endif  // ADVSE_TESTS_TOY_LM_HPP_
