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

// Model-agnostic sequence decoders.
//
// A step function maps (state, previous token) to (log-probabilities over
// the vocabulary, next state). A hypothesis ends when it emits `stop` (which
// is kept in its token list) or reaches `max_len` tokens.

#ifndef ADVSE_DECODING_HPP_
#define ADVSE_DECODING_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "advse/error.hpp"

namespace advse {

enum class DecodeKind { kGreedy, kSample, kBeam };

struct DecodeStrategy {
  DecodeKind kind = DecodeKind::kGreedy;
  std::uint64_t seed = 0;        // kSample
  std::size_t beam_width = 20;   // kBeam
  bool length_normalize = true;  // kBeam

  static DecodeStrategy greedy() { return {}; }
  static DecodeStrategy sample(std::uint64_t seed) { return {DecodeKind::kSample, seed}; }
  static DecodeStrategy beam(std::size_t width, bool normalize = true) {
    return {DecodeKind::kBeam, 0, width, normalize};
  }
};

// "greedy", "sample" or "beam"; `beam_width` applies to beam.
DecodeStrategy parse_strategy(std::string_view name, std::size_t beam_width = 20,
                              std::uint64_t seed = 0);
std::string to_string(const DecodeStrategy& s);

struct Hypothesis {
  std::vector<std::uint32_t> tokens;
  double logprob = 0.0;

  double score(bool length_normalize) const {
    if (!length_normalize || tokens.empty()) return logprob;
    return logprob / static_cast<double>(tokens.size());
  }
};

// Log-softmax of raw logits.
std::vector<double> log_softmax(const std::vector<double>& logits);

namespace detail {
inline std::size_t argmax(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}
}  // namespace detail

template <typename State, typename StepFn>
Hypothesis greedy_decode(State state, StepFn&& step, std::uint32_t start, std::uint32_t stop,
                         std::size_t max_len) {
  Hypothesis h;
  std::uint32_t prev = start;
  while (h.tokens.size() < max_len) {
    auto [logprobs, next] = step(state, prev);
    const auto tok = static_cast<std::uint32_t>(detail::argmax(logprobs));
    h.tokens.push_back(tok);
    h.logprob += logprobs[tok];
    if (tok == stop) break;
    state = std::move(next);
    prev = tok;
  }
  return h;
}

// Draws each token from the step distribution.
template <typename State, typename StepFn>
Hypothesis sample_decode(State state, StepFn&& step, std::uint32_t start, std::uint32_t stop,
                         std::size_t max_len, std::mt19937_64& rng) {
  Hypothesis h;
  std::uint32_t prev = start;
  while (h.tokens.size() < max_len) {
    auto [logprobs, next] = step(state, prev);
    std::vector<double> probs(logprobs.size());
    std::transform(logprobs.begin(), logprobs.end(), probs.begin(),
                   [](double lp) { return std::exp(lp); });
    std::discrete_distribution<std::size_t> dist(probs.begin(), probs.end());
    const auto tok = static_cast<std::uint32_t>(dist(rng));
    h.tokens.push_back(tok);
    h.logprob += logprobs[tok];
    if (tok == stop) break;
    state = std::move(next);
    prev = tok;
  }
  return h;
}

// Keeps the `width` best partial hypotheses per step by cumulative
// log-probability; the final choice maximizes Hypothesis::score over every
// finished hypothesis plus the greedy one, ties to the earlier finisher.
template <typename State, typename StepFn>
Hypothesis beam_decode(const State& init, StepFn&& step, std::uint32_t start,
                       std::uint32_t stop, std::size_t max_len, std::size_t width,
                       bool length_normalize) {
  if (width == 0) throw Error("beam_decode: width must be >= 1");
  struct Beam {
    Hypothesis hyp;
    State state;
    std::uint32_t prev;
  };
  struct Candidate {
    std::size_t beam;
    std::uint32_t token;
    double logprob;
  };

  std::vector<Hypothesis> finished;
  std::vector<Beam> beams;
  beams.push_back({Hypothesis{}, init, start});
  for (std::size_t len = 0; len < max_len && !beams.empty(); ++len) {
    std::vector<State> next_states;
    std::vector<Candidate> cands;
    next_states.reserve(beams.size());
    for (std::size_t b = 0; b < beams.size(); ++b) {
      auto [logprobs, next] = step(beams[b].state, beams[b].prev);
      next_states.push_back(std::move(next));
      for (std::size_t v = 0; v < logprobs.size(); ++v) {
        cands.push_back({b, static_cast<std::uint32_t>(v), beams[b].hyp.logprob + logprobs[v]});
      }
    }
    std::stable_sort(cands.begin(), cands.end(),
                     [](const Candidate& a, const Candidate& b) { return a.logprob > b.logprob; });
    if (cands.size() > width) cands.resize(width);
    std::vector<Beam> survivors;
    for (const Candidate& c : cands) {
      Hypothesis h = beams[c.beam].hyp;
      h.tokens.push_back(c.token);
      h.logprob = c.logprob;
      if (c.token == stop || h.tokens.size() == max_len) {
        finished.push_back(std::move(h));
      } else {
        survivors.push_back({std::move(h), next_states[c.beam], c.token});
      }
    }
    beams = std::move(survivors);
  }

  finished.push_back(greedy_decode(init, step, start, stop, max_len));
  std::size_t best = 0;
  for (std::size_t i = 1; i < finished.size(); ++i) {
    if (finished[i].score(length_normalize) > finished[best].score(length_normalize)) best = i;
  }
  return finished[best];
}

}  // namespace advse

#endif  // ADVSE_DECODING_HPP_
