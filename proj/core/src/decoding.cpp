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

#include "advse/decoding.hpp"

namespace advse {

DecodeStrategy parse_strategy(std::string_view name, std::size_t beam_width,
                              std::uint64_t seed) {
  if (name == "greedy") return DecodeStrategy::greedy();
  if (name == "sample") return DecodeStrategy::sample(seed);
  if (name == "beam") {
    if (beam_width == 0) throw ConfigError("beam width must be >= 1");
    return DecodeStrategy::beam(beam_width);
  }
  throw ConfigError("unknown decoding strategy '" + std::string(name) +
                    "' (expected greedy, sample or beam)");
}

std::string to_string(const DecodeStrategy& s) {
  switch (s.kind) {
    case DecodeKind::kGreedy: return "greedy";
    case DecodeKind::kSample: return "sample";
    case DecodeKind::kBeam: return "beam" + std::to_string(s.beam_width);
  }
  return "unknown";
}

std::vector<double> log_softmax(const std::vector<double>& logits) {
  if (logits.empty()) return {};
  const double mx = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double v : logits) total += std::exp(v - mx);
  const double lse = mx + std::log(total);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
  return out;
}

}  // namespace advse
