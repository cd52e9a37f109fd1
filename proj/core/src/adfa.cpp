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

#include "advse/adfa.hpp"

#include <algorithm>

#include "advse/error.hpp"

namespace advse {

AdfaParams add_adfa(ParameterStore& store, const ModelConfig& config,
                    const std::string& prefix) {
  const std::size_t dh = config.hidden_dim;
  const std::size_t da = config.attention_dim;
  const std::size_t dv = config.visual_dim;
  AdfaParams p;
  p.glimpse[0] = &store.add(prefix + ".glimpse0", {dh});
  p.glimpse[1] = &store.add(prefix + ".glimpse1", {dh});
  p.question_proj = &store.add(prefix + ".question_proj", {da, 2 * dh});
  p.region_proj_q = &store.add(prefix + ".region_proj_q", {da, dv});
  p.fuse_q = &store.add(prefix + ".fuse_q", {da});
  p.history_proj = &store.add(prefix + ".history_proj", {da, dh});
  p.region_proj_h = &store.add(prefix + ".region_proj_h", {da, dv});
  p.fuse_h = &store.add(prefix + ".fuse_h", {da});
  p.log_tau = &store.add(prefix + ".log_tau", {1}, Init::kZero);
  return p;
}

Tensor question_glimpse(Tape& tape, const Tensor& per_word, const AdfaParams& params) {
  std::array<Tensor, 2> parts;
  for (std::size_t g = 0; g < 2; ++g) {
    const Tensor logits = matmul(per_word, tape.parameter(*params.glimpse[g]));
    parts[g] = weighted_sum(softmax(logits), per_word);
  }
  return concat(parts);
}

Tensor project_regions(Tape& tape, const Tensor& regions, Parameter& weight) {
  return linear(tape.parameter(weight), regions);
}

Tensor question_attention(Tape& tape, const Tensor& glimpse, const Tensor& projected,
                          const AdfaParams& params, Mode mode, std::uint64_t seed) {
  const Tensor q = linear(tape.parameter(*params.question_proj), glimpse);
  const Tensor logits = matmul(row_hadamard(projected, q), tape.parameter(*params.fuse_q));
  return softmax(gumbel_perturb(logits, seed, mode));
}

std::vector<std::uint8_t> sharpen(std::span<const double> alpha, double gamma) {
  std::vector<std::uint8_t> p(alpha.size(), 1);
  if (alpha.empty()) return p;
  const auto [lo, hi] = std::minmax_element(alpha.begin(), alpha.end());
  const double range = *hi - *lo;
  if (range < 1e-12) return p;
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    p[k] = (alpha[k] - *lo) / range > gamma ? 1 : 0;
  }
  return p;
}

std::vector<std::uint8_t> answer_mask(std::span<const std::uint8_t> p, world::Answer a) {
  std::vector<std::uint8_t> m(p.size(), 1);
  if (a == world::Answer::kNa) return m;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const std::uint8_t bit = p[k] != 0 ? 1 : 0;
    m[k] = a == world::Answer::kYes ? bit : static_cast<std::uint8_t>(1 - bit);
  }
  return m;
}

Tensor focus_update(const Tensor& mask_values, std::span<const std::uint8_t> support,
                    const Tensor& att_prev, const Tensor& log_tau, FocusNorm norm) {
  const Tensor z = hadamard(mask_values, att_prev);
  const Tensor normed = norm == FocusNorm::kL1 ? l1_normalize(z) : l2_normalize(z);
  const Tensor inv_tau = exp(scale(log_tau, -1.0));
  return masked_softmax(mul_scalar(normed, inv_tau), support);
}

Tensor update_focus(Tape& tape, std::span<const std::uint8_t> m, const Tensor& att_prev,
                    const Tensor& log_tau, FocusNorm norm) {
  const Tensor values = tape.constant({m.size()}, std::vector<double>(m.begin(), m.end()));
  return focus_update(values, m, att_prev, log_tau, norm);
}

Tensor history_attention(Tape& tape, const Tensor& history, const Tensor& projected,
                         const AdfaParams& params) {
  const Tensor h = linear(tape.parameter(*params.history_proj), history);
  return softmax(matmul(row_hadamard(projected, h), tape.parameter(*params.fuse_h)));
}

Tensor combine(const Tensor& att_q, const Tensor& att_h) { return add(att_q, att_h); }

FocusResult answer_driven_focus(Tape& tape, const Tensor& per_word, world::Answer answer,
                                const Tensor& att_prev, const Tensor& projected_q,
                                const AdfaParams& params, const ModelConfig& config,
                                Mode mode, std::uint64_t seed) {
  FocusResult r;
  const Tensor glimpse = question_glimpse(tape, per_word, params);
  r.alpha = question_attention(tape, glimpse, projected_q, params, mode, seed);
  const Tensor log_tau = tape.parameter(*params.log_tau);
  const std::size_t k = r.alpha.size();

  if (config.ablation.no_sharpen) {
    const std::vector<std::uint8_t> all(k, 1);
    Tensor values;
    switch (answer) {
      case world::Answer::kYes: values = r.alpha; break;
      case world::Answer::kNo: values = one_minus(r.alpha); break;
      case world::Answer::kNa: values = tape.constant({k}, std::vector<double>(k, 1.0)); break;
    }
    r.att_q = focus_update(values, all, att_prev, log_tau, config.focus_norm);
    return r;
  }

  r.p = sharpen(r.alpha.values(), config.gamma);
  r.m = answer_mask(r.p, answer);
  // A NO to a degenerate (all-ones) P leaves no survivors; treat it as neutral.
  if (std::none_of(r.m.begin(), r.m.end(), [](std::uint8_t b) { return b != 0; })) {
    std::fill(r.m.begin(), r.m.end(), 1);
  }
  if (!config.straight_through || answer == world::Answer::kNa) {
    r.att_q = update_focus(tape, r.m, att_prev, log_tau, config.focus_norm);
    return r;
  }
  // Value exactly P, gradient of alpha.
  const Tensor p_const = tape.constant({k}, std::vector<double>(r.p.begin(), r.p.end()));
  const Tensor p_st = add(sub(r.alpha, detach(r.alpha)), p_const);
  const Tensor values = answer == world::Answer::kYes ? p_st : one_minus(p_st);
  r.att_q = focus_update(values, r.m, att_prev, log_tau, config.focus_norm);
  return r;
}

}  // namespace advse
