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

// Answer-driven focusing attention and the attention state update.
//
// Per turn t, with regions I (K x d_v) and previous state att_{t-1}:
//
//   alpha   = softmax(w_F^q . (W_Q Qg ⊙ W_I^q i_k) [+ Gumbel noise in training])
//   P       = 1[(alpha - min) / (max - min) > gamma]
//   M       = P | 1 - P | 1   for YES | NO | N/A
//   att^q   = masked_softmax(Norm(M ⊙ att_{t-1}) / tau, M)
//   att^h   = softmax(w_F^H . (W_H H_t ⊙ W_I^H i_k))
//   att_t   = att^q + att^h
//
// Qg is the two-glimpse summary of the question word states and tau is
// exp(rho) for a learned rho.

#ifndef ADVSE_ADFA_HPP_
#define ADVSE_ADFA_HPP_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "advse/model_config.hpp"
#include "advse/nn.hpp"
#include "advse/world.hpp"

namespace advse {

struct AdfaParams {
  std::array<Parameter*, 2> glimpse{};    // d_h each
  Parameter* question_proj = nullptr;     // d_att x 2 d_h
  Parameter* region_proj_q = nullptr;     // d_att x d_v
  Parameter* fuse_q = nullptr;            // d_att
  Parameter* history_proj = nullptr;      // d_att x d_h
  Parameter* region_proj_h = nullptr;     // d_att x d_v
  Parameter* fuse_h = nullptr;            // d_att
  Parameter* log_tau = nullptr;           // 1, zero-initialized
};

AdfaParams add_adfa(ParameterStore& store, const ModelConfig& config,
                    const std::string& prefix);

// Concatenation of two attention-weighted sums of the word states (2 d_h).
Tensor question_glimpse(Tape& tape, const Tensor& per_word, const AdfaParams& params);

// W x_k for every region row; computed once per scene.
Tensor project_regions(Tape& tape, const Tensor& regions, Parameter& weight);

// `projected` is project_regions(I, region_proj_q).
Tensor question_attention(Tape& tape, const Tensor& glimpse, const Tensor& projected,
                          const AdfaParams& params, Mode mode, std::uint64_t seed);

std::vector<std::uint8_t> sharpen(std::span<const double> alpha, double gamma);

std::vector<std::uint8_t> answer_mask(std::span<const std::uint8_t> p, world::Answer a);

// softmax(Norm(mask_values ⊙ att_prev) / exp(log_tau)) restricted to
// coordinates where support != 0.
Tensor focus_update(const Tensor& mask_values, std::span<const std::uint8_t> support,
                    const Tensor& att_prev, const Tensor& log_tau, FocusNorm norm);

// focus_update with the binary mask M as both values and support.
Tensor update_focus(Tape& tape, std::span<const std::uint8_t> m, const Tensor& att_prev,
                    const Tensor& log_tau, FocusNorm norm = FocusNorm::kL1);

// `projected` is project_regions(I, region_proj_h).
Tensor history_attention(Tape& tape, const Tensor& history, const Tensor& projected,
                         const AdfaParams& params);

Tensor combine(const Tensor& att_q, const Tensor& att_h);

struct FocusResult {
  Tensor alpha;                    // K
  std::vector<std::uint8_t> p;     // empty when sharpening is ablated
  std::vector<std::uint8_t> m;     // empty when sharpening is ablated
  Tensor att_q;                    // K
};

// Question attention through the focus update for one answered question,
// honouring the sharpening ablation and the straight-through option.
FocusResult answer_driven_focus(Tape& tape, const Tensor& per_word, world::Answer answer,
                                const Tensor& att_prev, const Tensor& projected_q,
                                const AdfaParams& params, const ModelConfig& config,
                                Mode mode, std::uint64_t seed);

}  // namespace advse

#endif  // ADVSE_ADFA_HPP_
