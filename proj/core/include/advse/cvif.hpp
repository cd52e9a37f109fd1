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

// Conditional visual information fusion:
//
//   s       = argmax_k att_k                 (lowest index on ties)
//   D       = [i_s - i_k]_k
//   D_att   = sum_k att_k D_k,   I_att = sum_k att_k i_k
//   lambda  = softmax(W_p P_t)[0]            (P_t from encode_qa_pair)
//   V_t     = lambda D_att + (1 - lambda) I_att

#ifndef ADVSE_CVIF_HPP_
#define ADVSE_CVIF_HPP_

#include <span>
#include <string>

#include "advse/model_config.hpp"
#include "advse/nn.hpp"

namespace advse {

struct CvifParams {
  Parameter* condition = nullptr;  // 2 x d_h
};

CvifParams add_cvif(ParameterStore& store, const ModelConfig& config,
                    const std::string& prefix);

std::size_t select_focus(std::span<const double> att);

Tensor difference_features(const Tensor& regions, std::size_t selected);

Tensor attend(const Tensor& features, const Tensor& att);

// Single-element tensor holding lambda.
Tensor condition_factor(Tape& tape, const Tensor& pair_encoding, const CvifParams& params);

Tensor fuse(const Tensor& d_att, const Tensor& i_att, const Tensor& lambda);

struct VisualState {
  Tensor v;       // d_v
  Tensor lambda;  // undefined when CVIF is ablated
  std::size_t selected = 0;
};

// Full fusion for one turn; with the CVIF ablation V_t = I_att.
VisualState fuse_visual(Tape& tape, const Tensor& regions, const Tensor& att,
                        const Tensor& pair_encoding, const CvifParams& params,
                        const ModelConfig& config);

}  // namespace advse

#endif  // ADVSE_CVIF_HPP_
