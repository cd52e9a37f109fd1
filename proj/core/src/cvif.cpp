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

#include "advse/cvif.hpp"

#include "advse/error.hpp"

namespace advse {

CvifParams add_cvif(ParameterStore& store, const ModelConfig& config,
                    const std::string& prefix) {
  return {&store.add(prefix + ".condition", {2, config.hidden_dim})};
}

std::size_t select_focus(std::span<const double> att) {
  if (att.empty()) throw ShapeError("select_focus: empty attention");
  std::size_t best = 0;
  for (std::size_t k = 1; k < att.size(); ++k) {
    if (att[k] > att[best]) best = k;
  }
  return best;
}

Tensor difference_features(const Tensor& regions, std::size_t selected) {
  return row_difference(regions, selected);
}

Tensor attend(const Tensor& features, const Tensor& att) {
  return weighted_sum(att, features);
}

Tensor condition_factor(Tape& tape, const Tensor& pair_encoding, const CvifParams& params) {
  return select(softmax(matmul(tape.parameter(*params.condition), pair_encoding)), 0);
}

Tensor fuse(const Tensor& d_att, const Tensor& i_att, const Tensor& lambda) {
  return add(mul_scalar(d_att, lambda), mul_scalar(i_att, one_minus(lambda)));
}

VisualState fuse_visual(Tape& tape, const Tensor& regions, const Tensor& att,
                        const Tensor& pair_encoding, const CvifParams& params,
                        const ModelConfig& config) {
  const Tensor weights = config.normalize_fusion_attention ? l1_normalize(att) : att;
  VisualState s;
  s.selected = select_focus(att.values());
  const Tensor i_att = attend(regions, weights);
  if (config.ablation.no_cvif) {
    s.v = i_att;
    return s;
  }
  const Tensor d_att = attend(difference_features(regions, s.selected), weights);
  s.lambda = condition_factor(tape, pair_encoding, params);
  s.v = fuse(d_att, i_att, s.lambda);
  return s;
}

}  // namespace advse
