// Copyright 2026 The CvxFit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>

#include "cvxfit/core.hpp"

namespace cvxfit {

using ParamVector = Eigen::VectorXd;

// Flat parameter order, fixed by contract:
//   for k in 0..K: [ c_k (D scalars), delta_k, for h in 0..H: raw normal (D), offset ]
// Total length K * (D + 1 + H * (D + 1)).
template <int D>
struct ParamLayout {
  int num_elements = 0;       // K
  int planes_per_element = 0; // H

  int element_stride() const { return D + 1 + planes_per_element * (D + 1); }
  int size() const { return num_elements * element_stride(); }

  int translation_offset(int k) const { return k * element_stride(); }
  int delta_offset(int k) const { return k * element_stride() + D; }
  int plane_offset(int k, int h) const {
    return k * element_stride() + D + 1 + h * (D + 1);
  }

  static ParamLayout of(const Decomposition<D>& dec) {
    return {dec.num_elements(), dec.planes_per_element()};
  }
};

template <int D>
ParamVector pack(const Decomposition<D>& dec) {
  const auto layout = ParamLayout<D>::of(dec);
  ParamVector v(layout.size());
  for (int k = 0; k < layout.num_elements; ++k) {
    const auto& e = dec.elements[k];
    v.segment<D>(layout.translation_offset(k)) = e.translation;
    v[layout.delta_offset(k)] = e.delta;
    for (int h = 0; h < layout.planes_per_element; ++h) {
      const int off = layout.plane_offset(k, h);
      v.segment<D>(off) = e.planes[h].normal_raw;
      v[off + D] = e.planes[h].offset;
    }
  }
  return v;
}

template <int D>
void unpack(const ParamVector& v, Decomposition<D>* dec) {
  const auto layout = ParamLayout<D>::of(*dec);
  if (v.size() != layout.size()) {
    throw std::invalid_argument("parameter vector size mismatch");
  }
  for (int k = 0; k < layout.num_elements; ++k) {
    auto& e = dec->elements[k];
    e.translation = v.segment<D>(layout.translation_offset(k));
    e.delta = v[layout.delta_offset(k)];
    for (int h = 0; h < layout.planes_per_element; ++h) {
      const int off = layout.plane_offset(k, h);
      e.planes[h].normal_raw = v.segment<D>(off);
      e.planes[h].offset = v[off + D];
    }
  }
}

}  // namespace cvxfit
