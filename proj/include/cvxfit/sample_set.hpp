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

#include <cstdint>
#include <vector>

#include "cvxfit/core.hpp"

namespace cvxfit {

enum class SampleSource { kVolume, kNearSurface };

/// Labeled points with their ground-truth occupancy. The source tag decides
/// the per-sample weight applied to the approximation loss.
template <int D>
struct SampleSet {
  std::vector<Vec<D>> points;
  std::vector<double> labels;  // occupancy in {0,1}
  SampleSource source = SampleSource::kVolume;
  std::uint64_t seed = 0;

  int size() const { return static_cast<int>(points.size()); }
  bool empty() const { return points.empty(); }
};

/// The label-1 subset, preserving order. Used as the interior bank for the
/// guidance and localization losses.
template <int D>
SampleSet<D> interior_subset(const SampleSet<D>& s) {
  SampleSet<D> out;
  out.source = s.source;
  out.seed = s.seed;
  for (int i = 0; i < s.size(); ++i) {
    if (s.labels[i] == 1.0) {
      out.points.push_back(s.points[i]);
      out.labels.push_back(1.0);
    }
  }
  return out;
}

}  // namespace cvxfit
