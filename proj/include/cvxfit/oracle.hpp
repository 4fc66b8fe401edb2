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

#include <functional>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "cvxfit/csg.hpp"
#include "cvxfit/grid.hpp"
#include "cvxfit/mesh.hpp"
#include "cvxfit/rng.hpp"
#include "cvxfit/sample_set.hpp"

namespace cvxfit {

/// Ground-truth occupancy O(x) in {0,1} over a bounding box, with optional
/// access to the surface for near-surface sampling. Immutable after
/// construction; queries are safe to run concurrently.
template <int D>
struct TargetOracle {
  std::function<bool(const Vec<D>&)> inside;
  Vec<D> box_lo = Vec<D>::Zero();
  Vec<D> box_hi = Vec<D>::Zero();
  // Empty when the target exposes no surface (plain occupancy grids).
  std::function<std::vector<Vec<D>>(int, std::uint64_t)> surface_samples;

  double bbox_diagonal() const { return (box_hi - box_lo).norm(); }
  bool has_surface() const { return static_cast<bool>(surface_samples); }
};

inline TargetOracle<3> make_csg_oracle(std::shared_ptr<CsgSolid> solid,
                                       double bbox_margin = 0.1) {
  TargetOracle<3> o;
  const Aabb3 b = solid->primitive_bounds().inflated(bbox_margin);
  o.box_lo = b.lo;
  o.box_hi = b.hi;
  o.inside = [solid](const Vec<3>& x) { return solid->inside(x); };
  o.surface_samples = [solid](int n, std::uint64_t seed) {
    return solid->surface_samples(n, seed);
  };
  return o;
}

inline TargetOracle<3> make_mesh_oracle(std::shared_ptr<TriMesh> mesh,
                                        double bbox_margin = 0.1) {
  if (!mesh_watertight(*mesh)) {
    throw std::runtime_error(
        "mesh oracle requires a watertight mesh (open or non-manifold edges "
        "detected)");
  }
  TargetOracle<3> o;
  const Aabb3 b = mesh_bounds(*mesh).inflated(bbox_margin);
  o.box_lo = b.lo;
  o.box_hi = b.hi;
  o.inside = [mesh](const Vec<3>& x) { return point_in_mesh(*mesh, x); };
  o.surface_samples = [mesh](int n, std::uint64_t seed) {
    return mesh_surface_samples(*mesh, n, seed);
  };
  return o;
}

inline TargetOracle<3> make_grid_oracle(std::shared_ptr<OccupancyGrid> grid) {
  TargetOracle<3> o;
  o.box_lo = grid->bounds.lo;
  o.box_hi = grid->bounds.hi;
  o.inside = [grid](const Vec<3>& x) { return grid->inside(x); };
  // No surface_samples: grids carry no explicit surface.
  return o;
}

inline TargetOracle<2> make_image_oracle(std::shared_ptr<BinaryImage> image) {
  TargetOracle<2> o;
  o.box_lo = Vec<2>(-0.5, -0.5);
  o.box_hi = Vec<2>(0.5, 0.5);
  o.inside = [image](const Vec<2>& x) { return image->inside(x); };
  auto contour =
      std::make_shared<std::vector<Vec<2>>>(image->contour_edge_midpoints());
  if (!contour->empty()) {
    o.surface_samples = [contour](int n, std::uint64_t seed) {
      Rng rng(combine_seeds(seed, 0x2dU));
      std::vector<Vec<2>> out;
      out.reserve(n);
      for (int i = 0; i < n; ++i) {
        out.push_back((*contour)[rng.uniform_index(contour->size())]);
      }
      return out;
    };
  }
  return o;
}

inline double oracle_eval(const TargetOracle<2>& o, const Vec<2>& x) {
  return o.inside(x) ? 1.0 : 0.0;
}
inline double oracle_eval(const TargetOracle<3>& o, const Vec<3>& x) {
  return o.inside(x) ? 1.0 : 0.0;
}

/// n uniform points in the bounding box, labeled by the oracle.
template <int D>
SampleSet<D> sample_volume(const TargetOracle<D>& o, int n,
                           std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_volume: n must be >= 1");
  Rng rng(combine_seeds(seed, 0xA1U));
  SampleSet<D> s;
  s.source = SampleSource::kVolume;
  s.seed = seed;
  s.points.reserve(n);
  s.labels.reserve(n);
  for (int i = 0; i < n; ++i) {
    Vec<D> x;
    for (int d = 0; d < D; ++d) x[d] = rng.uniform(o.box_lo[d], o.box_hi[d]);
    s.points.push_back(x);
    s.labels.push_back(o.inside(x) ? 1.0 : 0.0);
  }
  return s;
}

/// n points uniform on the surface, perturbed with isotropic Gaussian noise.
template <int D>
SampleSet<D> sample_near_surface(const TargetOracle<D>& o, int n,
                                 double jitter_sigma, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_near_surface: n must be >= 1");
  if (!o.has_surface()) {
    throw std::runtime_error(
        "target exposes no surface for near-surface sampling; convert the "
        "grid to a mesh first (see the mc command)");
  }
  auto pts = o.surface_samples(n, combine_seeds(seed, 0xB2U));
  Rng rng(combine_seeds(seed, 0xB3U));
  SampleSet<D> s;
  s.source = SampleSource::kNearSurface;
  s.seed = seed;
  s.points.reserve(n);
  s.labels.reserve(n);
  for (int i = 0; i < n; ++i) {
    Vec<D> x = pts[i];
    for (int d = 0; d < D; ++d) x[d] += jitter_sigma * rng.normal();
    s.points.push_back(x);
    s.labels.push_back(o.inside(x) ? 1.0 : 0.0);
  }
  return s;
}

/// n rows drawn without replacement, deterministic per (bank.seed, step_seed).
template <int D>
SampleSet<D> subsample(const SampleSet<D>& bank, int n,
                       std::uint64_t step_seed) {
  if (n > bank.size()) {
    throw std::invalid_argument("subsample: n exceeds bank size");
  }
  Rng rng(combine_seeds(bank.seed, step_seed));
  std::vector<int> idx(bank.size());
  std::iota(idx.begin(), idx.end(), 0);
  SampleSet<D> s;
  s.source = bank.source;
  s.seed = combine_seeds(bank.seed, step_seed);
  s.points.reserve(n);
  s.labels.reserve(n);
  for (int i = 0; i < n; ++i) {
    // partial Fisher-Yates
    const auto j = i + rng.uniform_index(bank.size() - i);
    std::swap(idx[i], idx[j]);
    s.points.push_back(bank.points[idx[i]]);
    s.labels.push_back(bank.labels[idx[i]]);
  }
  return s;
}

}  // namespace cvxfit
