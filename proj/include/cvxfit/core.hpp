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

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace cvxfit {

template <int D>
using Vec = Eigen::Matrix<double, D, 1>;

inline constexpr double kMinRawNormalNorm = 1e-12;
inline constexpr double kMinDelta = 1e-3;

/// One half-space constraint {x : n·x + d <= 0}. The stored normal is an
/// unconstrained parameter; the effective normal is its normalization, so
/// gradient steps cannot break the unit-length requirement.
template <int D>
struct Hyperplane {
  Vec<D> normal_raw = Vec<D>::Zero();
  double offset = 0.0;

  Vec<D> unit_normal() const {
    const double n = normal_raw.norm();
    return normal_raw / n;
  }

  /// n·x + d with n the normalized stored normal. Negative inside.
  double signed_distance(const Vec<D>& x) const {
    return unit_normal().dot(x) + offset;
  }
};

/// A smooth convex: H half-spaces, a smoothness delta, and a translation c
/// mapping world to local coordinates as x_local = x + c.
template <int D>
struct ConvexElement {
  std::vector<Hyperplane<D>> planes;
  double delta = 1.0;
  Vec<D> translation = Vec<D>::Zero();

  int num_planes() const { return static_cast<int>(planes.size()); }
};

/// A union of K convex elements sharing one plane-count template, plus the
/// global indicator sharpness sigma (a hyperparameter, not trainable).
template <int D>
struct Decomposition {
  std::vector<ConvexElement<D>> elements;
  double sigma = 75.0;
  // When true the smooth max carries a 1/delta factor so it approximates
  // max_h H_h in world units regardless of delta. The raw variant (log-sum-exp
  // of delta*H with no outer division) is kept selectable.
  bool normalized_logsumexp = true;

  int num_elements() const { return static_cast<int>(elements.size()); }
  int planes_per_element() const {
    return elements.empty() ? 0 : elements.front().num_planes();
  }
};

inline double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// Exact polytope constraint violation max_h H_h(x_local). Negative inside.
template <int D>
double hard_sdf(const ConvexElement<D>& e, const Vec<D>& x_world) {
  const Vec<D> x = x_world + e.translation;
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& p : e.planes) m = std::max(m, p.signed_distance(x));
  return m;
}

/// Smooth approximate SDF. Normalized form:
///   Phi(x) = max_h H_h + log(sum_h exp(delta * (H_h - max_h H_h))) / delta
/// which is algebraically (1/delta) * LogSumExp{delta * H_h} but organized so
/// that Phi >= max_h H_h holds exactly in floating point and no overflow can
/// occur. The unnormalized form drops the 1/delta factor.
template <int D>
double smooth_sdf(const ConvexElement<D>& e, const Vec<D>& x_world,
                  bool normalized = true) {
  const Vec<D> x = x_world + e.translation;
  const int h_count = e.num_planes();
  double mx = -std::numeric_limits<double>::infinity();
  double dist[64];
  std::vector<double> heap_dist;
  double* d = dist;
  if (h_count > 64) {
    heap_dist.resize(h_count);
    d = heap_dist.data();
  }
  for (int h = 0; h < h_count; ++h) {
    d[h] = e.planes[h].signed_distance(x);
    mx = std::max(mx, d[h]);
  }
  double s = 0.0;
  for (int h = 0; h < h_count; ++h) s += std::exp(e.delta * (d[h] - mx));
  const double lse = std::log(s);
  if (normalized) return mx + lse / e.delta;
  return e.delta * mx + lse;
}

/// Indicator C(x) = Sigmoid(-sigma * Phi(x)), in (0, 1); 0.5 where Phi = 0.
template <int D>
double indicator(const ConvexElement<D>& e, const Vec<D>& x_world, double sigma,
                 bool normalized = true) {
  return sigmoid(-sigma * smooth_sdf(e, x_world, normalized));
}

template <int D>
double min_smooth_sdf(const Decomposition<D>& dec, const Vec<D>& x_world) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& e : dec.elements) {
    m = std::min(m, smooth_sdf(e, x_world, dec.normalized_logsumexp));
  }
  return m;
}

/// Union of indicators O^(x) = max_k C_k(x). Identical (bit for bit) to
/// Sigmoid(-sigma * min_k Phi_k) since max commutes with monotone maps.
template <int D>
double union_indicator(const Decomposition<D>& dec, const Vec<D>& x_world) {
  if (dec.elements.empty()) throw std::invalid_argument("empty decomposition");
  double m = 0.0;
  for (const auto& e : dec.elements) {
    m = std::max(m, indicator(e, x_world, dec.sigma, dec.normalized_logsumexp));
  }
  return m;
}

}  // namespace cvxfit
