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

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cvxfit/losses.hpp"
#include "cvxfit/metrics.hpp"
#include "cvxfit/oracle.hpp"
#include "cvxfit/params.hpp"

namespace cvxfit {

struct FitConfig {
  int num_elements = 1;        // K
  int planes_per_element = 6;  // H
  int iters = 10000;
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_adam = 1e-8;
  double sigma = 75.0;
  LossWeights weights;
  int batch_volume = 1024;
  int batch_surface = 1024;
  std::uint64_t seed = 0;

  int bank_volume = 100000;
  int bank_surface = 100000;
  int interior_bank_size = 4096;  // guidance/localization selection pool
  double init_radius_rel = 0.05;  // seed radius, fraction of bbox diagonal
  double jitter_rel = 0.005;  // near-surface jitter, fraction of bbox diagonal
  int eval_every = 1000;      // periodic IoU cadence; 0 disables
  int eval_samples = 20000;
  bool learn_delta = true;
  bool normalized_logsumexp = true;
  double divergence_abort = 1e8;
};

struct AdamState {
  ParamVector first_moment;
  ParamVector second_moment;
  long step = 0;

  static AdamState zeros(int size) {
    AdamState s;
    s.first_moment = ParamVector::Zero(size);
    s.second_moment = ParamVector::Zero(size);
    return s;
  }
};

struct FitRecord {
  int step = 0;
  LossTerms terms;
  std::optional<double> iou;
};

struct FitReport {
  std::vector<FitRecord> records;
  std::vector<std::string> config_overrides;  // echoed non-default flags
  double final_iou = 0.0;
  bool diverged = false;
  std::string error;
};

/// Bias-corrected Adam update followed by the parameter constraints: delta is
/// clamped positive and raw normals that underflow are re-seeded to a fresh
/// unit direction.
template <int D>
void adam_step(AdamState* state, ParamVector* params, const ParamVector& grad,
               const FitConfig& cfg, const ParamLayout<D>& layout) {
  if (!grad.allFinite()) {
    throw std::runtime_error("adam_step: non-finite gradient");
  }
  if (grad.size() != params->size()) {
    throw std::invalid_argument("adam_step: shape mismatch");
  }
  ParamVector g = grad;
  if (!cfg.learn_delta) {
    for (int k = 0; k < layout.num_elements; ++k) g[layout.delta_offset(k)] = 0;
  }
  state->step += 1;
  state->first_moment = cfg.beta1 * state->first_moment + (1.0 - cfg.beta1) * g;
  state->second_moment = cfg.beta2 * state->second_moment +
                         (1.0 - cfg.beta2) * g.cwiseProduct(g);
  const double c1 = 1.0 - std::pow(cfg.beta1, state->step);
  const double c2 = 1.0 - std::pow(cfg.beta2, state->step);
  for (int i = 0; i < params->size(); ++i) {
    const double m_hat = state->first_moment[i] / c1;
    const double v_hat = state->second_moment[i] / c2;
    (*params)[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps_adam);
  }
  for (int k = 0; k < layout.num_elements; ++k) {
    double& delta = (*params)[layout.delta_offset(k)];
    if (delta < kMinDelta) delta = kMinDelta;
    for (int h = 0; h < layout.planes_per_element; ++h) {
      auto raw = params->segment<D>(layout.plane_offset(k, h));
      if (raw.norm() < kMinRawNormalNorm) {
        Rng rng(combine_seeds(cfg.seed ^ static_cast<std::uint64_t>(state->step),
                              static_cast<std::uint64_t>(k * 1000 + h)));
        raw = rng.unit_vector<D>();
      }
    }
  }
}

namespace detail {

// Evenly spread unit directions (golden-angle spiral in 3D, uniform angles in
// 2D); H of them bound space for H >= d+1, unlike independent random draws.
template <int D>
Vec<D> spread_direction(int h, int h_count);

template <>
inline Vec<2> spread_direction<2>(int h, int h_count) {
  const double a = 2.0 * M_PI * h / h_count;
  return Vec<2>(std::cos(a), std::sin(a));
}

template <>
inline Vec<3> spread_direction<3>(int h, int h_count) {
  // Octahedron axes, then cube diagonals, then edge midpoints (26 canonical
  // directions); beyond that a golden-angle spiral.
  static const auto canonical = [] {
    std::vector<Vec<3>> dirs;
    for (int a = 0; a < 3; ++a) {
      for (int s : {1, -1}) {
        Vec<3> v = Vec<3>::Zero();
        v[a] = s;
        dirs.push_back(v);
      }
    }
    for (int sx : {1, -1})
      for (int sy : {1, -1})
        for (int sz : {1, -1}) dirs.push_back(Vec<3>(sx, sy, sz).normalized());
    for (int a = 0; a < 3; ++a) {
      const int b = (a + 1) % 3;
      for (int sa : {1, -1}) {
        for (int sb : {1, -1}) {
          Vec<3> v = Vec<3>::Zero();
          v[a] = sa;
          v[b] = sb;
          dirs.push_back(v.normalized());
        }
      }
    }
    return dirs;
  }();
  if (h < static_cast<int>(canonical.size())) return canonical[h];
  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  const double z = 1.0 - 2.0 * (h + 0.5) / h_count;
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  const double a = golden * h;
  return Vec<3>(r * std::cos(a), r * std::sin(a), z);
}

}  // namespace detail

/// Small sphere-like seeds placed at a farthest-point spread of interior
/// samples: normals evenly spread with a random jitter, offsets -r0 with
/// r0 = 5% of the bbox diagonal, delta = 10 / r0.
template <int D>
Decomposition<D> init_decomposition_from_interior(
    const std::vector<Vec<D>>& interior_points, const TargetOracle<D>& oracle,
    const FitConfig& cfg) {
  if (interior_points.empty()) {
    throw std::runtime_error("init_decomposition: no interior samples");
  }
  const Vec<D> box_center = 0.5 * (oracle.box_lo + oracle.box_hi);
  // Farthest-point subsample, seeded at the interior point nearest the box
  // center.
  std::vector<int> chosen;
  {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < static_cast<int>(interior_points.size()); ++i) {
      const double d = (interior_points[i] - box_center).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    chosen.push_back(best);
  }
  while (static_cast<int>(chosen.size()) < cfg.num_elements) {
    int best = -1;
    double best_d = -1.0;
    for (int i = 0; i < static_cast<int>(interior_points.size()); ++i) {
      double d = std::numeric_limits<double>::infinity();
      for (int c : chosen) {
        d = std::min(d, (interior_points[i] - interior_points[c]).squaredNorm());
      }
      if (d > best_d) {
        best_d = d;
        best = i;
      }
    }
    chosen.push_back(best);
  }
  std::vector<Vec<D>> seeds;
  for (int c : chosen) seeds.push_back(interior_points[c]);
  // Lloyd refinement: move each seed to the centroid of its cell, so the
  // translations start near the centers their convexes will converge to.
  for (int round = 0; round < 10; ++round) {
    std::vector<Vec<D>> centroid(seeds.size(), Vec<D>::Zero());
    std::vector<int> count(seeds.size(), 0);
    for (const auto& p : interior_points) {
      int best = 0;
      double best_d = (p - seeds[0]).squaredNorm();
      for (size_t k = 1; k < seeds.size(); ++k) {
        const double d = (p - seeds[k]).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(k);
        }
      }
      centroid[best] += p;
      count[best] += 1;
    }
    for (size_t k = 0; k < seeds.size(); ++k) {
      if (count[k] > 0) seeds[k] = centroid[k] / count[k];
    }
  }

  const double r0 = cfg.init_radius_rel * oracle.bbox_diagonal();
  Rng rng(combine_seeds(cfg.seed, 0x1217U));
  Decomposition<D> dec;
  dec.sigma = cfg.sigma;
  dec.normalized_logsumexp = cfg.normalized_logsumexp;
  for (int k = 0; k < cfg.num_elements; ++k) {
    ConvexElement<D> e;
    const Vec<D> p = seeds[k];
    e.translation = p;
    e.delta = 10.0 / r0;
    for (int h = 0; h < cfg.planes_per_element; ++h) {
      Hyperplane<D> plane;
      plane.normal_raw =
          (detail::spread_direction<D>(h, cfg.planes_per_element) +
           0.05 * rng.template unit_vector<D>())
              .normalized();
      // With x_local = x + c and c = p, the seed ball sits at p in world
      // space when its local center is 2p.
      plane.offset = -r0 - 2.0 * plane.normal_raw.dot(p);
      e.planes.push_back(plane);
    }
    dec.elements.push_back(e);
  }
  return dec;
}

template <int D>
Decomposition<D> init_decomposition(const TargetOracle<D>& oracle,
                                    const FitConfig& cfg) {
  const auto probe =
      sample_volume(oracle, 10000, combine_seeds(cfg.seed, 0x1A17U));
  std::vector<Vec<D>> interior;
  for (int i = 0; i < probe.size(); ++i) {
    if (probe.labels[i] == 1.0) interior.push_back(probe.points[i]);
  }
  return init_decomposition_from_interior(interior, oracle, cfg);
}

template <int D>
double decomposition_iou(const Decomposition<D>& dec,
                         const TargetOracle<D>& oracle, int n,
                         std::uint64_t seed) {
  return volumetric_iou<D>(
      [&](const Vec<D>& x) { return union_indicator(dec, x); },
      [&](const Vec<D>& x) { return oracle_eval(oracle, x); }, oracle.box_lo,
      oracle.box_hi, n, seed);
}

struct FitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <int D>
struct FitResult {
  Decomposition<D> decomposition;
  FitReport report;
};

/// The direct per-shape optimization loop: offline sample banks, per-step
/// batch subsampling, total loss with analytic gradients, Adam. Deterministic
/// per (oracle, config, seed).
template <int D>
FitResult<D> fit(const TargetOracle<D>& oracle, const FitConfig& cfg) {
  if (cfg.num_elements < 1 || cfg.planes_per_element < D + 1) {
    throw std::invalid_argument("fit: K must be >= 1 and H >= d+1");
  }
  const auto volume_bank =
      sample_volume(oracle, cfg.bank_volume, combine_seeds(cfg.seed, 1));
  SampleSet<D> surface_bank;
  surface_bank.source = SampleSource::kNearSurface;
  const bool with_surface = oracle.has_surface() && cfg.batch_surface > 0;
  if (with_surface) {
    surface_bank = sample_near_surface(
        oracle, cfg.bank_surface, cfg.jitter_rel * oracle.bbox_diagonal(),
        combine_seeds(cfg.seed, 2));
  }

  SampleSet<D> interior_bank = interior_subset(volume_bank);
  // One fixed interior bank for the guidance-type losses, so nearest-sample
  // selections drift with the parameters, not with the batch.
  if (interior_bank.size() > cfg.interior_bank_size) {
    interior_bank = subsample(interior_bank, cfg.interior_bank_size, 0x17B1U);
  }
  Decomposition<D> dec =
      init_decomposition_from_interior(interior_bank.points, oracle, cfg);
  const auto layout = ParamLayout<D>::of(dec);

  ParamVector params = pack(dec);
  ParamVector grad;
  AdamState state = AdamState::zeros(layout.size());

  FitResult<D> result;
  result.report.records.reserve(cfg.iters);
  for (int step = 0; step < cfg.iters; ++step) {
    const auto s_volume =
        subsample(volume_bank, cfg.batch_volume,
                  static_cast<std::uint64_t>(2 * step));
    SampleSet<D> s_surface;
    s_surface.source = SampleSource::kNearSurface;
    if (with_surface) {
      s_surface = subsample(surface_bank, cfg.batch_surface,
                            static_cast<std::uint64_t>(2 * step + 1));
    }
    unpack(params, &dec);
    FitRecord record;
    record.step = step;
    try {
      record.terms = total_loss_and_grad(dec, s_volume, s_surface, cfg.weights,
                                         &grad, &interior_bank);
      if (std::abs(record.terms.total) > cfg.divergence_abort) {
        throw std::runtime_error("loss exceeded divergence threshold");
      }
      adam_step<D>(&state, &params, grad, cfg, layout);
    } catch (const std::runtime_error& err) {
      result.report.diverged = true;
      result.report.error = err.what();
      break;
    }
    if (cfg.eval_every > 0 &&
        (step % cfg.eval_every == cfg.eval_every - 1 || step == 0)) {
      record.iou = decomposition_iou(dec, oracle, cfg.eval_samples,
                                     combine_seeds(cfg.seed, 0xE0A1U));
    }
    result.report.records.push_back(record);
  }
  unpack(params, &dec);
  result.decomposition = dec;
  result.report.final_iou = decomposition_iou(
      dec, oracle, cfg.eval_samples, combine_seeds(cfg.seed, 0xE0A1U));
  return result;
}

}  // namespace cvxfit
