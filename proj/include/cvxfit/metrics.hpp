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
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "cvxfit/core.hpp"
#include "cvxfit/rng.hpp"

namespace cvxfit {

/// Exact nearest-neighbor queries over a fixed point set via a uniform grid.
/// No approximation: shells are expanded until the remaining cells cannot
/// beat the best distance found.
template <int D>
class PointGridIndex {
 public:
  explicit PointGridIndex(const std::vector<Vec<D>>& points)
      : points_(points) {
    if (points.empty()) {
      throw std::invalid_argument("PointGridIndex: empty point set");
    }
    lo_ = points[0];
    Vec<D> hi = points[0];
    for (const auto& p : points) {
      lo_ = lo_.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    const Vec<D> extent = hi - lo_;
    const double target_cells =
        std::pow(static_cast<double>(points.size()), 1.0 / D);
    for (int d = 0; d < D; ++d) {
      dims_[d] = std::clamp(static_cast<int>(target_cells), 1, 128);
      cell_[d] = extent[d] > 0.0 ? extent[d] / dims_[d] : 1.0;
    }
    min_cell_ = cell_[0];
    for (int d = 1; d < D; ++d) min_cell_ = std::min(min_cell_, cell_[d]);
    size_t total = 1;
    for (int d = 0; d < D; ++d) total *= dims_[d];
    cells_.resize(total);
    for (int i = 0; i < static_cast<int>(points.size()); ++i) {
      cells_[flat_index(cell_of(points[i]))].push_back(i);
    }
  }

  double nearest_distance(const Vec<D>& q) const {
    Vec<D> q_clamped = q;
    for (int d = 0; d < D; ++d) {
      q_clamped[d] = std::clamp(q[d], lo_[d], lo_[d] + cell_[d] * dims_[d]);
    }
    const double clamp_offset = (q - q_clamped).norm();
    const auto center = cell_of(q_clamped);
    int max_shell = 0;
    for (int d = 0; d < D; ++d) max_shell = std::max(max_shell, dims_[d]);

    double best = std::numeric_limits<double>::infinity();
    for (int shell = 0; shell <= max_shell; ++shell) {
      scan_shell(center, shell, q, &best);
      // Points in shells > `shell` are at least shell*min_cell from the
      // clamped query, hence shell*min_cell - clamp_offset from q.
      if (best <= shell * min_cell_ - clamp_offset) break;
    }
    return best;
  }

 private:
  std::array<int, D> cell_of(const Vec<D>& p) const {
    std::array<int, D> c;
    for (int d = 0; d < D; ++d) {
      c[d] = std::clamp(static_cast<int>((p[d] - lo_[d]) / cell_[d]), 0,
                        dims_[d] - 1);
    }
    return c;
  }

  size_t flat_index(const std::array<int, D>& c) const {
    size_t idx = 0;
    for (int d = D - 1; d >= 0; --d) idx = idx * dims_[d] + c[d];
    return idx;
  }

  void scan_cell(const std::array<int, D>& c, const Vec<D>& q,
                 double* best) const {
    for (int i : cells_[flat_index(c)]) {
      *best = std::min(*best, (points_[i] - q).norm());
    }
  }

  // Visits cells at exactly Chebyshev distance `shell` from center.
  void scan_shell(const std::array<int, D>& center, int shell, const Vec<D>& q,
                  double* best) const {
    std::array<int, D> c;
    scan_shell_rec(center, shell, 0, false, &c, q, best);
  }

  void scan_shell_rec(const std::array<int, D>& center, int shell, int axis,
                      bool boundary_hit, std::array<int, D>* c, const Vec<D>& q,
                      double* best) const {
    if (axis == D) {
      if (boundary_hit || shell == 0) scan_cell(*c, q, best);
      return;
    }
    for (int o = -shell; o <= shell; ++o) {
      const int v = center[axis] + o;
      if (v < 0 || v >= dims_[axis]) continue;
      (*c)[axis] = v;
      scan_shell_rec(center, shell, axis + 1,
                     boundary_hit || std::abs(o) == shell, c, q, best);
    }
  }

  std::vector<Vec<D>> points_;
  Vec<D> lo_;
  int dims_[D];
  double cell_[D];
  double min_cell_ = 1.0;
  std::vector<std::vector<int>> cells_;
};

namespace detail {

template <int D>
std::vector<double> all_nearest(const std::vector<Vec<D>>& queries,
                                const PointGridIndex<D>& index, int threads) {
  std::vector<double> out(queries.size());
  if (threads <= 1) {
    for (size_t i = 0; i < queries.size(); ++i) {
      out[i] = index.nearest_distance(queries[i]);
    }
    return out;
  }
  std::vector<std::thread> pool;
  const size_t chunk = (queries.size() + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const size_t begin = t * chunk;
    const size_t end = std::min(queries.size(), begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] {
      for (size_t i = begin; i < end; ++i) {
        out[i] = index.nearest_distance(queries[i]);
      }
    });
  }
  for (auto& th : pool) th.join();
  return out;
}

}  // namespace detail

template <int D>
using IndicatorSource = std::function<double(const Vec<D>&)>;

/// Monte-Carlo |A intersect B| / |A union B| with one shared sample stream
/// for both solids (paired estimator); sources are thresholded at 0.5.
template <int D>
double volumetric_iou(const IndicatorSource<D>& a, const IndicatorSource<D>& b,
                      const Vec<D>& box_lo, const Vec<D>& box_hi,
                      int n = 100000, std::uint64_t seed = 0) {
  Rng rng(combine_seeds(seed, 0x10F0U));
  long long inter = 0;
  long long uni = 0;
  for (int i = 0; i < n; ++i) {
    Vec<D> x;
    for (int d = 0; d < D; ++d) x[d] = rng.uniform(box_lo[d], box_hi[d]);
    const bool in_a = a(x) >= 0.5;
    const bool in_b = b(x) >= 0.5;
    if (in_a && in_b) ++inter;
    if (in_a || in_b) ++uni;
  }
  if (uni == 0) {
    throw std::runtime_error("volumetric_iou: both solids empty in the box");
  }
  return static_cast<double>(inter) / static_cast<double>(uni);
}

/// Mean of accuracy and completeness: average nearest-neighbor distance in
/// both directions. Nearest neighbors are exact.
template <int D>
double chamfer_l1(const std::vector<Vec<D>>& sa, const std::vector<Vec<D>>& sb,
                  int threads = 1) {
  if (sa.empty() || sb.empty()) {
    throw std::invalid_argument("chamfer_l1: empty surface sample set");
  }
  const PointGridIndex<D> ib(sb);
  const PointGridIndex<D> ia(sa);
  const auto da = detail::all_nearest(sa, ib, threads);
  const auto db = detail::all_nearest(sb, ia, threads);
  double acc = 0.0, comp = 0.0;
  for (double d : da) acc += d;
  for (double d : db) comp += d;
  return 0.5 * (acc / da.size() + comp / db.size());
}

/// Percentage F-score at threshold t: harmonic mean of the fraction of
/// reconstruction points within t of the target and vice versa.
template <int D>
double f_score(const std::vector<Vec<D>>& reconstruction,
               const std::vector<Vec<D>>& target, double threshold,
               int threads = 1) {
  if (reconstruction.empty() || target.empty()) {
    throw std::invalid_argument("f_score: empty surface sample set");
  }
  if (threshold <= 0.0) {
    throw std::invalid_argument("f_score: threshold must be positive");
  }
  const PointGridIndex<D> it(target);
  const PointGridIndex<D> ir(reconstruction);
  const auto dr = detail::all_nearest(reconstruction, it, threads);
  const auto dt = detail::all_nearest(target, ir, threads);
  double precision = 0.0, recall = 0.0;
  for (double d : dr) precision += d <= threshold ? 1.0 : 0.0;
  for (double d : dt) recall += d <= threshold ? 1.0 : 0.0;
  precision /= dr.size();
  recall /= dt.size();
  if (precision + recall == 0.0) return 0.0;
  return 100.0 * 2.0 * precision * recall / (precision + recall);
}

struct MetricsReport {
  double iou = 0.0;
  double chamfer_l1 = 0.0;
  double f_score = 0.0;
  double f_threshold = 0.0;
  int iou_samples = 0;
  int surface_samples = 0;
  std::uint64_t seed = 0;
  std::string note;

  std::string to_text() const {
    std::ostringstream out;
    out.precision(10);
    out << "iou=" << iou << "\n"
        << "chamfer_l1=" << chamfer_l1 << "\n"
        << "f_score=" << f_score << "\n"
        << "f_threshold=" << f_threshold << "\n"
        << "iou_samples=" << iou_samples << "\n"
        << "surface_samples=" << surface_samples << "\n"
        << "seed=" << seed << "\n";
    if (!note.empty()) out << "note=" << note << "\n";
    return out.str();
  }
};

}  // namespace cvxfit
