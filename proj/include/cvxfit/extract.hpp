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

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cvxfit/core.hpp"
#include "cvxfit/hull.hpp"
#include "cvxfit/losses.hpp"
#include "cvxfit/mesh.hpp"

namespace cvxfit {

struct InfeasibleInterior : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Unbounded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

template <int D>
double planes_max(const std::vector<Hyperplane<D>>& planes, const Vec<D>& x) {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& p : planes) m = std::max(m, p.signed_distance(x));
  return m;
}

// Smooth max over the plane distances and its gradient; the objective the
// interior-point search descends.
template <int D>
double planes_smooth_max(const std::vector<Hyperplane<D>>& planes,
                         const Vec<D>& x, double delta, Vec<D>* grad) {
  const int h_count = static_cast<int>(planes.size());
  std::vector<double> dist(h_count);
  double mx = -std::numeric_limits<double>::infinity();
  for (int h = 0; h < h_count; ++h) {
    dist[h] = planes[h].signed_distance(x);
    mx = std::max(mx, dist[h]);
  }
  double sum = 0.0;
  std::vector<double> w(h_count);
  for (int h = 0; h < h_count; ++h) {
    w[h] = std::exp(delta * (dist[h] - mx));
    sum += w[h];
  }
  if (grad) {
    grad->setZero();
    for (int h = 0; h < h_count; ++h) {
      *grad += (w[h] / sum) * planes[h].unit_normal();
    }
  }
  return mx + std::log(sum) / delta;
}

}  // namespace detail

/// A point strictly inside the intersection of the half-spaces, found by
/// damped descent on the smooth max of the plane distances starting from the
/// offsets' least-squares center. Throws InfeasibleInterior when the set is
/// empty or lower-dimensional.
template <int D>
Vec<D> interior_point(const std::vector<Hyperplane<D>>& planes) {
  if (static_cast<int>(planes.size()) < D + 1) {
    throw InfeasibleInterior("interior_point: need at least d+1 planes");
  }
  double scale = 1e-3;
  for (const auto& p : planes) scale = std::max(scale, std::abs(p.offset));
  const double margin = 1e-6 * scale;

  Vec<D> x = center_offsets_closed_form(planes);
  double f = detail::planes_max(planes, x);
  if (f < -margin) return x;

  double delta = 10.0 / std::max(std::abs(f), margin);
  for (int round = 0; round < 8; ++round) {
    double step = 1.0 / delta;
    Vec<D> grad;
    double value = detail::planes_smooth_max(planes, x, delta, &grad);
    for (int iter = 0; iter < 300; ++iter) {
      const Vec<D> candidate = x - step * grad;
      Vec<D> cand_grad;
      const double cand_value =
          detail::planes_smooth_max(planes, candidate, delta, &cand_grad);
      if (cand_value < value) {
        x = candidate;
        value = cand_value;
        grad = cand_grad;
        step *= 1.5;
      } else {
        step *= 0.5;
        if (step < 1e-14 * scale) break;
      }
    }
    f = detail::planes_max(planes, x);
    if (f < -margin) return x;
    delta *= 4.0;
  }
  throw InfeasibleInterior("interior_point: no strictly interior point found");
}

/// Polar duality about an interior point: after shifting offsets so that
/// p_interior is the origin (all shifted offsets strictly negative), plane h
/// maps to the point n_h / (-d'_h).
template <int D>
std::vector<Vec<D>> dualize(const std::vector<Hyperplane<D>>& planes,
                            const Vec<D>& p_interior) {
  std::vector<Vec<D>> duals;
  duals.reserve(planes.size());
  for (const auto& plane : planes) {
    const Vec<D> n = plane.unit_normal();
    const double shifted = plane.offset + n.dot(p_interior);
    if (shifted >= 0.0) {
      throw std::invalid_argument(
          "dualize: point is not strictly interior to every half-space");
    }
    duals.push_back(n / -shifted);
  }
  return duals;
}

namespace detail {

template <int D>
std::vector<Vec<D>> merge_close_points(const std::vector<Vec<D>>& pts,
                                       double merge_rel = 1e-7) {
  double diameter = 0.0;
  for (size_t i = 0; i < pts.size(); ++i) {
    for (size_t j = i + 1; j < pts.size(); ++j) {
      diameter = std::max(diameter, (pts[i] - pts[j]).norm());
    }
  }
  const double radius = merge_rel * diameter;
  std::vector<Vec<D>> out;
  for (const auto& p : pts) {
    bool found = false;
    for (const auto& q : out) {
      if ((p - q).norm() <= radius) {
        found = true;
        break;
      }
    }
    if (!found) out.push_back(p);
  }
  return out;
}

}  // namespace detail

/// Hyperplanes to an exact polygonal mesh: interior point, duality to points,
/// hull of the duals, dual facets back to primal vertices, hull of those.
/// Output is in world coordinates (vertices shifted by the interior point and
/// by the element translation). Cost depends only on the plane count, never
/// on a resolution parameter.
template <int D>
  requires(D == 3)
TriMesh planes_to_mesh(const ConvexElement<D>& e) {
  const Vec<3> p = interior_point(e.planes);
  const std::vector<Vec<3>> duals = dualize(e.planes, p);

  HullResult3 dual_hull;
  try {
    dual_hull = convex_hull_3d(duals);
  } catch (const DegenerateHull&) {
    // A flat or lower-dimensional dual hull cannot strictly contain the dual
    // origin, so the primal polytope is unbounded.
    throw Unbounded("planes_to_mesh: polytope is unbounded");
  }

  // Bounded iff the dual origin is strictly inside the dual hull.
  double dual_diameter = 0.0;
  for (const auto& q : duals) dual_diameter = std::max(dual_diameter, q.norm());
  const double min_offset = 1e-9 * dual_diameter;
  std::vector<Vec<3>> primal;
  primal.reserve(dual_hull.facets.size());
  for (const auto& facet : dual_hull.facets) {
    if (facet.offset <= min_offset) {
      throw Unbounded("planes_to_mesh: polytope is unbounded");
    }
    primal.push_back(facet.normal / facet.offset);
  }

  const std::vector<Vec<3>> merged = detail::merge_close_points(primal);
  const HullResult3 primal_hull = convex_hull_3d(merged);

  TriMesh mesh;
  std::vector<int> remap(merged.size(), -1);
  for (int idx : primal_hull.vertex_indices) {
    remap[idx] = static_cast<int>(mesh.vertices.size());
    mesh.vertices.push_back(merged[idx] + p - e.translation);
  }
  for (const auto& facet : primal_hull.facets) {
    mesh.triangles.push_back(
        {remap[facet.v[0]], remap[facet.v[1]], remap[facet.v[2]]});
  }
  return mesh;
}

/// Closed CCW polygon, world coordinates.
struct Polygon2 {
  std::vector<Vec<2>> vertices;
};

inline double polygon_area(const Polygon2& poly) {
  double a = 0.0;
  const auto& v = poly.vertices;
  for (size_t i = 0; i < v.size(); ++i) {
    const auto& p = v[i];
    const auto& q = v[(i + 1) % v.size()];
    a += p[0] * q[1] - q[0] * p[1];
  }
  return 0.5 * a;
}

inline bool point_in_polygon(const Polygon2& poly, const Vec<2>& x) {
  bool inside = false;
  const auto& v = poly.vertices;
  for (size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    if ((v[i][1] > x[1]) != (v[j][1] > x[1]) &&
        x[0] < (v[j][0] - v[i][0]) * (x[1] - v[i][1]) / (v[j][1] - v[i][1]) +
                   v[i][0]) {
      inside = !inside;
    }
  }
  return inside;
}

template <int D>
  requires(D == 2)
Polygon2 planes_to_polygon(const ConvexElement<D>& e) {
  const Vec<2> p = interior_point(e.planes);
  const std::vector<Vec<2>> duals = dualize(e.planes, p);

  std::vector<int> hull;
  try {
    hull = convex_hull_2d(duals);
  } catch (const DegenerateHull&) {
    throw Unbounded("planes_to_polygon: polygon is unbounded");
  }

  double dual_diameter = 0.0;
  for (const auto& q : duals) dual_diameter = std::max(dual_diameter, q.norm());
  const double min_offset = 1e-9 * dual_diameter;

  std::vector<Vec<2>> primal;
  const int m = static_cast<int>(hull.size());
  for (int i = 0; i < m; ++i) {
    const Vec<2>& a = duals[hull[i]];
    const Vec<2>& b = duals[hull[(i + 1) % m]];
    const Vec<2> edge = b - a;
    Vec<2> u(edge[1], -edge[0]);  // outward for a CCW hull
    double off = u.dot(a);
    if (off < 0.0) {
      u = -u;
      off = -off;
    }
    const double norm = u.norm();
    if (off <= min_offset * norm) {
      throw Unbounded("planes_to_polygon: polygon is unbounded");
    }
    primal.push_back(u / off);
  }
  const std::vector<Vec<2>> merged = detail::merge_close_points(primal);
  if (merged.size() < 3) {
    throw DegenerateHull("planes_to_polygon: degenerate polygon");
  }

  Polygon2 poly;
  for (const auto& v : merged) poly.vertices.push_back(v + p - e.translation);
  if (polygon_area(poly) < 0.0) {
    std::reverse(poly.vertices.begin(), poly.vertices.end());
  }
  return poly;
}

struct ExtractionResult3 {
  std::vector<TriMesh> meshes;
  std::vector<int> element_indices;  // which element produced each mesh
  std::vector<std::string> warnings;
};

/// Per-element extraction; degenerate or unbounded elements are skipped with
/// a warning instead of aborting the whole decomposition.
inline ExtractionResult3 decomposition_to_meshes(const Decomposition<3>& dec,
                                                 double prune_epsilon = 1e-8) {
  ExtractionResult3 out;
  for (int k = 0; k < dec.num_elements(); ++k) {
    try {
      TriMesh mesh = planes_to_mesh(dec.elements[k]);
      const double volume = mesh_volume(mesh);
      if (volume < prune_epsilon) {
        out.warnings.push_back("element " + std::to_string(k) +
                               ": pruned (volume " + std::to_string(volume) +
                               " below threshold)");
        continue;
      }
      out.meshes.push_back(std::move(mesh));
      out.element_indices.push_back(k);
    } catch (const std::exception& err) {
      out.warnings.push_back("element " + std::to_string(k) + ": skipped (" +
                             err.what() + ")");
    }
  }
  return out;
}

struct ExtractionResult2 {
  std::vector<Polygon2> polygons;
  std::vector<int> element_indices;
  std::vector<std::string> warnings;
};

inline ExtractionResult2 decomposition_to_polygons(const Decomposition<2>& dec,
                                                   double prune_epsilon = 1e-8) {
  ExtractionResult2 out;
  for (int k = 0; k < dec.num_elements(); ++k) {
    try {
      Polygon2 poly = planes_to_polygon(dec.elements[k]);
      if (polygon_area(poly) < prune_epsilon) {
        out.warnings.push_back("element " + std::to_string(k) +
                               ": pruned (area below threshold)");
        continue;
      }
      out.polygons.push_back(std::move(poly));
      out.element_indices.push_back(k);
    } catch (const std::exception& err) {
      out.warnings.push_back("element " + std::to_string(k) + ": skipped (" +
                             err.what() + ")");
    }
  }
  return out;
}

/// SVG export of 2D polygons; world y points up, SVG y points down.
inline void save_svg(const std::string& path,
                     const std::vector<Polygon2>& polygons, double world_lo,
                     double world_hi, int pixels = 512) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write SVG file: " + path);
  const double span = world_hi - world_lo;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << pixels
      << "\" height=\"" << pixels << "\" viewBox=\"0 0 " << pixels << " "
      << pixels << "\">\n";
  for (const auto& poly : polygons) {
    out << "  <path d=\"";
    for (size_t i = 0; i < poly.vertices.size(); ++i) {
      const auto& v = poly.vertices[i];
      const double px = (v[0] - world_lo) / span * pixels;
      const double py = (world_hi - v[1]) / span * pixels;
      out << (i == 0 ? "M " : "L ") << px << " " << py << " ";
    }
    out << "Z\" fill=\"#7fb3d5\" fill-opacity=\"0.6\" stroke=\"#1a5276\"/>\n";
  }
  out << "</svg>\n";
}

}  // namespace cvxfit
