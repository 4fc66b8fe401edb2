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

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <vector>

#include "cvxfit/core.hpp"

namespace cvxfit {

struct DegenerateHull : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Hull3Facet {
  int v[3];        // indices into the input point set, CCW from outside
  Vec<3> normal;   // unit outward normal
  double offset;   // plane is normal . x = offset
};

struct HullResult3 {
  std::vector<Hull3Facet> facets;
  std::vector<int> vertex_indices;  // sorted unique extreme-point indices
  double tolerance = 0.0;
};

/// Incremental 3D convex hull with triangulated facets (no coplanar-facet
/// merging). Tolerance scales with the point-cloud diameter; points within
/// tolerance of a facet are treated as interior and never become vertices.
inline HullResult3 convex_hull_3d(const std::vector<Vec<3>>& points,
                                  double tol_rel = 1e-9) {
  const int n = static_cast<int>(points.size());
  if (n < 4) throw DegenerateHull("convex_hull_3d: fewer than 4 points");

  Vec<3> lo = points[0], hi = points[0];
  for (const auto& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double diameter = (hi - lo).norm();
  const double tol = std::max(tol_rel * diameter, 1e-300);

  // Initial simplex from extreme points.
  int i0 = 0;
  for (int i = 1; i < n; ++i) {
    if (std::lexicographical_compare(points[i].data(), points[i].data() + 3,
                                     points[i0].data(), points[i0].data() + 3))
      i0 = i;
  }
  int i1 = -1;
  double best = tol;
  for (int i = 0; i < n; ++i) {
    const double d = (points[i] - points[i0]).norm();
    if (d > best) {
      best = d;
      i1 = i;
    }
  }
  if (i1 < 0) throw DegenerateHull("convex_hull_3d: all points coincide");
  const Vec<3> axis = (points[i1] - points[i0]).normalized();
  int i2 = -1;
  best = tol;
  for (int i = 0; i < n; ++i) {
    const Vec<3> r = points[i] - points[i0];
    const double d = (r - axis * axis.dot(r)).norm();
    if (d > best) {
      best = d;
      i2 = i;
    }
  }
  if (i2 < 0) throw DegenerateHull("convex_hull_3d: points are collinear");
  const Vec<3> plane_n =
      (points[i1] - points[i0]).cross(points[i2] - points[i0]).normalized();
  int i3 = -1;
  best = tol;
  for (int i = 0; i < n; ++i) {
    const double d = std::abs(plane_n.dot(points[i] - points[i0]));
    if (d > best) {
      best = d;
      i3 = i;
    }
  }
  if (i3 < 0) throw DegenerateHull("convex_hull_3d: points are coplanar");

  struct Face {
    int v[3];
    Vec<3> n;
    double d;
    bool alive = true;
  };
  std::vector<Face> faces;
  const Vec<3> interior =
      0.25 * (points[i0] + points[i1] + points[i2] + points[i3]);
  auto make_face = [&](int a, int b, int c) {
    Face f;
    Vec<3> nrm = (points[b] - points[a]).cross(points[c] - points[a]);
    const double len = nrm.norm();
    nrm /= len;
    double off = nrm.dot(points[a]);
    if (nrm.dot(interior) > off) {
      std::swap(b, c);
      nrm = -nrm;
      off = -off;
    }
    f.v[0] = a;
    f.v[1] = b;
    f.v[2] = c;
    f.n = nrm;
    f.d = off;
    return f;
  };
  faces.push_back(make_face(i0, i1, i2));
  faces.push_back(make_face(i0, i1, i3));
  faces.push_back(make_face(i0, i2, i3));
  faces.push_back(make_face(i1, i2, i3));

  for (int p = 0; p < n; ++p) {
    if (p == i0 || p == i1 || p == i2 || p == i3) continue;
    std::vector<int> visible;
    for (int f = 0; f < static_cast<int>(faces.size()); ++f) {
      if (faces[f].alive && faces[f].n.dot(points[p]) - faces[f].d > tol) {
        visible.push_back(f);
      }
    }
    if (visible.empty()) continue;

    // Directed edges of alive faces, to find the horizon of the visible set.
    std::map<std::pair<int, int>, int> edge_face;
    for (int f = 0; f < static_cast<int>(faces.size()); ++f) {
      if (!faces[f].alive) continue;
      for (int e = 0; e < 3; ++e) {
        edge_face[{faces[f].v[e], faces[f].v[(e + 1) % 3]}] = f;
      }
    }
    std::set<int> visible_set(visible.begin(), visible.end());
    std::vector<std::pair<int, int>> horizon;
    for (int f : visible) {
      for (int e = 0; e < 3; ++e) {
        const int u = faces[f].v[e];
        const int v = faces[f].v[(e + 1) % 3];
        const auto opposite = edge_face.find({v, u});
        if (opposite == edge_face.end() ||
            !visible_set.count(opposite->second)) {
          horizon.push_back({u, v});
        }
      }
    }
    for (int f : visible) faces[f].alive = false;
    for (const auto& [u, v] : horizon) {
      Face f;
      Vec<3> nrm = (points[v] - points[u]).cross(points[p] - points[u]);
      const double len = nrm.norm();
      if (len < tol * tol) {
        // Degenerate sliver (horizon point nearly on the edge); orientation
        // falls back to the interior test below via make_face.
        faces.push_back(make_face(u, v, p));
        continue;
      }
      f.v[0] = u;
      f.v[1] = v;
      f.v[2] = p;
      f.n = nrm / len;
      f.d = f.n.dot(points[u]);
      faces.push_back(f);
    }
  }

  HullResult3 result;
  result.tolerance = tol;
  std::set<int> used;
  for (const auto& f : faces) {
    if (!f.alive) continue;
    Hull3Facet facet;
    facet.v[0] = f.v[0];
    facet.v[1] = f.v[1];
    facet.v[2] = f.v[2];
    facet.normal = f.n;
    facet.offset = f.d;
    result.facets.push_back(facet);
    used.insert(f.v, f.v + 3);
  }
  result.vertex_indices.assign(used.begin(), used.end());
  return result;
}

/// 2D convex hull (monotone chain). Returns CCW-ordered indices.
inline std::vector<int> convex_hull_2d(const std::vector<Vec<2>>& points,
                                       double tol_rel = 1e-9) {
  const int n = static_cast<int>(points.size());
  if (n < 3) throw DegenerateHull("convex_hull_2d: fewer than 3 points");
  double diameter = 0.0;
  Vec<2> lo = points[0], hi = points[0];
  for (const auto& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  diameter = (hi - lo).norm();
  const double tol = std::max(tol_rel * diameter * diameter, 1e-300);

  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (points[a][0] != points[b][0]) return points[a][0] < points[b][0];
    return points[a][1] < points[b][1];
  });
  auto cross = [&](int o, int a, int b) {
    const Vec<2> u = points[a] - points[o];
    const Vec<2> v = points[b] - points[o];
    return u[0] * v[1] - u[1] * v[0];
  };
  std::vector<int> hull(2 * n);
  int h = 0;
  for (int i = 0; i < n; ++i) {  // lower
    while (h >= 2 && cross(hull[h - 2], hull[h - 1], idx[i]) <= tol) --h;
    hull[h++] = idx[i];
  }
  for (int i = n - 2, base = h + 1; i >= 0; --i) {  // upper
    while (h >= base && cross(hull[h - 2], hull[h - 1], idx[i]) <= tol) --h;
    hull[h++] = idx[i];
  }
  hull.resize(h - 1);
  if (static_cast<int>(hull.size()) < 3) {
    throw DegenerateHull("convex_hull_2d: points are collinear");
  }
  return hull;
}

}  // namespace cvxfit
