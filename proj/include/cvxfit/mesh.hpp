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

#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cvxfit/core.hpp"
#include "cvxfit/rng.hpp"

namespace cvxfit {

struct TriMesh {
  std::vector<Vec<3>> vertices;
  std::vector<std::array<int, 3>> triangles;

  bool empty() const { return triangles.empty(); }
};

struct Aabb3 {
  Vec<3> lo = Vec<3>::Constant(std::numeric_limits<double>::infinity());
  Vec<3> hi = Vec<3>::Constant(-std::numeric_limits<double>::infinity());

  void expand(const Vec<3>& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  Vec<3> extent() const { return hi - lo; }
  double diagonal() const { return extent().norm(); }
  Aabb3 inflated(double rel_margin) const {
    Aabb3 b;
    const Vec<3> m = 0.5 * rel_margin * extent();
    b.lo = lo - m;
    b.hi = hi + m;
    return b;
  }
  bool contains(const Vec<3>& p) const {
    return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
  }
};

inline Aabb3 mesh_bounds(const TriMesh& m) {
  Aabb3 b;
  for (const auto& v : m.vertices) b.expand(v);
  return b;
}

/// Signed volume via the divergence theorem; positive for outward CCW faces.
inline double mesh_volume(const TriMesh& m) {
  double v = 0.0;
  for (const auto& t : m.triangles) {
    v += m.vertices[t[0]].cross(m.vertices[t[1]]).dot(m.vertices[t[2]]);
  }
  return v / 6.0;
}

inline double triangle_area(const Vec<3>& a, const Vec<3>& b, const Vec<3>& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

inline double mesh_area(const TriMesh& m) {
  double a = 0.0;
  for (const auto& t : m.triangles) {
    a += triangle_area(m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]]);
  }
  return a;
}

/// Closed 2-manifold test: every directed edge appears exactly once and its
/// reverse exists (each undirected edge shared by exactly two triangles).
inline bool mesh_watertight(const TriMesh& m) {
  if (m.triangles.empty()) return false;
  std::map<std::pair<int, int>, int> directed;
  for (const auto& t : m.triangles) {
    for (int i = 0; i < 3; ++i) {
      const int a = t[i];
      const int b = t[(i + 1) % 3];
      if (a == b) return false;
      if (++directed[{a, b}] > 1) return false;
    }
  }
  for (const auto& [edge, count] : directed) {
    auto rev = directed.find({edge.second, edge.first});
    if (rev == directed.end() || rev->second != 1) return false;
  }
  return true;
}

namespace detail {

// Moller-Trumbore; returns t along the ray, or nan. near_degenerate is set
// when the hit grazes an edge or vertex of the triangle.
inline double ray_triangle(const Vec<3>& origin, const Vec<3>& dir,
                           const Vec<3>& a, const Vec<3>& b, const Vec<3>& c,
                           bool* near_degenerate) {
  constexpr double kEps = 1e-12;
  const Vec<3> e1 = b - a;
  const Vec<3> e2 = c - a;
  const Vec<3> p = dir.cross(e2);
  const double det = e1.dot(p);
  if (std::abs(det) < kEps) return std::numeric_limits<double>::quiet_NaN();
  const double inv_det = 1.0 / det;
  const Vec<3> s = origin - a;
  const double u = s.dot(p) * inv_det;
  if (u < 0.0 || u > 1.0) return std::numeric_limits<double>::quiet_NaN();
  const Vec<3> q = s.cross(e1);
  const double v = dir.dot(q) * inv_det;
  if (v < 0.0 || u + v > 1.0) return std::numeric_limits<double>::quiet_NaN();
  const double t = e2.dot(q) * inv_det;
  if (t <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  const double edge_margin = 1e-9;
  if (u < edge_margin || v < edge_margin || u + v > 1.0 - edge_margin) {
    *near_degenerate = true;
  }
  return t;
}

}  // namespace detail

/// Parity inside test for a watertight mesh. Casts along a fixed irrational
/// direction; retries with a perturbed direction when a hit grazes an edge.
inline bool point_in_mesh(const TriMesh& m, const Vec<3>& x) {
  Vec<3> dir(0.5773502691896258, 0.7071067811865476, 0.4082482904638630);
  dir.normalize();
  for (int attempt = 0; attempt < 16; ++attempt) {
    bool degenerate = false;
    int crossings = 0;
    for (const auto& t : m.triangles) {
      const double hit = detail::ray_triangle(x, dir, m.vertices[t[0]],
                                              m.vertices[t[1]],
                                              m.vertices[t[2]], &degenerate);
      if (!std::isnan(hit)) ++crossings;
      if (degenerate) break;
    }
    if (!degenerate) return (crossings % 2) == 1;
    Rng rng(mix64(0xC0FFEEULL + attempt));
    dir = (dir + 0.01 * rng.unit_vector<3>()).normalized();
  }
  throw std::runtime_error("point_in_mesh: persistent degenerate ray hits");
}

/// Area-weighted uniform surface samples, deterministic per seed.
inline std::vector<Vec<3>> mesh_surface_samples(const TriMesh& m, int n,
                                                std::uint64_t seed) {
  if (m.triangles.empty()) {
    throw std::invalid_argument("mesh_surface_samples: empty mesh");
  }
  std::vector<double> cumulative(m.triangles.size());
  double total = 0.0;
  for (size_t i = 0; i < m.triangles.size(); ++i) {
    const auto& t = m.triangles[i];
    total +=
        triangle_area(m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]]);
    cumulative[i] = total;
  }
  if (total <= 0.0) {
    throw std::invalid_argument("mesh_surface_samples: zero-area mesh");
  }
  Rng rng(seed);
  std::vector<Vec<3>> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double target = rng.uniform() * total;
    const auto it =
        std::lower_bound(cumulative.begin(), cumulative.end(), target);
    const size_t ti = std::min<size_t>(it - cumulative.begin(),
                                       m.triangles.size() - 1);
    const auto& t = m.triangles[ti];
    double u = rng.uniform();
    double v = rng.uniform();
    if (u + v > 1.0) {
      u = 1.0 - u;
      v = 1.0 - v;
    }
    out.push_back(m.vertices[t[0]] +
                  u * (m.vertices[t[1]] - m.vertices[t[0]]) +
                  v * (m.vertices[t[2]] - m.vertices[t[0]]));
  }
  return out;
}

/// ASCII OBJ loader handling v/f lines only; polygons are fan-triangulated.
inline TriMesh load_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open OBJ file: " + path);
  TriMesh m;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "v") {
      Vec<3> p;
      ss >> p[0] >> p[1] >> p[2];
      m.vertices.push_back(p);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string tok;
      while (ss >> tok) {
        // "i", "i/j", "i/j/k" forms; only the vertex index matters.
        idx.push_back(std::stoi(tok.substr(0, tok.find('/'))));
      }
      for (size_t i = 2; i < idx.size(); ++i) {
        m.triangles.push_back({idx[0] - 1, idx[i - 1] - 1, idx[i] - 1});
      }
    }
  }
  return m;
}

inline void save_obj(const std::string& path, const TriMesh& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write OBJ file: " + path);
  out.precision(17);
  for (const auto& v : m.vertices) {
    out << "v " << v[0] << " " << v[1] << " " << v[2] << "\n";
  }
  for (const auto& t : m.triangles) {
    out << "f " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
  }
}

/// Concatenates meshes with vertex-index offsets (union export).
inline TriMesh merge_meshes(const std::vector<TriMesh>& parts) {
  TriMesh out;
  for (const auto& p : parts) {
    const int base = static_cast<int>(out.vertices.size());
    out.vertices.insert(out.vertices.end(), p.vertices.begin(),
                        p.vertices.end());
    for (const auto& t : p.triangles) {
      out.triangles.push_back({t[0] + base, t[1] + base, t[2] + base});
    }
  }
  return out;
}

}  // namespace cvxfit
