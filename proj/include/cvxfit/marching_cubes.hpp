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
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "cvxfit/mesh.hpp"

namespace cvxfit {

namespace detail {
#include "cvxfit/mc_tables.inc"
}  // namespace detail

/// Standard 256-case marching cubes with linear edge interpolation on a
/// res^3 cell grid over the box. The region where field < level is inside;
/// pass a negated indicator to surface an occupancy field. This is the
/// iso-surfacing oracle whose cost scales with resolution; the duality
/// extraction exists to avoid it.
inline TriMesh marching_cubes(const std::function<double(const Vec<3>&)>& field,
                              const Aabb3& box, int res, double level = 0.0) {
  if (res < 8) throw std::invalid_argument("marching_cubes: res must be >= 8");
  const int np = res + 1;  // grid points per axis
  const Vec<3> cell = box.extent() / res;

  std::vector<double> values(static_cast<size_t>(np) * np * np);
  auto vidx = [np](int x, int y, int z) {
    return (static_cast<size_t>(z) * np + y) * np + x;
  };
  for (int z = 0; z < np; ++z) {
    for (int y = 0; y < np; ++y) {
      for (int x = 0; x < np; ++x) {
        const Vec<3> p = box.lo + Vec<3>(x * cell[0], y * cell[1], z * cell[2]);
        values[vidx(x, y, z)] = field(p);
      }
    }
  }

  // Corner ordering of the classic tables.
  static constexpr int kCorner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0},
                                        {0, 1, 0}, {0, 0, 1}, {1, 0, 1},
                                        {1, 1, 1}, {0, 1, 1}};
  static constexpr int kEdge[12][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0},
                                       {4, 5}, {5, 6}, {6, 7}, {7, 4},
                                       {0, 4}, {1, 5}, {2, 6}, {3, 7}};

  TriMesh mesh;
  // Crossing vertices are welded on their grid edge (lower endpoint, axis) so
  // neighboring cells share them and the surface closes up exactly.
  std::unordered_map<std::uint64_t, int> edge_to_vertex;
  int corner_grid[8][3];
  Vec<3> corner_pos[8];
  double corner_val[8];
  int edge_vertex[12];
  for (int z = 0; z < res; ++z) {
    for (int y = 0; y < res; ++y) {
      for (int x = 0; x < res; ++x) {
        int cube_index = 0;
        for (int c = 0; c < 8; ++c) {
          const int cx = x + kCorner[c][0];
          const int cy = y + kCorner[c][1];
          const int cz = z + kCorner[c][2];
          corner_grid[c][0] = cx;
          corner_grid[c][1] = cy;
          corner_grid[c][2] = cz;
          corner_val[c] = values[vidx(cx, cy, cz)];
          corner_pos[c] =
              box.lo + Vec<3>(cx * cell[0], cy * cell[1], cz * cell[2]);
          if (corner_val[c] < level) cube_index |= 1 << c;
        }
        const int edges = detail::kMcEdgeTable[cube_index];
        if (edges == 0) continue;
        for (int e = 0; e < 12; ++e) {
          if (!(edges & (1 << e))) continue;
          const int a = kEdge[e][0];
          const int b = kEdge[e][1];
          int axis = 0;
          while (corner_grid[a][axis] == corner_grid[b][axis]) ++axis;
          const int* low = corner_grid[a][axis] < corner_grid[b][axis]
                               ? corner_grid[a]
                               : corner_grid[b];
          const std::uint64_t key =
              3 * static_cast<std::uint64_t>(vidx(low[0], low[1], low[2])) +
              axis;
          const auto found = edge_to_vertex.find(key);
          if (found != edge_to_vertex.end()) {
            edge_vertex[e] = found->second;
            continue;
          }
          const double va = corner_val[a];
          const double vb = corner_val[b];
          double mu = 0.5;
          if (std::abs(vb - va) > 1e-300) mu = (level - va) / (vb - va);
          mu = std::clamp(mu, 0.0, 1.0);
          edge_vertex[e] = static_cast<int>(mesh.vertices.size());
          edge_to_vertex.emplace(key, edge_vertex[e]);
          mesh.vertices.push_back(corner_pos[a] +
                                  mu * (corner_pos[b] - corner_pos[a]));
        }
        const int* tris = detail::kMcTriTable[cube_index];
        for (int t = 0; tris[t] != -1; t += 3) {
          // The tables wind clockwise seen from outside; swap for outward
          // CCW faces so signed volumes come out positive.
          mesh.triangles.push_back({edge_vertex[tris[t]],
                                    edge_vertex[tris[t + 2]],
                                    edge_vertex[tris[t + 1]]});
        }
      }
    }
  }
  if (mesh.triangles.empty()) {
    throw std::runtime_error("marching_cubes: level set is empty in the box");
  }
  return mesh;
}

}  // namespace cvxfit
