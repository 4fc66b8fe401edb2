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
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cvxfit/mesh.hpp"
#include "cvxfit/rng.hpp"

namespace cvxfit {

/// Analytic solid built from axis-aligned boxes and spheres combined with
/// postfix union/difference operators. Text format, one token group per line:
///   cube cx cy cz sx sy sz
///   sphere cx cy cz r
///   union
///   difference
/// Operators pop two solids and push the result; exactly one solid must
/// remain at the end.
class CsgSolid {
 public:
  static CsgSolid parse(std::istream& in) {
    CsgSolid solid;
    std::vector<int> stack;
    std::string line;
    while (std::getline(in, line)) {
      std::istringstream ss(line);
      std::string op;
      if (!(ss >> op) || op[0] == '#') continue;
      if (op == "cube") {
        Node n;
        n.kind = Node::kCube;
        ss >> n.center[0] >> n.center[1] >> n.center[2] >> n.size[0] >>
            n.size[1] >> n.size[2];
        if (!ss || n.size.minCoeff() <= 0.0) {
          throw std::runtime_error("csg: bad cube line: " + line);
        }
        stack.push_back(solid.add(n));
      } else if (op == "sphere") {
        Node n;
        n.kind = Node::kSphere;
        ss >> n.center[0] >> n.center[1] >> n.center[2] >> n.radius;
        if (!ss || n.radius <= 0.0) {
          throw std::runtime_error("csg: bad sphere line: " + line);
        }
        stack.push_back(solid.add(n));
      } else if (op == "union" || op == "difference") {
        if (stack.size() < 2) {
          throw std::runtime_error("csg: operator needs two operands");
        }
        Node n;
        n.kind = op == "union" ? Node::kUnion : Node::kDifference;
        n.right = stack.back();
        stack.pop_back();
        n.left = stack.back();
        stack.pop_back();
        stack.push_back(solid.add(n));
      } else {
        throw std::runtime_error("csg: unknown token: " + op);
      }
    }
    if (stack.size() != 1) {
      throw std::runtime_error("csg: expression must leave one solid");
    }
    solid.root_ = stack.back();
    return solid;
  }

  static CsgSolid parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open CSG file: " + path);
    return parse(in);
  }

  static CsgSolid parse_string(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
  }

  bool inside(const Vec<3>& x) const { return inside_node(root_, x); }

  /// Union of the primitives' boxes; a difference cannot extend the solid.
  Aabb3 primitive_bounds() const {
    Aabb3 b;
    for (const auto& n : nodes_) {
      if (n.kind == Node::kCube) {
        b.expand(n.center - 0.5 * n.size);
        b.expand(n.center + 0.5 * n.size);
      } else if (n.kind == Node::kSphere) {
        b.expand(n.center - Vec<3>::Constant(n.radius));
        b.expand(n.center + Vec<3>::Constant(n.radius));
      }
    }
    return b;
  }

  /// Uniform samples on the visible boundary: candidates drawn area-weighted
  /// on primitive surfaces, kept when the indicator flips across the surface.
  std::vector<Vec<3>> surface_samples(int n, std::uint64_t seed) const {
    std::vector<const Node*> prims;
    std::vector<double> cumulative;
    double total = 0.0;
    for (const auto& node : nodes_) {
      if (node.kind == Node::kCube || node.kind == Node::kSphere) {
        prims.push_back(&node);
        total += primitive_area(node);
        cumulative.push_back(total);
      }
    }
    if (prims.empty()) throw std::runtime_error("csg: no primitives");
    const double eps = 1e-7 * primitive_bounds().diagonal();
    Rng rng(combine_seeds(seed, 0x5u));
    std::vector<Vec<3>> out;
    out.reserve(n);
    int guard = 0;
    while (static_cast<int>(out.size()) < n) {
      if (++guard > 10000 * n) {
        throw std::runtime_error("csg: surface sampling failed to converge");
      }
      const double target = rng.uniform() * total;
      const size_t pi =
          std::lower_bound(cumulative.begin(), cumulative.end(), target) -
          cumulative.begin();
      const Node& prim = *prims[std::min(pi, prims.size() - 1)];
      Vec<3> p, normal;
      sample_primitive_surface(prim, &rng, &p, &normal);
      if (inside(p - eps * normal) != inside(p + eps * normal)) {
        out.push_back(p);
      }
    }
    return out;
  }

 private:
  struct Node {
    enum Kind { kCube, kSphere, kUnion, kDifference };
    Kind kind = kCube;
    Vec<3> center = Vec<3>::Zero();
    Vec<3> size = Vec<3>::Zero();
    double radius = 0.0;
    int left = -1;
    int right = -1;
  };

  int add(const Node& n) {
    nodes_.push_back(n);
    return static_cast<int>(nodes_.size()) - 1;
  }

  bool inside_node(int i, const Vec<3>& x) const {
    const Node& n = nodes_[i];
    switch (n.kind) {
      case Node::kCube:
        return ((x - n.center).cwiseAbs().array() <= (0.5 * n.size).array())
            .all();
      case Node::kSphere:
        return (x - n.center).norm() <= n.radius;
      case Node::kUnion:
        return inside_node(n.left, x) || inside_node(n.right, x);
      case Node::kDifference:
        return inside_node(n.left, x) && !inside_node(n.right, x);
    }
    return false;
  }

  static double primitive_area(const Node& n) {
    if (n.kind == Node::kCube) {
      return 2.0 * (n.size[0] * n.size[1] + n.size[1] * n.size[2] +
                    n.size[2] * n.size[0]);
    }
    return 4.0 * M_PI * n.radius * n.radius;
  }

  static void sample_primitive_surface(const Node& n, Rng* rng, Vec<3>* p,
                                       Vec<3>* normal) {
    if (n.kind == Node::kSphere) {
      *normal = rng->unit_vector<3>();
      *p = n.center + n.radius * *normal;
      return;
    }
    // Pick a face pair by area, then a sign, then a point on the face.
    const double axy = n.size[0] * n.size[1];
    const double ayz = n.size[1] * n.size[2];
    const double azx = n.size[2] * n.size[0];
    const double pick = rng->uniform() * (axy + ayz + azx);
    int axis;  // axis the face is perpendicular to
    if (pick < ayz) {
      axis = 0;
    } else if (pick < ayz + azx) {
      axis = 1;
    } else {
      axis = 2;
    }
    const double sign = rng->uniform() < 0.5 ? -1.0 : 1.0;
    Vec<3> local;
    for (int i = 0; i < 3; ++i) {
      local[i] = i == axis ? sign * 0.5 * n.size[i]
                           : (rng->uniform() - 0.5) * n.size[i];
    }
    *p = n.center + local;
    *normal = Vec<3>::Zero();
    (*normal)[axis] = sign;
  }

  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace cvxfit
