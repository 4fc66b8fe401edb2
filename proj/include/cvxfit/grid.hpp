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
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cvxfit/mesh.hpp"

namespace cvxfit {

/// Byte occupancy grid over an axis-aligned box. Values >= 128 are inside.
/// File format (little endian): magic "CVXG", u32 version=1, u32 dims
/// dx,dy,dz, 6 x f32 bbox (min xyz, max xyz), then dx*dy*dz bytes in
/// x-fastest order.
struct OccupancyGrid {
  int dims[3] = {0, 0, 0};
  Aabb3 bounds;
  std::vector<std::uint8_t> values;  // x-fastest

  std::uint8_t at(int ix, int iy, int iz) const {
    return values[static_cast<size_t>(iz) * dims[0] * dims[1] +
                  static_cast<size_t>(iy) * dims[0] + ix];
  }

  Vec<3> cell_size() const {
    Vec<3> e = bounds.extent();
    return {e[0] / dims[0], e[1] / dims[1], e[2] / dims[2]};
  }

  /// Nearest-voxel binary lookup; outside the box is outside the solid.
  bool inside(const Vec<3>& x) const {
    if (!bounds.contains(x)) return false;
    const Vec<3> cs = cell_size();
    int idx[3];
    for (int i = 0; i < 3; ++i) {
      idx[i] = static_cast<int>((x[i] - bounds.lo[i]) / cs[i]);
      idx[i] = std::clamp(idx[i], 0, dims[i] - 1);
    }
    return at(idx[0], idx[1], idx[2]) >= 128;
  }

  /// Trilinear occupancy field in [0,1] over voxel centers; used to feed the
  /// iso-surfacing oracle, while the binary label path stays nearest-voxel.
  double trilinear(const Vec<3>& x) const {
    const Vec<3> cs = cell_size();
    double f[3];
    int i0[3];
    for (int i = 0; i < 3; ++i) {
      const double u = (x[i] - bounds.lo[i]) / cs[i] - 0.5;
      const double fl = std::floor(u);
      i0[i] = static_cast<int>(fl);
      f[i] = u - fl;
    }
    auto sample = [&](int ix, int iy, int iz) -> double {
      ix = std::clamp(ix, 0, dims[0] - 1);
      iy = std::clamp(iy, 0, dims[1] - 1);
      iz = std::clamp(iz, 0, dims[2] - 1);
      return at(ix, iy, iz) / 255.0;
    };
    double acc = 0.0;
    for (int dz = 0; dz < 2; ++dz) {
      for (int dy = 0; dy < 2; ++dy) {
        for (int dx = 0; dx < 2; ++dx) {
          const double w = (dx ? f[0] : 1.0 - f[0]) * (dy ? f[1] : 1.0 - f[1]) *
                           (dz ? f[2] : 1.0 - f[2]);
          acc += w * sample(i0[0] + dx, i0[1] + dy, i0[2] + dz);
        }
      }
    }
    return acc;
  }
};

namespace detail {

template <typename T>
void write_le(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

}  // namespace detail

inline void save_grid(const std::string& path, const OccupancyGrid& g) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write grid file: " + path);
  out.write("CVXG", 4);
  detail::write_le<std::uint32_t>(out, 1);
  for (int i = 0; i < 3; ++i) {
    detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.dims[i]));
  }
  for (int i = 0; i < 3; ++i) {
    detail::write_le<float>(out, static_cast<float>(g.bounds.lo[i]));
  }
  for (int i = 0; i < 3; ++i) {
    detail::write_le<float>(out, static_cast<float>(g.bounds.hi[i]));
  }
  out.write(reinterpret_cast<const char*>(g.values.data()), g.values.size());
}

inline OccupancyGrid load_grid(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open grid file: " + path);
  char magic[4];
  in.read(magic, 4);
  if (std::memcmp(magic, "CVXG", 4) != 0) {
    throw std::runtime_error("not a CVXG file: " + path);
  }
  const auto version = detail::read_le<std::uint32_t>(in);
  if (version != 1) throw std::runtime_error("unsupported CVXG version");
  OccupancyGrid g;
  size_t count = 1;
  for (int i = 0; i < 3; ++i) {
    g.dims[i] = static_cast<int>(detail::read_le<std::uint32_t>(in));
    if (g.dims[i] <= 0) throw std::runtime_error("bad CVXG dims");
    count *= g.dims[i];
  }
  for (int i = 0; i < 3; ++i) g.bounds.lo[i] = detail::read_le<float>(in);
  for (int i = 0; i < 3; ++i) g.bounds.hi[i] = detail::read_le<float>(in);
  g.values.resize(count);
  in.read(reinterpret_cast<char*>(g.values.data()), count);
  if (!in) throw std::runtime_error("truncated CVXG file: " + path);
  return g;
}

/// Binary silhouette image. World box [-0.5, 0.5]^2; pixel values >= 128 are
/// inside. Row 0 of the image is the top of the world box.
struct BinaryImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major

  std::uint8_t at(int col, int row) const {
    return pixels[static_cast<size_t>(row) * width + col];
  }

  bool inside(const Vec<2>& x) const {
    if (x[0] < -0.5 || x[0] > 0.5 || x[1] < -0.5 || x[1] > 0.5) return false;
    int col = static_cast<int>((x[0] + 0.5) * width);
    int row = static_cast<int>((0.5 - x[1]) * height);
    col = std::clamp(col, 0, width - 1);
    row = std::clamp(row, 0, height - 1);
    return at(col, row) >= 128;
  }

  /// Midpoints of pixel edges separating inside from outside (image border
  /// counts as outside); a polyline-free contour representation.
  std::vector<Vec<2>> contour_edge_midpoints() const {
    auto in_px = [&](int col, int row) {
      if (col < 0 || col >= width || row < 0 || row >= height) return false;
      return at(col, row) >= 128;
    };
    auto world = [&](double col, double row) -> Vec<2> {
      return {col / width - 0.5, 0.5 - row / height};
    };
    std::vector<Vec<2>> out;
    for (int row = 0; row < height; ++row) {
      for (int col = 0; col < width; ++col) {
        if (!in_px(col, row)) continue;
        if (!in_px(col - 1, row)) out.push_back(world(col, row + 0.5));
        if (!in_px(col + 1, row)) out.push_back(world(col + 1, row + 0.5));
        if (!in_px(col, row - 1)) out.push_back(world(col + 0.5, row));
        if (!in_px(col, row + 1)) out.push_back(world(col + 0.5, row + 1));
      }
    }
    return out;
  }
};

inline BinaryImage load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open PGM file: " + path);
  std::string magic;
  in >> magic;
  if (magic != "P5") throw std::runtime_error("not a binary PGM (P5): " + path);
  auto next_int = [&in]() {
    int v;
    while (in >> std::ws && in.peek() == '#') {
      std::string comment;
      std::getline(in, comment);
    }
    if (!(in >> v)) throw std::runtime_error("bad PGM header");
    return v;
  };
  BinaryImage img;
  img.width = next_int();
  img.height = next_int();
  const int maxval = next_int();
  if (maxval <= 0 || maxval > 255) throw std::runtime_error("bad PGM maxval");
  in.get();  // single whitespace after maxval
  img.pixels.resize(static_cast<size_t>(img.width) * img.height);
  in.read(reinterpret_cast<char*>(img.pixels.data()), img.pixels.size());
  if (!in) throw std::runtime_error("truncated PGM file: " + path);
  return img;
}

inline void save_pgm(const std::string& path, const BinaryImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write PGM file: " + path);
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            img.pixels.size());
}

}  // namespace cvxfit
