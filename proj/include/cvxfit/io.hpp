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

#include <json.hpp>

#include "cvxfit/core.hpp"
#include "cvxfit/optimize.hpp"

namespace cvxfit {

/// Model files are JSON: {"version", "dim", "sigma", "logsumexp_normalized",
/// "convexes": [{"c", "delta", "planes": [{"n", "d"}]}]}. Normals are stored
/// unit length and re-normalized on load.
template <int D>
nlohmann::json decomposition_to_json(const Decomposition<D>& dec) {
  nlohmann::json j;
  j["version"] = 1;
  j["dim"] = D;
  j["sigma"] = dec.sigma;
  j["logsumexp_normalized"] = dec.normalized_logsumexp;
  j["convexes"] = nlohmann::json::array();
  for (const auto& e : dec.elements) {
    nlohmann::json je;
    je["c"] = std::vector<double>(e.translation.data(), e.translation.data() + D);
    je["delta"] = e.delta;
    je["planes"] = nlohmann::json::array();
    for (const auto& plane : e.planes) {
      const Vec<D> n = plane.unit_normal();
      nlohmann::json jp;
      jp["n"] = std::vector<double>(n.data(), n.data() + D);
      jp["d"] = plane.offset;
      je["planes"].push_back(jp);
    }
    j["convexes"].push_back(je);
  }
  return j;
}

template <int D>
Decomposition<D> decomposition_from_json(const nlohmann::json& j) {
  if (!j.contains("dim") || j["dim"].get<int>() != D) {
    throw std::runtime_error("model file dimension mismatch");
  }
  Decomposition<D> dec;
  dec.sigma = j.value("sigma", 75.0);
  dec.normalized_logsumexp = j.value("logsumexp_normalized", true);
  for (const auto& je : j.at("convexes")) {
    ConvexElement<D> e;
    const auto c = je.at("c").get<std::vector<double>>();
    if (static_cast<int>(c.size()) != D) {
      throw std::runtime_error("model file: bad translation length");
    }
    for (int d = 0; d < D; ++d) e.translation[d] = c[d];
    e.delta = je.at("delta").get<double>();
    for (const auto& jp : je.at("planes")) {
      const auto n = jp.at("n").get<std::vector<double>>();
      if (static_cast<int>(n.size()) != D) {
        throw std::runtime_error("model file: bad normal length");
      }
      Hyperplane<D> plane;
      for (int d = 0; d < D; ++d) plane.normal_raw[d] = n[d];
      const double len = plane.normal_raw.norm();
      if (len < kMinRawNormalNorm) {
        throw std::runtime_error("model file: zero normal");
      }
      plane.normal_raw /= len;
      plane.offset = jp.at("d").get<double>();
      e.planes.push_back(plane);
    }
    if (e.planes.empty()) throw std::runtime_error("model file: empty convex");
    dec.elements.push_back(e);
  }
  if (dec.elements.empty()) throw std::runtime_error("model file: no convexes");
  return dec;
}

template <int D>
void save_decomposition(const std::string& path, const Decomposition<D>& dec) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << decomposition_to_json(dec).dump(2) << "\n";
}

template <int D>
Decomposition<D> load_decomposition(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& err) {
    throw std::runtime_error("bad model file " + path + ": " + err.what());
  }
  return decomposition_from_json<D>(j);
}

/// Training log as JSON lines, one record per step; `iou` appears on the
/// steps where it was evaluated.
inline void save_fit_report(const std::string& path, const FitReport& report) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (const auto& r : report.records) {
    nlohmann::json j;
    j["step"] = r.step;
    j["approx"] = r.terms.approx;
    j["decomp"] = r.terms.decomp;
    j["unique"] = r.terms.unique;
    j["guide"] = r.terms.guide;
    j["loc"] = r.terms.loc;
    j["merged"] = r.terms.merged;
    j["total"] = r.terms.total;
    if (r.iou) j["iou"] = *r.iou;
    out << j.dump() << "\n";
  }
  nlohmann::json tail;
  tail["final_iou"] = report.final_iou;
  if (report.diverged) {
    tail["diverged"] = true;
    tail["error"] = report.error;
  }
  out << tail.dump() << "\n";
}

}  // namespace cvxfit
