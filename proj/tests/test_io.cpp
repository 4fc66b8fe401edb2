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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <catch2/catch_amalgamated.hpp>

#include "cvxfit/io.hpp"
#include "cvxfit/rng.hpp"

namespace cvxfit {
namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("cvxfit_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

template <int D>
Decomposition<D> random_decomposition(std::uint64_t seed, int k_count,
                                      int h_count) {
  Rng rng(seed);
  Decomposition<D> dec;
  dec.sigma = rng.uniform(10.0, 100.0);
  for (int k = 0; k < k_count; ++k) {
    ConvexElement<D> e;
    e.delta = rng.uniform(1.0, 50.0);
    for (int d = 0; d < D; ++d) e.translation[d] = rng.uniform(-1, 1);
    for (int h = 0; h < h_count; ++h) {
      Hyperplane<D> p;
      p.normal_raw = rng.template unit_vector<D>();
      p.offset = rng.uniform(-1.0, -0.1);
      e.planes.push_back(p);
    }
    dec.elements.push_back(e);
  }
  return dec;
}

TEST_CASE("model files round-trip the field to near machine precision") {
  TempDir tmp;
  const auto dec = random_decomposition<3>(51, 4, 8);
  const auto path = tmp.file("model.json");
  save_decomposition(path, dec);
  const auto back = load_decomposition<3>(path);
  REQUIRE(back.num_elements() == 4);
  REQUIRE(back.planes_per_element() == 8);
  CHECK(back.sigma == Catch::Approx(dec.sigma).epsilon(1e-15));
  Rng rng(53);
  for (int i = 0; i < 1000; ++i) {
    const Vec<3> x(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
    CHECK(min_smooth_sdf(back, x) ==
          Catch::Approx(min_smooth_sdf(dec, x)).margin(1e-12));
  }
}

TEST_CASE("two-dimensional models round-trip as well") {
  TempDir tmp;
  const auto dec = random_decomposition<2>(3, 3, 5);
  const auto path = tmp.file("model2d.json");
  save_decomposition(path, dec);
  const auto back = load_decomposition<2>(path);
  Rng rng(57);
  for (int i = 0; i < 500; ++i) {
    const Vec<2> x(rng.uniform(-2, 2), rng.uniform(-2, 2));
    CHECK(min_smooth_sdf(back, x) ==
          Catch::Approx(min_smooth_sdf(dec, x)).margin(1e-12));
  }
}

TEST_CASE("normals are stored unit length") {
  TempDir tmp;
  auto dec = random_decomposition<3>(59, 1, 6);
  // Scale a raw normal; the field is invariant because offsets pair with
  // unit normals in the file format only if the writer normalizes.
  dec.elements[0].planes[0].normal_raw *= 7.0;
  const auto j = decomposition_to_json(dec);
  const auto n = j["convexes"][0]["planes"][0]["n"].get<std::vector<double>>();
  const double len = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
  CHECK(len == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("loading rejects malformed model files") {
  TempDir tmp;
  const auto write = [&](const std::string& name, const std::string& body) {
    std::ofstream out(tmp.file(name));
    out << body;
    return tmp.file(name);
  };
  CHECK_THROWS_WITH(load_decomposition<3>(tmp.file("missing.json")),
                    Catch::Matchers::ContainsSubstring("cannot open"));
  CHECK_THROWS_WITH(load_decomposition<3>(write("garbage.json", "{not json")),
                    Catch::Matchers::ContainsSubstring("bad model file"));
  CHECK_THROWS_WITH(
      load_decomposition<3>(write("empty.json",
                                  R"({"version":1,"dim":3,"convexes":[]})")),
      Catch::Matchers::ContainsSubstring("no convexes"));
  const std::string two_d =
      R"({"version":1,"dim":2,"convexes":[{"c":[0,0],"delta":1,)"
      R"("planes":[{"n":[1,0],"d":-1}]}]})";
  CHECK_THROWS_WITH(load_decomposition<3>(write("dim.json", two_d)),
                    Catch::Matchers::ContainsSubstring("dimension mismatch"));
  const std::string zero_normal =
      R"({"version":1,"dim":3,"convexes":[{"c":[0,0,0],"delta":1,)"
      R"("planes":[{"n":[0,0,0],"d":-1}]}]})";
  CHECK_THROWS_WITH(load_decomposition<3>(write("zn.json", zero_normal)),
                    Catch::Matchers::ContainsSubstring("zero normal"));
}

TEST_CASE("fit reports serialize one json record per step plus a tail") {
  TempDir tmp;
  FitReport report;
  for (int i = 0; i < 3; ++i) {
    FitRecord r;
    r.step = i;
    r.terms.total = 0.5 * i;
    if (i == 2) r.iou = 0.75;
    report.records.push_back(r);
  }
  report.final_iou = 0.9;
  const auto path = tmp.file("report.jsonl");
  save_fit_report(path, report);

  std::ifstream in(path);
  std::string line;
  std::vector<nlohmann::json> lines;
  while (std::getline(in, line)) lines.push_back(nlohmann::json::parse(line));
  REQUIRE(lines.size() == 4);
  CHECK(lines[0]["step"] == 0);
  CHECK_FALSE(lines[0].contains("iou"));
  CHECK(lines[2]["iou"] == 0.75);
  CHECK(lines[2]["total"] == 1.0);
  CHECK(lines[3]["final_iou"] == 0.9);
  CHECK_FALSE(lines[3].contains("diverged"));

  report.diverged = true;
  report.error = "boom";
  save_fit_report(path, report);
  std::ifstream in2(path);
  std::string last;
  while (std::getline(in2, line)) last = line;
  const auto tail = nlohmann::json::parse(last);
  CHECK(tail["diverged"] == true);
  CHECK(tail["error"] == "boom");
}

TEST_CASE("saving to an unwritable path reports the path") {
  const auto dec = random_decomposition<3>(61, 1, 4);
  CHECK_THROWS_WITH(save_decomposition("/nonexistent_dir_xyz/m.json", dec),
                    Catch::Matchers::ContainsSubstring("cannot open"));
}

}  // namespace
}  // namespace cvxfit
