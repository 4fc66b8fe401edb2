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
//
// End-to-end acceptance checks. Usage:
//   acceptance <path-to-cli-binary> <path-to-data-dir>
// Prints one PASS/FAIL line per criterion and exits nonzero if any fail.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "cvxfit/csg.hpp"
#include "cvxfit/extract.hpp"
#include "cvxfit/io.hpp"
#include "cvxfit/marching_cubes.hpp"
#include "cvxfit/metrics.hpp"
#include "cvxfit/optimize.hpp"

namespace fs = std::filesystem;
using namespace cvxfit;

namespace {

double now_s() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

struct Runner {
  bool all_ok = true;

  void run(int idx, const std::string& name,
           const std::function<std::string()>& body) {
    const double t0 = now_s();
    std::string detail;
    bool ok = true;
    try {
      detail = body();
    } catch (const std::exception& err) {
      ok = false;
      detail = std::string("exception: ") + err.what();
    }
    if (detail.rfind("FAIL", 0) == 0) ok = false;
    std::ostringstream line;
    line.precision(4);
    line << (ok ? "PASS" : "FAIL") << " criterion " << idx << " (" << name
         << "): " << detail << " [" << now_s() - t0 << " s]";
    std::cout << line.str() << std::endl;
    all_ok &= ok;
  }
};

// ---------------------------------------------------------------------------
// Shared generators

Eigen::Matrix3d random_rotation(Rng* rng) {
  Eigen::Vector4d q(rng->normal(), rng->normal(), rng->normal(), rng->normal());
  q.normalize();
  return Eigen::Quaterniond(q[0], q[1], q[2], q[3]).toRotationMatrix();
}

// A bounded random convex: six rotated axis-tangent planes guarantee
// boundedness, further random planes carve it.
ConvexElement<3> random_bounded_element(Rng* rng, int h_count) {
  ConvexElement<3> e;
  e.delta = rng->uniform(20.0, 100.0);
  e.translation = Vec<3>(rng->uniform(-0.5, 0.5), rng->uniform(-0.5, 0.5),
                         rng->uniform(-0.5, 0.5));
  const Eigen::Matrix3d rot = random_rotation(rng);
  for (int a = 0; a < 3; ++a) {
    for (int s : {1, -1}) {
      Hyperplane<3> p;
      p.normal_raw = s * rot.col(a);
      p.offset = -rng->uniform(0.5, 1.0);
      e.planes.push_back(p);
    }
  }
  for (int h = 6; h < h_count; ++h) {
    Hyperplane<3> p;
    p.normal_raw = rng->unit_vector<3>();
    p.offset = -rng->uniform(0.5, 1.0);
    e.planes.push_back(p);
  }
  return e;
}

template <int D>
ConvexElement<D> random_element(Rng* rng, int h_count) {
  ConvexElement<D> e;
  e.delta = rng->uniform(2.0, 20.0);
  for (int d = 0; d < D; ++d) e.translation[d] = rng->uniform(-0.3, 0.3);
  for (int h = 0; h < h_count; ++h) {
    Hyperplane<D> p;
    p.normal_raw = rng->uniform(0.3, 2.0) * rng->template unit_vector<D>();
    p.offset = rng->uniform(-1.2, -0.2);
    e.planes.push_back(p);
  }
  return e;
}

template <int D>
Decomposition<D> random_decomposition(Rng* rng, int k_count, int h_count) {
  Decomposition<D> dec;
  for (int k = 0; k < k_count; ++k) {
    dec.elements.push_back(random_element<D>(rng, h_count));
  }
  return dec;
}

// ---------------------------------------------------------------------------
// Criterion 1: analytic vs finite-difference gradients, per loss and total.

template <int D>
double fd_max_error(std::uint64_t seed, int k_count, int h_count) {
  Rng rng(seed);
  auto dec = random_decomposition<D>(&rng, k_count, h_count);
  const auto layout = ParamLayout<D>::of(dec);

  SampleSet<D> s_volume;
  s_volume.source = SampleSource::kVolume;
  for (int i = 0; i < 96; ++i) {
    Vec<D> x;
    for (int d = 0; d < D; ++d) x[d] = rng.uniform(-1.5, 1.5);
    s_volume.points.push_back(x);
    s_volume.labels.push_back(i < 24 ? 1.0 : (rng.uniform() < 0.5 ? 1.0 : 0.0));
  }
  SampleSet<D> s_surface;
  s_surface.source = SampleSource::kNearSurface;
  for (int i = 0; i < 32; ++i) {
    Vec<D> x;
    for (int d = 0; d < D; ++d) x[d] = rng.uniform(-1.2, 1.2);
    s_surface.points.push_back(x);
    s_surface.labels.push_back(rng.uniform() < 0.5 ? 1.0 : 0.0);
  }

  std::vector<LossWeights> modes;
  {
    LossWeights base;
    base.w_approx = base.w_decomp = base.w_unique = base.w_guide = base.w_loc =
        0.0;
    base.n_guide = 8;
    LossWeights w = base;
    w.w_approx = 1.0;
    modes.push_back(w);
    w = base;
    w.w_decomp = 1.0;
    modes.push_back(w);
    w = base;
    w.w_unique = 1.0;
    modes.push_back(w);
    w = base;
    w.w_guide = 1.0;
    modes.push_back(w);
    w = base;
    w.w_loc = 1.0;
    modes.push_back(w);
    w = base;
    w.w_loc = 1.0;
    w.use_merged = true;
    modes.push_back(w);
    LossWeights total;  // all defaults on
    total.n_guide = 8;
    modes.push_back(total);
  }

  double worst = 0.0;
  ParamVector params = pack(dec);
  ParamVector grad;
  ParamVector scratch_grad;
  const double h = 1e-5;
  for (const auto& w : modes) {
    unpack(params, &dec);
    total_loss_and_grad(dec, s_volume, s_surface, w, &grad);
    for (int i = 0; i < params.size(); ++i) {
      ParamVector p = params;
      p[i] += h;
      unpack(p, &dec);
      const double up =
          total_loss_and_grad(dec, s_volume, s_surface, w, &scratch_grad)
              .total;
      p[i] -= 2.0 * h;
      unpack(p, &dec);
      const double dn =
          total_loss_and_grad(dec, s_volume, s_surface, w, &scratch_grad)
              .total;
      const double fd = (up - dn) / (2.0 * h);
      const double err = std::abs(fd - grad[i]);
      const double scale = std::max(std::abs(fd), std::abs(grad[i]));
      const double tol = std::max(1e-8, 1e-4 * scale);
      if (err > tol) {
        worst = std::max(worst, err / std::max(scale, 1e-8));
      }
    }
  }
  return worst;
}

std::string criterion_gradients() {
  const double t0 = now_s();
  struct Cfg {
    int dim, k, h;
    std::uint64_t seed;
  };
  std::vector<Cfg> cfgs;
  std::uint64_t seed = 100;
  for (int dim : {2, 3}) {
    for (int k : {1, 2, 4}) {
      for (int h : {4, 8}) cfgs.push_back({dim, k, h, seed++});
    }
  }
  // 12 combos; repeat a spread of them with fresh seeds to reach 20.
  for (int i = 0; i < 8; ++i) {
    Cfg c = cfgs[i % 12];
    c.seed = seed++;
    cfgs.push_back(c);
  }
  double worst = 0.0;
  for (const auto& c : cfgs) {
    const double e = c.dim == 2 ? fd_max_error<2>(c.seed, c.k, c.h)
                                : fd_max_error<3>(c.seed, c.k, c.h);
    worst = std::max(worst, e);
  }
  const double elapsed = now_s() - t0;
  std::ostringstream out;
  out.precision(4);
  if (worst > 0.0) {
    out << "FAIL: worst relative gradient error " << worst;
  } else if (elapsed >= 60.0) {
    out << "FAIL: suite took " << elapsed << " s (limit 60)";
  } else {
    out << "20 configs, all gradients within tolerance";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Criterion 2: the union of indicators equals the indicator of the min field.

std::string criterion_union_identity() {
  Rng rng(200);
  auto dec = random_decomposition<3>(&rng, 5, 6);
  dec.sigma = 75.0;
  int mismatches = 0;
  for (int i = 0; i < 100000; ++i) {
    const Vec<3> x(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3));
    double via_max = 0.0;
    for (const auto& e : dec.elements) {
      via_max = std::max(via_max, indicator(e, x, dec.sigma,
                                            dec.normalized_logsumexp));
    }
    const double via_min = sigmoid(-dec.sigma * min_smooth_sdf(dec, x));
    if (via_max != via_min) ++mismatches;
  }
  if (mismatches > 0) {
    return "FAIL: " + std::to_string(mismatches) +
           " of 100000 probes not bit-equal";
  }
  return "bit-equal on 100000 probes";
}

// ---------------------------------------------------------------------------
// Criterion 3: max_h H_h <= Phi <= max_h H_h + ln(H)/delta.

std::string criterion_smooth_max_bound() {
  Rng rng(300);
  int violations = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto e = random_element<3>(&rng, 4 + static_cast<int>(
                                               rng.uniform_index(16)));
    const double bound = std::log(static_cast<double>(e.num_planes())) / e.delta;
    for (int i = 0; i < 1000; ++i) {
      const Vec<3> x(rng.uniform(-3, 3), rng.uniform(-3, 3),
                     rng.uniform(-3, 3));
      const double hard = hard_sdf(e, x);
      const double smooth = smooth_sdf(e, x);
      if (smooth < hard - 1e-12 || smooth > hard + bound + 1e-12) ++violations;
    }
  }
  if (violations > 0) {
    return "FAIL: " + std::to_string(violations) + " of 100000 bound violations";
  }
  return "bounds hold on 100000 probes";
}

// ---------------------------------------------------------------------------
// Criteria 4 and 5 share 100 random bounded convexes.

struct ExtractionStats {
  double worst_vertex_sdf = 0.0;
  double worst_volume_err = 0.0;
  double worst_chamfer_ratio = 0.0;  // chamfer / grid spacing
  std::string failure;
};

ExtractionStats extraction_survey() {
  ExtractionStats st;
  Rng rng(400);
  for (int trial = 0; trial < 100; ++trial) {
    const int h_count = 6 + static_cast<int>(rng.uniform_index(25));  // 6..30
    const auto e = random_bounded_element(&rng, h_count);
    TriMesh mesh;
    try {
      mesh = planes_to_mesh(e);
    } catch (const std::exception& err) {
      st.failure = "convex " + std::to_string(trial) + ": " + err.what();
      return st;
    }
    for (const auto& v : mesh.vertices) {
      st.worst_vertex_sdf = std::max(st.worst_vertex_sdf, hard_sdf(e, v));
    }

    // Stratified Monte-Carlo volume: one jittered sample per grid cell,
    // about 100k cells over a tight bounding box.
    const Aabb3 box = mesh_bounds(mesh).inflated(0.02);
    const int res = 46;  // 46^3 = 97336 samples
    const Vec<3> cell = box.extent() / res;
    long long inside = 0;
    for (int z = 0; z < res; ++z) {
      for (int y = 0; y < res; ++y) {
        for (int x = 0; x < res; ++x) {
          const Vec<3> p =
              box.lo + Vec<3>((x + rng.uniform()) * cell[0],
                              (y + rng.uniform()) * cell[1],
                              (z + rng.uniform()) * cell[2]);
          if (hard_sdf(e, p) < 0.0) ++inside;
        }
      }
    }
    const double box_vol = box.extent().prod();
    const double mc_vol = box_vol * inside / (static_cast<double>(res) * res * res);
    const double vol = mesh_volume(mesh);
    st.worst_volume_err =
        std::max(st.worst_volume_err, std::abs(mc_vol - vol) / vol);

    // Criterion 5 on the same convex: distance between the exact surface and
    // the res-128 iso-surface, in grid spacings.
    const Aabb3 mc_box = mesh_bounds(mesh).inflated(0.1);
    const TriMesh iso = marching_cubes(
        [&](const Vec<3>& p) { return hard_sdf(e, p); }, mc_box, 128);
    if (iso.empty()) {
      st.failure = "convex " + std::to_string(trial) + ": empty iso-surface";
      return st;
    }
    const double spacing = mc_box.extent().maxCoeff() / 128.0;
    const auto sa = mesh_surface_samples(mesh, 20000, 401);
    const auto sb = mesh_surface_samples(iso, 20000, 402);
    const double ch = chamfer_l1(sa, sb, 4);
    st.worst_chamfer_ratio = std::max(st.worst_chamfer_ratio, ch / spacing);
  }
  return st;
}

std::string criterion_extraction_soundness(const ExtractionStats& st) {
  std::ostringstream out;
  out.precision(4);
  if (!st.failure.empty()) return "FAIL: " + st.failure;
  if (st.worst_vertex_sdf > 1e-6) {
    out << "FAIL: vertex hard-sdf up to " << st.worst_vertex_sdf;
    return out.str();
  }
  if (st.worst_volume_err > 0.01) {
    out << "FAIL: volume error up to " << 100.0 * st.worst_volume_err << "%";
    return out.str();
  }

  // Exact cube reproduction.
  ConvexElement<3> cube;
  cube.delta = 100.0;
  for (int a = 0; a < 3; ++a) {
    for (int s : {1, -1}) {
      Hyperplane<3> p;
      p.normal_raw = Vec<3>::Zero();
      p.normal_raw[a] = s;
      p.offset = -0.5;
      cube.planes.push_back(p);
    }
  }
  const TriMesh mesh = planes_to_mesh(cube);
  if (mesh.vertices.size() != 8) {
    return "FAIL: cube produced " + std::to_string(mesh.vertices.size()) +
           " vertices";
  }
  for (const auto& v : mesh.vertices) {
    for (int d = 0; d < 3; ++d) {
      if (std::abs(std::abs(v[d]) - 0.5) > 1e-9) {
        return "FAIL: cube vertex off the corner lattice";
      }
    }
  }
  out << "100 convexes: vertex sdf <= " << st.worst_vertex_sdf
      << ", volume err <= " << 100.0 * st.worst_volume_err
      << "%, cube corners exact";
  return out.str();
}

std::string criterion_extraction_vs_iso(const ExtractionStats& st) {
  std::ostringstream out;
  out.precision(4);
  if (!st.failure.empty()) return "FAIL: " + st.failure;
  if (st.worst_chamfer_ratio > 2.0) {
    out << "FAIL: chamfer up to " << st.worst_chamfer_ratio
        << " grid spacings (limit 2)";
  } else {
    out << "chamfer <= " << st.worst_chamfer_ratio
        << " grid spacings over 100 convexes";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Criterion 6: iso-surfacing cost scales with resolution, extraction does not.

struct CmdResult {
  int status = -1;
  std::string output;
};

CmdResult run_command(const std::string& cmd) {
  CmdResult r;
  std::unique_ptr<FILE, int (*)(FILE*)> pipe(
      popen((cmd + " 2>&1").c_str(), "r"), pclose);
  if (!pipe) return r;
  char buf[4096];
  while (fgets(buf, sizeof(buf), pipe.get())) r.output += buf;
  FILE* raw = pipe.release();
  r.status = pclose(raw);
  return r;
}

double parse_value(const std::string& text, const std::string& key) {
  const auto pos = text.find(key);
  if (pos == std::string::npos) {
    throw std::runtime_error("missing " + key + " in: " + text);
  }
  return std::stod(text.substr(pos + key.size()));
}

std::string criterion_resolution_independence(const std::string& cli,
                                              const fs::path& work) {
  Rng rng(600);
  Decomposition<3> dec;
  for (int k = 0; k < 100; ++k) {
    auto e = random_bounded_element(&rng, 30);
    // Spread the convexes out so the union spans a real volume.
    const Vec<3> shift(rng.uniform(-4, 4), rng.uniform(-4, 4),
                       rng.uniform(-4, 4));
    // Moving the world position by `shift` means shifting offsets, since the
    // field evaluates planes at x + c.
    for (auto& p : e.planes) p.offset -= p.unit_normal().dot(shift);
    dec.elements.push_back(e);
  }
  const std::string model = (work / "timing_model.json").string();
  save_decomposition(model, dec);

  auto mc_time = [&](int res) {
    const auto r = run_command(cli + " mc --model " + model + " --res " +
                               std::to_string(res));
    if (r.status != 0) throw std::runtime_error("mc failed: " + r.output);
    return parse_value(r.output, "mc_time_s=");
  };
  auto extract_time = [&]() {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) {
      const auto r = run_command(cli + " extract --model " + model + " --out " +
                                 (work / "timing_union.obj").string());
      if (r.status != 0) throw std::runtime_error("extract failed: " + r.output);
      best = std::min(best, parse_value(r.output, "extract_time_s="));
    }
    return best;
  };

  const double ex_a = extract_time();
  const double t64 = mc_time(64);
  const double t128 = mc_time(128);
  const double ex_b = extract_time();

  const double ratio = t128 / t64;
  const double ex_var = std::abs(ex_a - ex_b) / std::min(ex_a, ex_b);
  std::ostringstream out;
  out.precision(4);
  out << "mc " << t64 << "s -> " << t128 << "s (x" << ratio << "), extract "
      << ex_a << "s vs " << ex_b << "s (" << 100.0 * ex_var << "% drift)";
  if (ratio < 6.0) return "FAIL: resolution scaling only x" + out.str();
  if (ex_var >= 0.10) return "FAIL: extract drift too large: " + out.str();
  return out.str();
}

// ---------------------------------------------------------------------------
// Criterion 7: gradient descent on the offset-magnitude loss reaches the
// closed-form least-squares center.

std::string criterion_unique_centering() {
  Rng rng(700);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int h_count = 6 + static_cast<int>(rng.uniform_index(15));
    const auto e = random_bounded_element(&rng, h_count);
    std::vector<Hyperplane<3>> planes;
    for (const auto& p : e.planes) {
      Hyperplane<3> q;
      q.normal_raw = p.unit_normal();
      q.offset = p.offset;
      planes.push_back(q);
    }
    const Vec<3> closed = center_offsets_closed_form(planes);

    // Descend sum_h (d_h + n_h . t)^2 over the shift t alone.
    Vec<3> t(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    const double lr = 1.0 / (2.0 * h_count);
    for (int it = 0; it < 20000; ++it) {
      Vec<3> g = Vec<3>::Zero();
      for (const auto& p : planes) {
        g += 2.0 * (p.offset + p.normal_raw.dot(t)) * p.normal_raw;
      }
      t -= lr * g;
      if (g.norm() < 1e-12) break;
    }
    worst = std::max(worst, (t - closed).norm());
  }
  std::ostringstream out;
  out.precision(4);
  if (worst > 1e-6) {
    out << "FAIL: descent vs closed form differ by " << worst;
  } else {
    out << "20 plane sets agree within " << worst;
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Criteria 8 and 9: fit benchmarks and loss ablations.

struct BenchResults {
  double cube_iou = 0.0;
  double lshape_iou = 0.0;
  double plus_iou = 0.0;
  FitConfig lshape_cfg;
  std::shared_ptr<TargetOracle<3>> lshape_oracle;
};

BenchResults run_benchmarks(const fs::path& data) {
  BenchResults b;
  {
    const auto oracle = make_csg_oracle(std::make_shared<CsgSolid>(
        CsgSolid::parse_file((data / "cube.csg").string())));
    FitConfig cfg;
    cfg.num_elements = 1;
    cfg.planes_per_element = 6;
    b.cube_iou = fit(oracle, cfg).report.final_iou;
  }
  {
    b.lshape_oracle = std::make_shared<TargetOracle<3>>(
        make_csg_oracle(std::make_shared<CsgSolid>(
            CsgSolid::parse_file((data / "lshape.csg").string()))));
    FitConfig cfg;
    cfg.num_elements = 4;
    cfg.planes_per_element = 8;
    cfg.iters = 20000;
    b.lshape_cfg = cfg;
    b.lshape_iou = fit(*b.lshape_oracle, cfg).report.final_iou;
  }
  {
    const auto oracle = make_image_oracle(
        std::make_shared<BinaryImage>(load_pgm((data / "plus.pgm").string())));
    FitConfig cfg;
    cfg.num_elements = 5;
    cfg.planes_per_element = 8;
    cfg.iters = 20000;
    b.plus_iou = fit(oracle, cfg).report.final_iou;
  }
  return b;
}

std::string criterion_benchmarks(const BenchResults& b) {
  std::ostringstream out;
  out.precision(4);
  out << "cube " << b.cube_iou << " (>=0.98), lshape " << b.lshape_iou
      << " (>=0.90), plus " << b.plus_iou << " (>=0.92)";
  if (b.cube_iou < 0.98 || b.lshape_iou < 0.90 || b.plus_iou < 0.92) {
    return "FAIL: " + out.str();
  }
  return out.str();
}

std::string criterion_ablations(const BenchResults& b) {
  FitConfig no_guide = b.lshape_cfg;
  no_guide.weights.w_guide = 0.0;
  FitConfig no_loc = b.lshape_cfg;
  no_loc.weights.w_loc = 0.0;
  FitConfig merged = b.lshape_cfg;
  merged.weights.use_merged = true;

  const double iou_full = b.lshape_iou;
  const double iou_no_guide = fit(*b.lshape_oracle, no_guide).report.final_iou;
  const double iou_no_loc = fit(*b.lshape_oracle, no_loc).report.final_iou;
  const auto merged_result = fit(*b.lshape_oracle, merged);
  const double iou_merged = merged_result.report.final_iou;

  std::ostringstream out;
  out.precision(5);
  out << "full " << iou_full << ", -guide " << iou_no_guide << ", -loc "
      << iou_no_loc << ", merged " << iou_merged;
  if (merged_result.report.diverged) {
    return "FAIL: merged run diverged (" + merged_result.report.error + ")";
  }
  if (iou_no_guide > iou_full || iou_no_loc > iou_full) {
    return "FAIL: ablation did not reduce IoU: " + out.str();
  }
  if (std::abs(iou_merged - iou_full) > 0.05) {
    return "FAIL: merged mode drifted beyond 0.05: " + out.str();
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Criterion 10: the metric estimators themselves.

std::string criterion_metric_estimators() {
  const auto box_a = [](const Vec<3>& x) {
    return (x.array() >= 0.0).all() && (x.array() <= 1.0).all() ? 1.0 : 0.0;
  };
  const auto box_b = [](const Vec<3>& x) {
    return x[0] >= 0.5 && x[0] <= 1.5 && x[1] >= 0.0 && x[1] <= 1.0 &&
                   x[2] >= 0.0 && x[2] <= 1.0
               ? 1.0
               : 0.0;
  };
  const double iou = volumetric_iou<3>(box_a, box_b, Vec<3>(-0.2, -0.2, -0.2),
                                       Vec<3>(1.7, 1.2, 1.2), 100000, 0);
  if (std::abs(iou - 1.0 / 3.0) > 0.01) {
    return "FAIL: cube-pair IoU " + std::to_string(iou);
  }

  Rng rng(1000);
  std::vector<Vec<3>> sa, sb;
  for (int i = 0; i < 20000; ++i) sa.push_back(1.0 * rng.unit_vector<3>());
  for (int i = 0; i < 20000; ++i) sb.push_back(0.9 * rng.unit_vector<3>());
  const double ch = chamfer_l1(sa, sb, 4);
  if (std::abs(ch - 0.1) > 0.005) {
    return "FAIL: concentric-sphere chamfer " + std::to_string(ch);
  }
  const double f_low = f_score(sa, sb, 0.05, 4);
  const double f_high = f_score(sa, sb, 0.15, 4);
  std::ostringstream out;
  out.precision(4);
  out << "iou " << iou << ", chamfer " << ch << ", f-score " << f_low
      << "% -> " << f_high << "%";
  if (f_low > 1.0 || f_high < 99.0) return "FAIL: " + out.str();
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: acceptance <cli-binary> <data-dir>\n";
    return 2;
  }
  const std::string cli = argv[1];
  const fs::path data = argv[2];
  const fs::path work =
      fs::temp_directory_path() / "cvxfit_acceptance_work";
  fs::create_directories(work);

  Runner r;
  r.run(1, "gradient suite", criterion_gradients);
  r.run(2, "union identity", criterion_union_identity);
  r.run(3, "smooth-max bound", criterion_smooth_max_bound);
  const ExtractionStats survey = extraction_survey();
  r.run(4, "extraction soundness",
        [&] { return criterion_extraction_soundness(survey); });
  r.run(5, "extraction vs iso-surface",
        [&] { return criterion_extraction_vs_iso(survey); });
  r.run(6, "resolution independence",
        [&] { return criterion_resolution_independence(cli, work); });
  r.run(7, "offset-loss centering", criterion_unique_centering);
  BenchResults bench;
  r.run(8, "fit benchmarks", [&] {
    bench = run_benchmarks(data);
    return criterion_benchmarks(bench);
  });
  r.run(9, "loss ablations", [&] {
    if (!bench.lshape_oracle) return std::string("FAIL: benchmarks unavailable");
    return criterion_ablations(bench);
  });
  r.run(10, "metric estimators", criterion_metric_estimators);

  std::error_code ec;
  fs::remove_all(work, ec);
  std::cout << (r.all_ok ? "ALL CRITERIA PASSED" : "SOME CRITERIA FAILED")
            << std::endl;
  return r.all_ok ? 0 : 1;
}
