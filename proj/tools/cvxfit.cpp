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

#include <chrono>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "cvxfit/extract.hpp"
#include "cvxfit/io.hpp"
#include "cvxfit/marching_cubes.hpp"
#include "cvxfit/metrics.hpp"
#include "cvxfit/optimize.hpp"
#include "cvxfit/oracle.hpp"

namespace {

using namespace cvxfit;

std::string extension_of(const std::string& path) {
  return std::filesystem::path(path).extension().string();
}

// Targets are dispatched by extension: .csg/.obj/.cvxg are 3D, .pgm is 2D.
int target_dim(const std::string& path) {
  const std::string ext = extension_of(path);
  if (ext == ".csg" || ext == ".obj" || ext == ".cvxg") return 3;
  if (ext == ".pgm") return 2;
  throw std::runtime_error("unsupported target format: " + path +
                           " (expected .csg, .obj, .cvxg, or .pgm)");
}

TargetOracle<3> load_oracle3(const std::string& path) {
  const std::string ext = extension_of(path);
  if (ext == ".csg") {
    return make_csg_oracle(std::make_shared<CsgSolid>(CsgSolid::parse_file(path)));
  }
  if (ext == ".obj") {
    return make_mesh_oracle(std::make_shared<TriMesh>(load_obj(path)));
  }
  if (ext == ".cvxg") {
    return make_grid_oracle(std::make_shared<OccupancyGrid>(load_grid(path)));
  }
  throw std::runtime_error("unsupported 3D target format: " + path);
}

TargetOracle<2> load_oracle2(const std::string& path) {
  return make_image_oracle(std::make_shared<BinaryImage>(load_pgm(path)));
}

int model_dim(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& err) {
    throw std::runtime_error("bad model file " + path + ": " + err.what());
  }
  return j.at("dim").get<int>();
}

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

struct FitArgs {
  std::string target;
  std::string out;
  std::string report;
  FitConfig cfg;
  bool merged = false;
};

template <int D>
int run_fit(const FitArgs& a, const std::vector<std::string>& overrides) {
  TargetOracle<D> oracle;
  if constexpr (D == 3) {
    oracle = load_oracle3(a.target);
  } else {
    oracle = load_oracle2(a.target);
  }
  FitConfig cfg = a.cfg;
  cfg.weights.use_merged = a.merged;
  FitResult<D> result = fit(oracle, cfg);
  result.report.config_overrides = overrides;
  save_decomposition(a.out, result.decomposition);
  if (!a.report.empty()) save_fit_report(a.report, result.report);
  if (!result.report.records.empty()) {
    const auto& last = result.report.records.back().terms;
    std::cout << "final_total=" << last.total << " approx=" << last.approx
              << " decomp=" << last.decomp << " unique=" << last.unique
              << " guide=" << last.guide << " loc=" << last.loc
              << " merged=" << last.merged << "\n";
  }
  std::cout << "final_iou=" << result.report.final_iou << "\n";
  if (result.report.diverged) {
    std::cerr << "fit aborted: " << result.report.error << "\n";
    return 1;
  }
  return 0;
}

struct ExtractArgs {
  std::string model;
  std::string out;
  std::string per_convex_dir;
};

int run_extract(const ExtractArgs& a) {
  const int dim = model_dim(a.model);
  const double t0 = now_seconds();
  if (dim == 3) {
    const auto dec = load_decomposition<3>(a.model);
    const auto result = decomposition_to_meshes(dec);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
    if (result.meshes.empty()) {
      std::cerr << "error: all convexes degenerate, nothing to write\n";
      return 1;
    }
    if (!a.per_convex_dir.empty()) {
      std::filesystem::create_directories(a.per_convex_dir);
      for (size_t i = 0; i < result.meshes.size(); ++i) {
        const std::string path =
            a.per_convex_dir + "/convex_" +
            std::to_string(result.element_indices[i]) + ".obj";
        save_obj(path, result.meshes[i]);
      }
    }
    if (!a.out.empty()) save_obj(a.out, merge_meshes(result.meshes));
  } else {
    const auto dec = load_decomposition<2>(a.model);
    const auto result = decomposition_to_polygons(dec);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
    if (result.polygons.empty()) {
      std::cerr << "error: all convexes degenerate, nothing to write\n";
      return 1;
    }
    double lo = -0.5, hi = 0.5;
    for (const auto& poly : result.polygons) {
      for (const auto& v : poly.vertices) {
        lo = std::min({lo, v[0], v[1]});
        hi = std::max({hi, v[0], v[1]});
      }
    }
    if (!a.out.empty()) save_svg(a.out, result.polygons, lo, hi);
  }
  std::cout << "extract_time_s=" << now_seconds() - t0 << "\n";
  return 0;
}

struct EvalArgs {
  std::string model;
  std::string target;
  std::string out;
  int iou_samples = 100000;
  int surface_samples = 100000;
  double f_threshold = 0.0;  // 0 = 1% of bbox diagonal
  std::uint64_t seed = 0;
  int threads = 1;
  int grid_res = 64;
};

int run_eval_3d(const EvalArgs& a) {
  const auto dec = load_decomposition<3>(a.model);
  const auto oracle = load_oracle3(a.target);
  MetricsReport rep;
  rep.iou_samples = a.iou_samples;
  rep.surface_samples = a.surface_samples;
  rep.seed = a.seed;
  rep.iou = decomposition_iou(dec, oracle, a.iou_samples, a.seed);
  rep.f_threshold = a.f_threshold > 0.0 ? a.f_threshold
                                        : 0.01 * oracle.bbox_diagonal();

  const auto extraction = decomposition_to_meshes(dec);
  for (const auto& w : extraction.warnings) std::cerr << "warning: " << w << "\n";
  if (extraction.meshes.empty()) {
    std::cerr << "error: all convexes degenerate\n";
    return 1;
  }
  const TriMesh reconstruction = merge_meshes(extraction.meshes);
  const auto rec_pts = mesh_surface_samples(reconstruction, a.surface_samples,
                                            combine_seeds(a.seed, 11));
  std::vector<Vec<3>> target_pts;
  if (oracle.has_surface()) {
    target_pts =
        oracle.surface_samples(a.surface_samples, combine_seeds(a.seed, 12));
  } else {
    // Occupancy grids carry no surface; fall back to an iso-surfaced one.
    const Aabb3 box{oracle.box_lo, oracle.box_hi};
    const TriMesh grid_surface = marching_cubes(
        [&](const Vec<3>& x) { return oracle.inside(x) ? -1.0 : 1.0; }, box,
        a.grid_res);
    target_pts = mesh_surface_samples(grid_surface, a.surface_samples,
                                      combine_seeds(a.seed, 12));
    rep.note = "target surface iso-surfaced from the occupancy grid (res " +
               std::to_string(a.grid_res) + ")";
  }
  rep.chamfer_l1 = chamfer_l1(rec_pts, target_pts, a.threads);
  rep.f_score = f_score(rec_pts, target_pts, rep.f_threshold, a.threads);
  std::cout << rep.to_text();
  if (!a.out.empty()) {
    std::ofstream out(a.out);
    if (!out) throw std::runtime_error("cannot open for writing: " + a.out);
    nlohmann::json j;
    j["iou"] = rep.iou;
    j["chamfer_l1"] = rep.chamfer_l1;
    j["f_score"] = rep.f_score;
    j["f_threshold"] = rep.f_threshold;
    j["iou_samples"] = rep.iou_samples;
    j["surface_samples"] = rep.surface_samples;
    j["seed"] = rep.seed;
    if (!rep.note.empty()) j["note"] = rep.note;
    out << j.dump(2) << "\n";
  }
  return 0;
}

int run_eval_2d(const EvalArgs& a) {
  const auto dec = load_decomposition<2>(a.model);
  const auto oracle = load_oracle2(a.target);
  MetricsReport rep;
  rep.iou_samples = a.iou_samples;
  rep.surface_samples = a.surface_samples;
  rep.seed = a.seed;
  rep.iou = decomposition_iou(dec, oracle, a.iou_samples, a.seed);
  rep.f_threshold = a.f_threshold > 0.0 ? a.f_threshold
                                        : 0.01 * oracle.bbox_diagonal();
  const auto extraction = decomposition_to_polygons(dec);
  for (const auto& w : extraction.warnings) std::cerr << "warning: " << w << "\n";
  if (extraction.polygons.empty()) {
    std::cerr << "error: all convexes degenerate\n";
    return 1;
  }
  // Uniform samples along the polygon boundaries.
  std::vector<Vec<2>> rec_pts;
  {
    double total = 0.0;
    for (const auto& poly : extraction.polygons) {
      const auto& v = poly.vertices;
      for (size_t i = 0; i < v.size(); ++i) {
        total += (v[(i + 1) % v.size()] - v[i]).norm();
      }
    }
    Rng rng(combine_seeds(a.seed, 11));
    for (int s = 0; s < a.surface_samples; ++s) {
      double u = rng.uniform() * total;
      for (const auto& poly : extraction.polygons) {
        const auto& v = poly.vertices;
        bool placed = false;
        for (size_t i = 0; i < v.size(); ++i) {
          const Vec<2> e = v[(i + 1) % v.size()] - v[i];
          const double len = e.norm();
          if (u <= len) {
            rec_pts.push_back(v[i] + (u / len) * e);
            placed = true;
            break;
          }
          u -= len;
        }
        if (placed) break;
      }
      if (static_cast<int>(rec_pts.size()) <= s) rec_pts.push_back(
          extraction.polygons[0].vertices[0]);
    }
  }
  if (!oracle.has_surface()) {
    std::cerr << "error: target image has no contour\n";
    return 1;
  }
  const auto target_pts =
      oracle.surface_samples(a.surface_samples, combine_seeds(a.seed, 12));
  rep.chamfer_l1 = chamfer_l1(rec_pts, target_pts, a.threads);
  rep.f_score = f_score(rec_pts, target_pts, rep.f_threshold, a.threads);
  std::cout << rep.to_text();
  return 0;
}

struct McArgs {
  std::string model;
  std::string target;
  std::string out;
  int res = 64;
};

int run_mc(const McArgs& a) {
  std::function<double(const Vec<3>&)> field;
  Aabb3 box;
  if (!a.model.empty()) {
    if (model_dim(a.model) != 3) {
      std::cerr << "error: mc requires a 3D model\n";
      return 2;
    }
    const auto dec = std::make_shared<Decomposition<3>>(
        load_decomposition<3>(a.model));
    // Bounding box from the extracted union, inflated.
    const auto extraction = decomposition_to_meshes(*dec);
    if (extraction.meshes.empty()) {
      std::cerr << "error: all convexes degenerate, no bounding box\n";
      return 1;
    }
    box = mesh_bounds(merge_meshes(extraction.meshes)).inflated(0.1);
    field = [dec](const Vec<3>& x) { return 0.5 - union_indicator(*dec, x); };
  } else {
    const auto oracle =
        std::make_shared<TargetOracle<3>>(load_oracle3(a.target));
    box = Aabb3{oracle->box_lo, oracle->box_hi};
    field = [oracle](const Vec<3>& x) {
      return oracle->inside(x) ? -1.0 : 1.0;
    };
  }
  const double t0 = now_seconds();
  TriMesh mesh;
  try {
    mesh = marching_cubes(field, box, a.res);
  } catch (const std::runtime_error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  std::cout << "mc_time_s=" << now_seconds() - t0 << "\n";
  std::cout << "triangles=" << mesh.triangles.size() << "\n";
  if (!a.out.empty()) save_obj(a.out, mesh);
  return 0;
}

struct SampleArgs {
  std::string target;
  std::string out;
  std::string mode = "volume";
  int n = 10000;
  double jitter_rel = 0.005;
  std::uint64_t seed = 0;
};

template <int D>
int run_sample(const SampleArgs& a) {
  TargetOracle<D> oracle;
  if constexpr (D == 3) {
    oracle = load_oracle3(a.target);
  } else {
    oracle = load_oracle2(a.target);
  }
  SampleSet<D> s;
  if (a.mode == "volume") {
    s = sample_volume(oracle, a.n, a.seed);
  } else {
    s = sample_near_surface(oracle, a.n,
                            a.jitter_rel * oracle.bbox_diagonal(), a.seed);
  }
  std::ofstream out(a.out);
  if (!out) throw std::runtime_error("cannot open for writing: " + a.out);
  out.precision(17);
  for (int i = 0; i < s.size(); ++i) {
    for (int d = 0; d < D; ++d) out << s.points[i][d] << " ";
    out << s.labels[i] << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fits a union of smooth convex polytopes to a target solid "
               "and extracts exact polygonal meshes from the hyperplanes"};
  app.require_subcommand(1);

  FitArgs fit_args;
  auto* cmd_fit = app.add_subcommand("fit", "fit a decomposition to a target");
  cmd_fit->set_help_flag("--help", "print help");
  cmd_fit->add_option("--target", fit_args.target, "target file (.csg/.obj/.cvxg/.pgm)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_fit->add_option("--out", fit_args.out, "output model JSON")->required();
  cmd_fit->add_option("--report", fit_args.report, "training log (JSON lines)");
  cmd_fit->add_option("--k", fit_args.cfg.num_elements, "number of convexes")
      ->check(CLI::PositiveNumber);
  cmd_fit->add_option("--h", fit_args.cfg.planes_per_element,
                      "planes per convex")
      ->check(CLI::PositiveNumber);
  cmd_fit->add_option("--iters", fit_args.cfg.iters, "optimization steps");
  cmd_fit->add_option("--lr", fit_args.cfg.lr, "learning rate");
  cmd_fit->add_option("--sigma", fit_args.cfg.sigma, "indicator sharpness");
  cmd_fit->add_option("--seed", fit_args.cfg.seed, "RNG seed");
  cmd_fit->add_option("--batch", fit_args.cfg.batch_volume, "volume batch size");
  cmd_fit->add_option("--batch-surface", fit_args.cfg.batch_surface,
                      "near-surface batch size");
  cmd_fit->add_option("--w-approx", fit_args.cfg.weights.w_approx, "");
  cmd_fit->add_option("--w-decomp", fit_args.cfg.weights.w_decomp, "");
  cmd_fit->add_option("--w-unique", fit_args.cfg.weights.w_unique, "");
  cmd_fit->add_option("--w-guide", fit_args.cfg.weights.w_guide, "");
  cmd_fit->add_option("--w-loc", fit_args.cfg.weights.w_loc, "");
  cmd_fit->add_flag("--merged", fit_args.merged,
                    "replace guidance/localization with the merged loss");
  cmd_fit->add_option("--eval-every", fit_args.cfg.eval_every,
                      "IoU evaluation cadence (0 disables)");
  cmd_fit->add_option("--init-radius", fit_args.cfg.init_radius_rel,
                      "seed radius as a fraction of the bbox diagonal");

  ExtractArgs extract_args;
  auto* cmd_extract =
      app.add_subcommand("extract", "hyperplanes to polygonal meshes");
  cmd_extract->add_option("--model", extract_args.model, "model JSON")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_extract->add_option("--out", extract_args.out, "union OBJ (3D) or SVG (2D)");
  cmd_extract->add_option("--per-convex", extract_args.per_convex_dir,
                          "write one OBJ per convex into this directory");

  EvalArgs eval_args;
  auto* cmd_eval = app.add_subcommand("eval", "IoU, Chamfer-L1, F-score");
  cmd_eval->add_option("--model", eval_args.model, "model JSON")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_eval->add_option("--target", eval_args.target, "target file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_eval->add_option("--out", eval_args.out, "metrics JSON");
  cmd_eval->add_option("--samples", eval_args.iou_samples, "IoU sample count");
  cmd_eval->add_option("--surface-samples", eval_args.surface_samples,
                       "surface sample count");
  cmd_eval->add_option("--f-threshold", eval_args.f_threshold,
                       "F-score threshold (default 1% of bbox diagonal)");
  cmd_eval->add_option("--seed", eval_args.seed, "RNG seed");
  cmd_eval->add_option("--threads", eval_args.threads, "NN query threads");

  McArgs mc_args;
  auto* cmd_mc =
      app.add_subcommand("mc", "marching-cubes iso-surface (timing oracle)");
  cmd_mc->add_option("--model", mc_args.model, "model JSON")
      ->check(CLI::ExistingFile);
  cmd_mc->add_option("--target", mc_args.target, "target file")
      ->check(CLI::ExistingFile);
  cmd_mc->add_option("--res", mc_args.res, "grid resolution (>= 8)")
      ->check(CLI::Range(8, 4096));
  cmd_mc->add_option("--out", mc_args.out, "output OBJ");

  SampleArgs sample_args;
  auto* cmd_sample = app.add_subcommand("sample", "dump labeled samples");
  cmd_sample->add_option("--target", sample_args.target, "target file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_sample->add_option("--out", sample_args.out, "output text file")
      ->required();
  cmd_sample->add_option("--mode", sample_args.mode, "volume or surface")
      ->check(CLI::IsMember({"volume", "surface"}));
  cmd_sample->add_option("--n", sample_args.n, "sample count")
      ->check(CLI::PositiveNumber);
  cmd_sample->add_option("--seed", sample_args.seed, "RNG seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (cmd_fit->parsed()) {
      std::vector<std::string> overrides;
      for (const auto* opt : cmd_fit->get_options()) {
        if (opt->count() > 0 && opt->get_name() != "--target" &&
            opt->get_name() != "--out" && opt->get_name() != "--report") {
          overrides.push_back(opt->get_name() + "=" +
                              (opt->results().empty() ? "1"
                                                      : opt->results()[0]));
        }
      }
      return target_dim(fit_args.target) == 3
                 ? run_fit<3>(fit_args, overrides)
                 : run_fit<2>(fit_args, overrides);
    }
    if (cmd_extract->parsed()) return run_extract(extract_args);
    if (cmd_eval->parsed()) {
      const int dim = model_dim(eval_args.model);
      if (dim != target_dim(eval_args.target)) {
        std::cerr << "error: model dimension (" << dim
                  << ") does not match the target format\n";
        return 2;
      }
      return dim == 3 ? run_eval_3d(eval_args) : run_eval_2d(eval_args);
    }
    if (cmd_mc->parsed()) {
      if (mc_args.model.empty() == mc_args.target.empty()) {
        std::cerr << "error: mc needs exactly one of --model or --target\n";
        return 2;
      }
      if (!mc_args.target.empty() && target_dim(mc_args.target) != 3) {
        std::cerr << "error: mc requires a 3D target\n";
        return 2;
      }
      return run_mc(mc_args);
    }
    if (cmd_sample->parsed()) {
      return target_dim(sample_args.target) == 3 ? run_sample<3>(sample_args)
                                                 : run_sample<2>(sample_args);
    }
  } catch (const std::invalid_argument& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    const std::string what = err.what();
    if (what.find("cannot open") != std::string::npos ||
        what.find("bad model file") != std::string::npos ||
        what.find("unsupported") != std::string::npos ||
        what.find("mismatch") != std::string::npos) {
      return 2;
    }
    return 1;
  }
  return 0;
}
