// Command line front end: one subcommand per pipeline stage plus an
// end-to-end `annotate`, a synthetic-sequence generator and the metrics
// harness. Stage outputs are plain files under the manifest's output
// directory; reruns skip stages whose inputs have not changed.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>

#include <nlohmann/json.hpp>

#include "densedepth/calib.hpp"
#include "densedepth/config.hpp"
#include "densedepth/eval.hpp"
#include "densedepth/io.hpp"
#include "densedepth/pipeline.hpp"
#include "densedepth/synth.hpp"

namespace fs = std::filesystem;
using namespace densedepth;
using nlohmann::json;

namespace {

struct GlobalOptions {
  std::string config_path;
  int workers = -1;        // -1: use config value
  std::int64_t seed = -1;  // -1: use config value
  bool resume = true;
};

PipelineConfig load_effective_config(const GlobalOptions& g) {
  PipelineConfig config;
  if (!g.config_path.empty()) config = load_config(g.config_path);
  if (g.workers >= 0) config.workers = g.workers;
  if (g.seed >= 0) config.seed = static_cast<std::uint64_t>(g.seed);
  config.validate();
  return config;
}

io::SequenceManifest load_manifest_with_overrides(const std::string& path) {
  io::SequenceManifest manifest = io::load_manifest(path);
  if (const char* root = std::getenv("DENSEDEPTH_OUTPUT_ROOT")) {
    manifest.output_dir = fs::path(root);
  }
  return manifest;
}

Eigen::Vector3d vec3(const json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

int run_calibrate(const std::string& session_path, const std::string& rig_out,
                  const std::string& report_out, const GlobalOptions& g) {
  std::ifstream in(session_path);
  if (!in) throw Error("cannot open file: " + session_path);
  json session;
  in >> session;

  CameraRig rig;
  const json& k = session.at("K");
  for (int i = 0; i < 9; ++i) rig.K(i / 3, i % 3) = k.at(i).get<double>();
  if (session.contains("distortion"))
    rig.distortion = session["distortion"].get<std::vector<double>>();
  rig.width = session.at("width").get<int>();
  rig.height = session.at("height").get<int>();

  calib::RansacOptions options;
  if (session.contains("ransac")) {
    const json& r = session["ransac"];
    options.iterations = r.value("iterations", options.iterations);
    options.inlier_tolerance = r.value("tolerance", options.inlier_tolerance);
  }
  if (g.seed >= 0) options.seed = static_cast<std::uint64_t>(g.seed);

  fs::path base = fs::path(session_path).parent_path();
  std::vector<calib::CalibrationView> views;
  for (const json& v : session.at("views")) {
    calib::CalibrationView view;
    const json& plane = v.at("plane");
    view.camera_plane.n = vec3(plane.at("n")).normalized();
    view.camera_plane.d = plane.at("d").get<double>();
    view.camera_plane.p = vec3(plane.at("p"));
    view.camera_plane.has_origin = true;
    if (std::abs(view.camera_plane.p.dot(view.camera_plane.n) - view.camera_plane.d) >
        1e-6)
      throw Error("camera plane origin is not on the plane");
    fs::path cloud_path = v.at("cloud").get<std::string>();
    if (!cloud_path.is_absolute()) cloud_path = base / cloud_path;
    view.cloud = io::read_cloud_bin(cloud_path);
    if (v.contains("crop")) {
      Aabb box;
      box.min = vec3(v["crop"].at("min"));
      box.max = vec3(v["crop"].at("max"));
      view.crop = box;
    }
    views.push_back(std::move(view));
  }

  calib::CalibrationResult result = calib::calibrate(views, options);
  rig.extrinsic = result.extrinsic;
  io::save_rig(rig_out, rig);

  std::ostringstream report;
  report << "view  normal_angle_deg  offset_m\n";
  for (const auto& r : result.residuals)
    report << std::setw(4) << r.view << "  " << std::scientific << std::setprecision(3)
           << r.normal_angle_deg << "  " << r.offset_m << "\n";
  for (int skipped : result.skipped_views)
    report << "view " << skipped << " skipped: no plane found\n";
  if (!report_out.empty()) {
    std::ofstream out(report_out);
    out << report.str();
  }
  std::cout << report.str();
  std::cout << "rig written to " << rig_out << "\n";
  return 0;
}

int run_eval_labels(const std::string& pred_dir, const std::string& truth_dir,
                    const std::string& truth_format, double min_sa, double min_da,
                    double min_f1, const std::string& report_out) {
  if (truth_format != "bytes" && truth_format != "semantic")
    throw Error("unknown truth format: " + truth_format);
  eval::ClassificationAccumulator acc;
  std::size_t frames = 0;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(pred_dir))
    if (entry.path().extension() == ".label") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const fs::path& pred_path : files) {
    fs::path truth_path = fs::path(truth_dir) / pred_path.filename();
    if (!fs::exists(truth_path)) throw Error("missing truth label: " + truth_path.string());
    auto pred = io::read_labels(pred_path);
    std::vector<std::uint8_t> truth_dynamic;
    if (truth_format == "semantic") {
      // 4 bytes per point, lower 16 bits the class id, moving classes dynamic
      truth_dynamic = io::read_semantic_labels(
          truth_path, static_cast<std::int64_t>(pred.size()));
    } else {
      auto truth_labels = io::read_labels(truth_path);
      if (pred.size() != truth_labels.size())
        throw Error("label count mismatch: " + pred_path.string());
      truth_dynamic.resize(truth_labels.size());
      for (std::size_t i = 0; i < truth_labels.size(); ++i)
        truth_dynamic[i] = truth_labels[i] == PointLabel::Dynamic ? 1 : 0;
    }
    acc.add(pred, truth_dynamic);
    ++frames;
  }
  if (frames == 0) throw Error("no label files in " + pred_dir);

  auto report = acc.report();
  std::cout << "frames: " << frames << "\n";
  std::cout << std::fixed << std::setprecision(2);
  std::cout << "SA: " << report.sa << " %\n";
  if (report.da)
    std::cout << "DA: " << *report.da << " %\n";
  else
    std::cout << "DA: n/a (no dynamic ground truth)\n";
  std::cout << std::setprecision(4) << "F1: " << report.f1 << "\n";

  if (!report_out.empty()) {
    json j{{"frames", frames},
           {"sa", report.sa},
           {"f1", report.f1},
           {"gt_static", report.gt_static},
           {"gt_dynamic", report.gt_dynamic}};
    if (report.da) j["da"] = *report.da;
    std::ofstream out(report_out);
    out << j.dump(2) << "\n";
  }

  bool ok = report.sa >= min_sa && report.f1 >= min_f1 &&
            (!report.da || *report.da >= min_da);
  return ok ? 0 : 2;
}

DepthMap read_depth_any(const fs::path& path) {
  return path.extension() == ".png" ? io::read_depth_png(path) : io::read_depth_f32(path);
}

int run_eval_depth(const std::string& pred_dir, const std::string& truth_dir,
                   const std::string& rig_path, bool with_p2p, double max_rmse,
                   double max_mae, const std::string& report_out) {
  double sum_rmse = 0, sum_mae = 0, sum_absrel = 0, sum_density = 0, sum_p2p = 0;
  std::size_t n = 0;
  std::optional<CameraRig> rig;
  if (!rig_path.empty()) rig = io::load_rig(rig_path);

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(pred_dir)) {
    auto ext = entry.path().extension();
    if (ext == ".png" || ext == ".bin") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const fs::path& pred_path : files) {
    fs::path truth_path = fs::path(truth_dir) / pred_path.filename();
    if (!fs::exists(truth_path)) {
      // allow png predictions against f32 truth and vice versa
      fs::path alt = truth_path;
      alt.replace_extension(pred_path.extension() == ".png" ? ".bin" : ".png");
      if (!fs::exists(alt)) throw Error("missing truth depth: " + truth_path.string());
      truth_path = alt;
    }
    DepthMap pred = read_depth_any(pred_path);
    DepthMap truth = read_depth_any(truth_path);
    auto r = eval::score_depth(pred, truth);
    sum_rmse += r.rmse;
    sum_mae += r.mae;
    sum_absrel += r.abs_rel;
    sum_density += r.density;
    if (with_p2p) {
      if (!rig) throw Error("--point-to-point needs --rig");
      sum_p2p += eval::point_to_point(eval::deproject(pred, rig->K),
                                      eval::deproject(truth, rig->K));
    }
    ++n;
  }
  if (n == 0) throw Error("no depth files in " + pred_dir);

  double rmse = sum_rmse / n, mae = sum_mae / n;
  std::cout << std::fixed << std::setprecision(4);
  std::cout << "maps: " << n << "\n";
  std::cout << "RMSE: " << rmse << " m\nMAE: " << mae << " m\n";
  std::cout << "AbsRel: " << sum_absrel / n << "\n";
  std::cout << "density: " << sum_density / n << "\n";
  if (with_p2p) std::cout << "point-to-point: " << sum_p2p / n << " m\n";

  if (!report_out.empty()) {
    json j{{"maps", n},        {"rmse", rmse},
           {"mae", mae},       {"abs_rel", sum_absrel / n},
           {"density", sum_density / n}};
    if (with_p2p) j["point_to_point"] = sum_p2p / n;
    std::ofstream out(report_out);
    out << j.dump(2) << "\n";
  }
  return (rmse <= max_rmse && mae <= max_mae) ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dense depth ground-truth generation from LiDAR sequences"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  GlobalOptions g;
  app.add_option("--config", g.config_path, "pipeline configuration file (JSON)");
  app.add_option("--workers", g.workers, "worker threads (0 = all cores)");
  app.add_option("--seed", g.seed, "random seed override");
  app.add_flag("--resume,!--no-resume", g.resume,
               "skip stages whose outputs are up to date (default on)");

  // --- annotate & single stages -------------------------------------------
  std::string manifest_path;
  auto add_stage = [&](const char* name, const char* help) {
    CLI::App* cmd = app.add_subcommand(name, help);
    cmd->add_option("manifest", manifest_path, "sequence manifest (JSON)")->required();
    return cmd;
  };
  CLI::App* cmd_ground = add_stage("ground", "label ground points per frame");
  CLI::App* cmd_doc = add_stage("doc", "classify dynamic objects per frame");
  CLI::App* cmd_render = add_stage("render", "render dense depth maps");
  CLI::App* cmd_annotate = add_stage("annotate", "run the full pipeline");

  // --- calibrate ------------------------------------------------------------
  std::string session_path, rig_out = "rig.json", report_out;
  CLI::App* cmd_calibrate =
      app.add_subcommand("calibrate", "recover the camera-to-LiDAR extrinsic");
  cmd_calibrate->add_option("session", session_path, "calibration session (JSON)")
      ->required();
  cmd_calibrate->add_option("--rig-out", rig_out, "output rig file");
  cmd_calibrate->add_option("--report-out", report_out, "residual report file");

  // --- synth ----------------------------------------------------------------
  std::string scene_path, synth_out;
  bool synth_depth = true;
  CLI::App* cmd_synth =
      app.add_subcommand("synth", "generate a synthetic sequence from a scene script");
  cmd_synth->add_option("scene", scene_path, "scene script (JSON)")->required();
  cmd_synth->add_option("--out", synth_out, "output directory")->required();
  cmd_synth->add_flag("--analytic-depth,!--no-analytic-depth", synth_depth,
                      "also write analytic camera depth maps");

  // --- eval -----------------------------------------------------------------
  CLI::App* cmd_eval = app.add_subcommand("eval", "score labels or depth maps");
  cmd_eval->require_subcommand(1);
  std::string pred_dir, truth_dir, eval_rig, eval_report;
  std::string truth_format = "bytes";
  double min_sa = 0, min_da = 0, min_f1 = 0;
  double max_rmse = std::numeric_limits<double>::infinity();
  double max_mae = std::numeric_limits<double>::infinity();
  bool with_p2p = false;

  CLI::App* eval_labels = cmd_eval->add_subcommand("labels", "SA / DA / F1");
  eval_labels->add_option("--pred", pred_dir)->required();
  eval_labels->add_option("--truth", truth_dir)->required();
  eval_labels->add_option("--truth-format", truth_format,
                          "'bytes' (one byte per point) or 'semantic' (4-byte class ids)");
  eval_labels->add_option("--min-sa", min_sa, "fail below this SA (percent)");
  eval_labels->add_option("--min-da", min_da, "fail below this DA (percent)");
  eval_labels->add_option("--min-f1", min_f1, "fail below this F1");
  eval_labels->add_option("--report-out", eval_report, "machine-readable report (JSON)");

  CLI::App* eval_depth = cmd_eval->add_subcommand("depth", "RMSE / MAE / AbsRel / density");
  eval_depth->add_option("--pred", pred_dir)->required();
  eval_depth->add_option("--truth", truth_dir)->required();
  eval_depth->add_option("--rig", eval_rig, "rig file (for deprojection)");
  eval_depth->add_flag("--point-to-point", with_p2p, "also compute the 3D point-to-point metric");
  eval_depth->add_option("--max-rmse", max_rmse, "fail above this RMSE (meters)");
  eval_depth->add_option("--max-mae", max_mae, "fail above this MAE (meters)");
  eval_depth->add_option("--report-out", eval_report, "machine-readable report (JSON)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cmd_calibrate) return run_calibrate(session_path, rig_out, report_out, g);

    if (*cmd_synth) {
      synth::SceneScript scene = synth::load_scene_script(scene_path);
      if (g.seed >= 0) scene.seed = static_cast<std::uint64_t>(g.seed);
      synth::generate_sequence(scene, synth_out, synth_depth);
      std::cout << "sequence written to " << synth_out << "\n";
      return 0;
    }

    if (*cmd_eval) {
      if (*eval_labels)
        return run_eval_labels(pred_dir, truth_dir, truth_format, min_sa, min_da,
                               min_f1, eval_report);
      return run_eval_depth(pred_dir, truth_dir, eval_rig, with_p2p, max_rmse, max_mae,
                            eval_report);
    }

    PipelineConfig config = load_effective_config(g);
    io::SequenceManifest manifest = load_manifest_with_overrides(manifest_path);
    Pipeline pipeline(manifest, config, g.resume);
    if (*cmd_ground) {
      pipeline.run_ground();
    } else if (*cmd_doc) {
      pipeline.run_ground();
      pipeline.run_doc();
    } else if (*cmd_render) {
      pipeline.run_annotate();
    } else if (*cmd_annotate) {
      pipeline.run_annotate();
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
