// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 The echosim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "echosim/app.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "echosim/curvature.hpp"
#include "echosim/error.hpp"
#include "echosim/io.hpp"

namespace echosim {

using nlohmann::json;

namespace {

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json stats_json(const RunStats& s) {
  return {{"rays", s.rays},
          {"ray_hits", s.ray_hits},
          {"specular_contributions", s.specular_contributions},
          {"diffraction_points", s.diffraction_points},
          {"dropped_contributions", s.dropped()},
          {"dropped_specular", s.dropped_specular},
          {"dropped_diffraction", s.dropped_diffraction},
          {"diffraction_threshold", s.diffraction_threshold},
          {"warnings", s.warnings}};
}

json base_metadata(const SimulationConfig& config, const char* command) {
  return {{"command", command},
          {"config_hash", config_hash(config)},
          {"seed", config.params.seed},
          {"n_rays", config.params.n_rays},
          {"n_diffraction_points", config.params.n_diffraction_points},
          {"sample_rate", config.params.sample_rate},
          {"ir_length", config.params.ir_length}};
}

void prepare_dir(const std::filesystem::path& dir, const SimulationConfig& config) {
  std::filesystem::create_directories(dir);
  write_json(dir / "effective_config.json", to_json(config));
}

std::vector<std::string> numbered(const std::string& prefix, Eigen::Index n) {
  std::vector<std::string> out;
  for (Eigen::Index i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

std::vector<std::string> frequency_labels(const Eigen::VectorXd& f) {
  std::vector<std::string> out;
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    std::ostringstream s;
    s << "f" << std::setprecision(10) << f(i);
    out.push_back(s.str());
  }
  return out;
}

void write_scan(const ScanResult& scan, const SimulationConfig& config, const std::filesystem::path& dir,
                const char* command, double seconds) {
  if (config.output.csv) {
    write_matrix_csv(dir / "ir_left.csv", scan.axis_label, scan.axis, numbered("s", scan.ir_left.cols()),
                     scan.ir_left);
    write_matrix_csv(dir / "ir_right.csv", scan.axis_label, scan.axis, numbered("s", scan.ir_right.cols()),
                     scan.ir_right);
    write_matrix_csv(dir / "spectrum_left.csv", scan.axis_label, scan.axis,
                     frequency_labels(scan.spectrum_frequencies), scan.spectrum_left);
    write_matrix_csv(dir / "spectrum_right.csv", scan.axis_label, scan.axis,
                     frequency_labels(scan.spectrum_frequencies), scan.spectrum_right);
    std::vector<std::string> cols = {"energy_left", "energy_right", "combined_energy"};
    std::vector<Eigen::VectorXd> data = {scan.energy_left, scan.energy_right, scan.combined_energy};
    auto add = [&](const char* name, const Eigen::VectorXd& v) {
      if (v.size() == scan.axis.size()) {
        cols.push_back(name);
        data.push_back(v);
      }
    };
    add("target_strength_db", scan.target_strength_db);
    if (scan.directions.rows() == scan.axis.size()) {
      add("dir_x", scan.directions.col(0));
      add("dir_y", scan.directions.col(1));
      add("dir_z", scan.directions.col(2));
    }
    add("desired_left", scan.desired_left);
    add("desired_right", scan.desired_right);
    add("realized_left", scan.realized_left);
    add("realized_right", scan.realized_right);
    Eigen::MatrixXd summary(scan.axis.size(), static_cast<Eigen::Index>(data.size()));
    for (std::size_t k = 0; k < data.size(); ++k) summary.col(static_cast<Eigen::Index>(k)) = data[k];
    write_matrix_csv(dir / "summary.csv", scan.axis_label, scan.axis, cols, summary);
  }
  json meta = base_metadata(config, command);
  meta["positions"] = scan.axis.size();
  meta["reference_energy"] = scan.reference_energy;
  meta["wall_time_s"] = seconds;
  std::int64_t dropped = 0;
  json warnings = json::array();
  for (const auto& s : scan.stats) {
    dropped += s.dropped();
    for (const auto& w : s.warnings) warnings.push_back(w);
  }
  meta["dropped_contributions"] = dropped;
  meta["warnings"] = warnings;
  write_json(dir / "metadata.json", meta);
}

}  // namespace

SimulationResult run_simulation(const SimulationConfig& config, const std::filesystem::path& out_dir) {
  prepare_dir(out_dir, config);
  const auto start = std::chrono::steady_clock::now();
  std::vector<PreparedObject> objects;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    objects = prepare_objects(config);
  } catch (const Error& e) {
    throw Error(e.code(), std::string("[mesh_model] ") + e.what());
  }
  const double prep_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const Scene scene = assemble_scene(objects, config.params.brdf_frequencies());
  const PreparedEars ears = prepare_ears(config);
  const std::optional<EmittedCall> call = make_call(config);
  SimulationResult result = simulate(scene, config.sensor, config.sensor_pose(), config.params, ears.banks,
                                     call ? &*call : nullptr, config.output.normalize_peak);
  result.stats.timings["mesh_model"] = prep_time;

  const double fs = config.params.sample_rate;
  if (config.output.wav) {
    for (Eigen::Index i = 0; i < result.irs.combined.cols(); ++i) {
      const std::string n = std::to_string(i);
      write_wav(out_dir / ("ir_specular_" + n + ".wav"), result.irs.specular.col(i), fs);
      write_wav(out_dir / ("ir_diffraction_" + n + ".wav"), result.irs.diffraction.col(i), fs);
      write_wav(out_dir / ("ir_combined_" + n + ".wav"), result.irs.combined.col(i), fs);
    }
    write_wav(out_dir / "h_left.wav", result.ears.h_left, fs);
    write_wav(out_dir / "h_right.wav", result.ears.h_right, fs);
    if (call) {
      write_wav(out_dir / "s_left.wav", result.ears.s_left, fs);
      write_wav(out_dir / "s_right.wav", result.ears.s_right, fs);
    }
  }
  json meta = base_metadata(config, "simulate");
  meta["stats"] = stats_json(result.stats);
  meta["dropped_contributions"] = result.stats.dropped();
  meta["output_scale"] = result.ears.output_scale;
  json mesh_warnings = json::array();
  for (const auto& o : objects)
    for (const auto& w : o.warnings) mesh_warnings.push_back(w);
  meta["mesh_warnings"] = mesh_warnings;
  json timings;
  for (const auto& [stage, t] : result.stats.timings) timings[stage] = t;
  timings["total"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  meta["timings_s"] = timings;
  write_json(out_dir / "metadata.json", meta);
  return result;
}

ScanResult run_rotation_scan(const SimulationConfig& config, const std::filesystem::path& out_dir) {
  prepare_dir(out_dir, config);
  const auto start = std::chrono::steady_clock::now();
  const ScanSetup setup = make_scan_setup(config);
  ScanResult scan = run_rotation_scan(setup, config.scan.axis, config.scan.start_deg, config.scan.end_deg,
                                      config.scan.step_deg, config.params.workers);
  write_scan(scan, config, out_dir, "scan-rotation",
             std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  return scan;
}

ScanResult run_sphere_scan(const SimulationConfig& config, const std::filesystem::path& out_dir) {
  prepare_dir(out_dir, config);
  const auto start = std::chrono::steady_clock::now();
  const ScanSetup setup = make_scan_setup(config);
  ScanResult scan = run_sphere_scan(setup, config.scan.points, config.scan.radius, config.params.workers);
  write_scan(scan, config, out_dir, "scan-sphere",
             std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  return scan;
}

PreparedEars run_fit_ertf(const SimulationConfig& config, const std::filesystem::path& out_dir) {
  prepare_dir(out_dir, config);
  const PreparedEars ears = prepare_ears(config);
  json meta = base_metadata(config, "fit-ertf");
  auto emit = [&](const char* name, const EarConfig& ear, const ErtfFilterBank& bank, const FitResult& fit) {
    save_filter_bank(out_dir / (std::string(name) + ".bank"), bank);
    json m = {{"source", ear.source == EarSource::selection ? "selection" : "fitted"},
              {"receivers", bank.receiver_count()},
              {"taps", bank.length()},
              {"delay", bank.delay}};
    if (ear.source == EarSource::pattern || ear.source == EarSource::target_csv) {
      m["lambda"] = fit.lambda;
      m["residual"] = fit.residual;
      m["objective"] = fit.objective;
    }
    meta[name] = m;
    if (!config.output.csv) return;
    const Points dirs = partition_sphere_directions(ear.directions, true);
    Eigen::VectorXd freqs = ears.pattern_frequencies;
    if (freqs.size() == 0) {
      const Band b = config.params.effective_band();
      freqs = Eigen::VectorXd::LinSpaced(16, std::max(b.low, 1.0), b.high);
    }
    const Eigen::MatrixXd realized =
        evaluate_realized_pattern(bank, config.sensor, dirs, freqs, config.params.speed_of_sound).cwiseAbs();
    Eigen::MatrixXd table(dirs.rows(), 3 + freqs.size());
    table << dirs, realized.transpose();
    std::vector<std::string> cols = {"dir_x", "dir_y", "dir_z"};
    for (const auto& f : frequency_labels(freqs)) cols.push_back(f);
    write_matrix_csv(out_dir / (std::string(name) + "_realized.csv"), "direction",
                     Eigen::VectorXd::LinSpaced(dirs.rows(), 0.0, dirs.rows() - 1.0), cols, table);
  };
  emit("left", config.left, ears.banks.left, ears.left_fit);
  emit("right", config.right, ears.banks.right, ears.right_fit);
  write_json(out_dir / "metadata.json", meta);
  return ears;
}

json mesh_info(const std::filesystem::path& path, const MaterialParams& material, const SimParams& params,
               int histogram_bins) {
  const RawMesh raw = load_stl(path);
  RepairReport report;
  const Mesh mesh = repair_mesh(raw, 1e-6, &report);
  const CurvatureField field = estimate_curvature(mesh, params.workers);
  const Eigen::VectorXd kv = field.vertex_magnitude();
  const BoundingBox box = bounding_box(mesh.vertices);

  json j;
  j["path"] = path.string();
  j["format"] = raw.source_format == StlFormat::ascii ? "ascii" : "binary";
  j["before"] = {{"vertices", raw.vertex_count()}, {"faces", raw.face_count()}};
  j["after"] = {{"vertices", mesh.vertex_count()}, {"faces", mesh.face_count()}};
  j["repair"] = {{"merged_vertices", report.merged_vertices},
                 {"degenerate_faces", report.degenerate_faces},
                 {"duplicate_faces", report.duplicate_faces},
                 {"flipped_faces", report.flipped_faces},
                 {"components", report.components},
                 {"boundary_edges", report.boundary_edges},
                 {"nonmanifold_edges", report.nonmanifold_edges},
                 {"orientation_failure", report.orientation_failure},
                 {"warnings", report.warnings}};
  j["bounding_box"] = {{"min", {box.min.x(), box.min.y(), box.min.z()}},
                       {"max", {box.max.x(), box.max.y(), box.max.z()}}};
  j["area"] = mesh.face_areas.sum();

  const double top = kv.size() ? kv.maxCoeff() : 0.0;
  const int bins = std::max(1, histogram_bins);
  const double width = top > 0.0 ? top / bins : 1.0;
  std::vector<std::int64_t> counts(bins, 0);
  for (Eigen::Index v = 0; v < kv.size(); ++v)
    ++counts[std::min(bins - 1, static_cast<int>(kv(v) / width))];
  const auto mode = static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
  j["curvature"] = {{"bin_width", width},
                    {"counts", counts},
                    {"mode", (mode + 0.5) * width},
                    {"median", [&] {
                       if (kv.size() == 0) return 0.0;
                       std::vector<double> v(kv.data(), kv.data() + kv.size());
                       std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
                       return v[v.size() / 2];
                     }()},
                    {"max", top},
                    {"warnings", field.warnings}};

  const Eigen::VectorXd freqs = params.brdf_frequencies();
  const BrdfField brdf = derive_brdf(field, freqs, material);
  j["brdf"] = {{"frequencies", {freqs.minCoeff(), freqs.maxCoeff()}},
               {"alpha_deg", {rad2deg(brdf.alpha.minCoeff()), rad2deg(brdf.alpha.maxCoeff())}},
               {"k", {brdf.strength.minCoeff(), brdf.strength.maxCoeff()}}};
  return j;
}

bool metadata_matches(const std::filesystem::path& metadata_path, const SimulationConfig& config) {
  std::ifstream in(metadata_path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + metadata_path.string());
  json meta;
  try {
    meta = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse_error, metadata_path.string() + ": " + e.what());
  }
  return meta.value("config_hash", std::string()) == config_hash(config);
}

}  // namespace echosim
