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

#include "echosim/simulation.hpp"

#include <chrono>
#include <cmath>

#include "echosim/bvh.hpp"
#include "echosim/curvature.hpp"
#include "echosim/diffraction.hpp"
#include "echosim/error.hpp"
#include "echosim/parallel.hpp"
#include "echosim/raytrace.hpp"
#include "echosim/rng.hpp"

namespace echosim {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

constexpr std::size_t kChunks = 64;

// Per-chunk spectral accumulator, allocated on first use.
struct ChunkAccumulator {
  Eigen::MatrixXcd spectrum;
  std::int64_t contributions = 0;
  std::int64_t dropped = 0;
  std::int64_t hits = 0;
};

void add_contributions(const std::vector<Contribution>& contribs, const Eigen::VectorXd& grid,
                       const SimParams& params, const Eigen::ArrayXd& window, Eigen::Index receivers,
                       ChunkAccumulator& acc) {
  for (const auto& c : contribs) {
    ++acc.contributions;
    if (acc.spectrum.size() == 0) acc.spectrum = Eigen::MatrixXcd::Zero(params.bin_count(), receivers);
    if (!add_transfer(c, grid, params, window, acc.spectrum.col(c.receiver))) ++acc.dropped;
  }
}

Eigen::MatrixXcd reduce(std::vector<ChunkAccumulator>& chunks, int bins, Eigen::Index receivers) {
  Eigen::MatrixXcd total = Eigen::MatrixXcd::Zero(bins, receivers);
  for (auto& c : chunks)
    if (c.spectrum.size()) total += c.spectrum;
  return total;
}

Eigen::MatrixXd to_time_domain_columns(const Eigen::MatrixXcd& spectra, int ir_length) {
  Eigen::MatrixXd out(ir_length, spectra.cols());
  for (Eigen::Index i = 0; i < spectra.cols(); ++i) out.col(i) = to_time_domain(spectra.col(i), ir_length);
  return out;
}

template <typename Fn>
auto staged(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.code(), std::string("[") + stage + "] " + e.what());
  }
}

}  // namespace

PreparedObject prepare_object(const RawMesh& raw, const MaterialParams& material, const Pose& pose, unsigned workers,
                              double merge_tolerance) {
  material.validate();
  PreparedObject obj;
  obj.mesh = repair_mesh(raw, merge_tolerance, &obj.report);
  const CurvatureField field = estimate_curvature(obj.mesh, workers);
  obj.face_curvature = field.face_magnitude;
  obj.material = material;
  obj.pose = pose;
  obj.warnings = obj.report.warnings;
  obj.warnings.insert(obj.warnings.end(), field.warnings.begin(), field.warnings.end());
  return obj;
}

Scene assemble_scene(const std::vector<PreparedObject>& objects, const Eigen::VectorXd& frequencies) {
  if (objects.empty()) throw Error(ErrorCode::empty_mesh, "scene has no objects");
  std::vector<Mesh> parts;
  std::vector<BrdfField> fields;
  Eigen::Index faces = 0;
  for (const auto& obj : objects) {
    parts.push_back(transformed(obj.mesh, obj.pose.matrix()));
    fields.push_back(derive_brdf(obj.face_curvature, frequencies, obj.material));
    faces += obj.mesh.face_count();
  }
  Scene scene;
  scene.mesh = concatenate(parts);
  scene.face_curvature.resize(faces);
  scene.brdf.frequencies = frequencies;
  scene.brdf.alpha.resize(faces, frequencies.size());
  scene.brdf.strength.resize(faces, frequencies.size());
  Eigen::Index row = 0;
  for (std::size_t k = 0; k < objects.size(); ++k) {
    const Eigen::Index n = objects[k].mesh.face_count();
    scene.face_curvature.segment(row, n) = objects[k].face_curvature;
    scene.brdf.alpha.middleRows(row, n) = fields[k].alpha;
    scene.brdf.strength.middleRows(row, n) = fields[k].strength;
    row += n;
  }
  return scene;
}

ImpulseResponseSet compute_impulse_responses(const Scene& scene, const SensorArray& array, const Pose& sensor_pose,
                                             const SimParams& params, RunStats* stats_out) {
  params.validate();
  array.validate();
  RunStats stats;
  const Eigen::Index ni = array.receivers.rows();
  const int bins = params.bin_count();
  const Eigen::VectorXd& grid = scene.brdf.frequencies;
  const Eigen::ArrayXd window = band_window(params);
  const WorldSensor world = transform_sensor(array, sensor_pose);

  auto t0 = Clock::now();
  const Bvh bvh(scene.mesh);
  stats.timings["bvh"] = seconds_since(t0);

  // Specular part.
  t0 = Clock::now();
  const std::vector<Ray> rays = staged("raytrace", [&] {
    return generate_rays(params.n_rays, sensor_pose, array.emitter, derive_seed(params.seed, 0));
  });
  TraceOptions options;
  options.max_bounces = params.max_bounces;
  options.normals = params.reflection_normals;
  options.offset = params.self_intersection_offset;
  std::vector<ChunkAccumulator> specular(std::min<std::size_t>(kChunks, rays.size()));
  staged("raytrace", [&] {
    parallel_for(specular.size(), params.workers, [&](std::size_t c) {
      const auto range = chunk_range(rays.size(), specular.size(), c);
      for (std::size_t r = range.begin; r < range.end; ++r) {
        const BounceChain chain = trace_path(rays[r], bvh, options);
        if (chain.empty()) continue;
        ++specular[c].hits;
        add_contributions(sample_brdf_to_receivers(chain, world.receivers, scene.brdf, bvh, options.offset), grid,
                          params, window, ni, specular[c]);
      }
    });
  });
  Eigen::MatrixXcd h_spec = reduce(specular, bins, ni);
  stats.rays = static_cast<std::int64_t>(rays.size());
  for (const auto& c : specular) {
    stats.ray_hits += c.hits;
    stats.specular_contributions += c.contributions;
    stats.dropped_specular += c.dropped;
  }
  if (params.normalize_by_ray_count) h_spec /= static_cast<double>(params.n_rays);
  stats.timings["raytrace"] = seconds_since(t0);

  // Diffraction part; skipped when its gain is zero.
  t0 = Clock::now();
  Eigen::MatrixXcd g_spec = Eigen::MatrixXcd::Zero(bins, ni);
  if (params.n_diffraction_points > 0 && params.diffraction_gain != 0.0) {
    const double threshold = params.diffraction_threshold.value_or(default_curvature_threshold(scene.face_curvature));
    stats.diffraction_threshold = threshold;
    std::optional<SamplingDistribution> dist;
    try {
      dist = build_sampling_distribution(scene.face_curvature, scene.mesh, threshold);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::no_candidates) throw Error(e.code(), std::string("[diffraction] ") + e.what());
      stats.warnings.push_back("no_diffraction_candidates: no face exceeds the curvature threshold; g is zero");
    }
    if (dist) {
      const DiffractionPointSet points = sample_diffraction_points(*dist, scene.mesh, params.n_diffraction_points,
                                                                   derive_seed(params.seed, 1));
      stats.diffraction_points = points.size();
      std::vector<ChunkAccumulator> diff(std::min<std::size_t>(kChunks, points.size()));
      staged("diffraction", [&] {
        parallel_for(diff.size(), params.workers, [&](std::size_t c) {
          const auto range = chunk_range(points.size(), diff.size(), c);
          std::vector<Contribution> contribs;
          for (std::size_t m = range.begin; m < range.end; ++m) {
            contribs.clear();
            evaluate_diffraction_point(points, static_cast<Eigen::Index>(m), world.emitter, world.receivers,
                                       scene.brdf, bvh, params.self_intersection_offset, contribs);
            add_contributions(contribs, grid, params, window, ni, diff[c]);
          }
        });
      });
      g_spec = reduce(diff, bins, ni);
      for (const auto& c : diff) stats.dropped_diffraction += c.dropped;
    }
  }
  stats.timings["diffraction"] = seconds_since(t0);

  t0 = Clock::now();
  ImpulseResponseSet irs;
  staged("spectral", [&] {
    irs.specular = to_time_domain_columns(h_spec, params.ir_length);
    irs.diffraction = to_time_domain_columns(g_spec, params.ir_length);
    irs.combined = combine(irs.specular, irs.diffraction, params.specular_gain, params.diffraction_gain);
  });
  stats.timings["spectral"] = seconds_since(t0);
  if (stats.dropped() > 0)
    stats.warnings.push_back("aliasing_guard: " + std::to_string(stats.dropped()) +
                             " contributions beyond the response length were dropped");
  if (stats_out) *stats_out = std::move(stats);
  return irs;
}

EarBanks default_ears(const SensorArray& array, double sample_rate) {
  return {selection_bank(array.receivers.rows(), array.group_members("left"), sample_rate),
          selection_bank(array.receivers.rows(), array.group_members("right"), sample_rate)};
}

SimulationResult simulate(const Scene& scene, const SensorArray& array, const Pose& sensor_pose,
                          const SimParams& params, const EarBanks& ears, const EmittedCall* call,
                          bool normalize_peak) {
  SimulationResult out;
  out.irs = compute_impulse_responses(scene, array, sensor_pose, params, &out.stats);
  auto t0 = Clock::now();
  std::tie(out.ears.h_left, out.ears.h_right) =
      staged("ertf", [&] { return filter_ears(out.irs, ears.left, ears.right); });
  out.stats.timings["ertf"] = seconds_since(t0);
  if (call) {
    t0 = Clock::now();
    std::tie(out.ears.s_left, out.ears.s_right) =
        staged("signals", [&] { return receive(*call, out.ears.h_left, out.ears.h_right, params.sample_rate); });
    if (normalize_peak) {
      const double peak = std::max(out.ears.s_left.cwiseAbs().maxCoeff(), out.ears.s_right.cwiseAbs().maxCoeff());
      if (peak > 0.0) {
        out.ears.output_scale = 1.0 / peak;
        out.ears.s_left *= out.ears.output_scale;
        out.ears.s_right *= out.ears.output_scale;
      }
    }
    out.stats.timings["signals"] = seconds_since(t0);
  }
  return out;
}

std::uint64_t position_seed(std::uint64_t master, std::size_t index) { return derive_seed(master, index); }

namespace {

PositionResult simulate_placed(const ScanSetup& setup, const std::vector<PreparedObject>& placed,
                               std::size_t index) {
  SimParams params = setup.params;
  params.seed = position_seed(setup.params.seed, index);
  params.workers = 1;
  const Scene scene = assemble_scene(placed, params.brdf_frequencies());
  PositionResult out;
  const ImpulseResponseSet irs = compute_impulse_responses(scene, setup.array, setup.sensor_pose, params, &out.stats);
  out.h_left = apply_filter_bank(setup.ears.left, irs.combined);
  out.h_right = apply_filter_bank(setup.ears.right, irs.combined);
  out.combined_energy = irs.combined.colwise().squaredNorm().mean();
  return out;
}

ScanResult collect(const ScanSetup& setup, std::vector<PositionResult>& rows) {
  ScanResult scan;
  const auto np = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index len_l = rows.empty() ? 0 : rows.front().h_left.size();
  const Eigen::Index len_r = rows.empty() ? 0 : rows.front().h_right.size();
  scan.ir_left.resize(np, len_l);
  scan.ir_right.resize(np, len_r);
  scan.spectrum_left.resize(np, len_l / 2 + 1);
  scan.spectrum_right.resize(np, len_r / 2 + 1);
  scan.energy_left.resize(np);
  scan.energy_right.resize(np);
  scan.combined_energy.resize(np);
  for (Eigen::Index p = 0; p < np; ++p) {
    auto& r = rows[p];
    scan.ir_left.row(p) = r.h_left.transpose();
    scan.ir_right.row(p) = r.h_right.transpose();
    scan.spectrum_left.row(p) = to_frequency_domain(r.h_left).cwiseAbs().transpose();
    scan.spectrum_right.row(p) = to_frequency_domain(r.h_right).cwiseAbs().transpose();
    scan.energy_left(p) = r.h_left.squaredNorm();
    scan.energy_right(p) = r.h_right.squaredNorm();
    scan.combined_energy(p) = r.combined_energy;
    scan.stats.push_back(std::move(r.stats));
  }
  scan.spectrum_frequencies = Eigen::VectorXd::LinSpaced(len_l / 2 + 1, 0.0, static_cast<double>(len_l / 2)) *
                              (setup.params.sample_rate / static_cast<double>(std::max<Eigen::Index>(len_l, 1)));
  return scan;
}

void fill_target_strength(const ScanSetup& setup, ScanResult& scan, double range, const Vec3& direction) {
  if (!setup.reference) return;
  scan.reference_energy = reference_energy(setup, range, direction);
  scan.target_strength_db.resize(scan.combined_energy.size());
  for (Eigen::Index p = 0; p < scan.combined_energy.size(); ++p)
    scan.target_strength_db(p) = scan.reference_energy > 0.0
                                     ? 10.0 * std::log10(scan.combined_energy(p) / scan.reference_energy)
                                     : std::numeric_limits<double>::quiet_NaN();
}

Vec3 centroid_position(const std::vector<PreparedObject>& objects) {
  Vec3 c = Vec3::Zero();
  for (const auto& o : objects) c += o.pose.translation();
  return c / static_cast<double>(objects.size());
}

Eigen::VectorXd band_pattern_frequencies(const ScanSetup& setup) {
  if (setup.pattern_frequencies.size()) return setup.pattern_frequencies;
  const Band b = setup.params.effective_band();
  return Eigen::VectorXd::LinSpaced(16, std::max(b.low, 1.0), b.high);
}

}  // namespace

PositionResult simulate_rotation_position(const ScanSetup& setup, const Vec3& axis, double angle_deg,
                                          std::size_t index) {
  std::vector<PreparedObject> placed = setup.objects;
  const Mat3 turn = axis_rotation(axis, deg2rad(angle_deg)).rotation();
  for (auto& obj : placed) {
    Mat4 m = obj.pose.matrix();
    m.topLeftCorner<3, 3>() = turn * obj.pose.rotation();
    obj.pose = Pose::from_matrix(m);
  }
  return simulate_placed(setup, placed, index);
}

ScanResult run_rotation_scan(const ScanSetup& setup, const Vec3& axis, double start_deg, double end_deg,
                             double step_deg, unsigned workers) {
  if (!(step_deg > 0.0) || !(start_deg < end_deg))
    throw Error(ErrorCode::invalid_argument, "rotation scan needs step > 0 and start < end");
  if (setup.objects.empty()) throw Error(ErrorCode::empty_mesh, "scan has no objects");
  const auto count = static_cast<std::size_t>(std::floor((end_deg - start_deg) / step_deg + 1e-9)) + 1;
  std::vector<PositionResult> rows(count);
  Eigen::VectorXd angles(static_cast<Eigen::Index>(count));
  for (std::size_t p = 0; p < count; ++p) angles(static_cast<Eigen::Index>(p)) = start_deg + p * step_deg;
  parallel_for(count, workers, [&](std::size_t p) {
    rows[p] = simulate_rotation_position(setup, axis, angles(static_cast<Eigen::Index>(p)), p);
  });
  ScanResult scan = collect(setup, rows);
  scan.axis_label = "angle_deg";
  scan.axis = angles;
  const Vec3 target_local =
      setup.sensor_pose.inverse().apply(centroid_position(setup.objects));
  const double range = target_local.norm();
  fill_target_strength(setup, scan, range, range > 0.0 ? Vec3(target_local / range) : Vec3(Vec3::UnitX()));
  return scan;
}

PositionResult simulate_sphere_position(const ScanSetup& setup, const Vec3& direction, double radius,
                                        std::size_t index) {
  std::vector<PreparedObject> placed = setup.objects;
  const Vec3 centre = centroid_position(setup.objects);
  const Vec3 target = setup.sensor_pose.apply(Vec3(radius * direction.normalized()));
  for (auto& obj : placed) {
    Mat4 m = obj.pose.matrix();
    m.topRightCorner<3, 1>() = target + (obj.pose.translation() - centre);
    obj.pose = Pose::from_matrix(m);
  }
  return simulate_placed(setup, placed, index);
}

ScanResult run_sphere_scan(const ScanSetup& setup, int n_points, double radius, unsigned workers) {
  if (n_points < 1) throw Error(ErrorCode::invalid_argument, "sphere scan needs n >= 1");
  if (!(radius > 0.0)) throw Error(ErrorCode::invalid_argument, "sphere scan radius must be positive");
  if (setup.objects.empty()) throw Error(ErrorCode::empty_mesh, "scan has no objects");
  const Points dirs = partition_sphere_directions(n_points, true);
  std::vector<PositionResult> rows(static_cast<std::size_t>(n_points));
  parallel_for(rows.size(), workers, [&](std::size_t p) {
    rows[p] = simulate_sphere_position(setup, dirs.row(static_cast<Eigen::Index>(p)).transpose(), radius, p);
  });
  ScanResult scan = collect(setup, rows);
  scan.axis_label = "direction";
  scan.axis = Eigen::VectorXd::LinSpaced(n_points, 0.0, n_points - 1.0);
  scan.directions = dirs;

  const Eigen::VectorXd freqs = band_pattern_frequencies(setup);
  const double c = setup.params.speed_of_sound;
  auto realized = [&](const ErtfFilterBank& bank) {
    return Eigen::VectorXd(
        evaluate_realized_pattern(bank, setup.array, dirs, freqs, c).cwiseAbs2().colwise().mean().transpose());
  };
  scan.realized_left = realized(setup.ears.left);
  scan.realized_right = realized(setup.ears.right);
  auto desired = [&](const std::optional<AnalyticPattern>& pattern) {
    Eigen::VectorXd d;
    if (!pattern) return d;
    d.resize(n_points);
    for (int p = 0; p < n_points; ++p) d(p) = std::pow(pattern->gain(dirs.row(p).transpose()), 2);
    return d;
  };
  scan.desired_left = desired(setup.left_pattern);
  scan.desired_right = desired(setup.right_pattern);
  fill_target_strength(setup, scan, radius, Vec3::UnitX());
  return scan;
}

double reference_energy(const ScanSetup& setup, double range, const Vec3& direction) {
  PreparedObject plate = prepare_object(primitives::plate(1.0, 1), setup.objects.front().material, Pose());
  const Vec3 d = direction.normalized();
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() =
      setup.sensor_pose.rotation() * Eigen::Quaterniond::FromTwoVectors(Vec3::UnitX(), d).toRotationMatrix();
  m.topRightCorner<3, 1>() = setup.sensor_pose.apply(Vec3(range * d));
  plate.pose = Pose::from_matrix(m);
  SimParams params = setup.params;
  params.workers = 1;
  const Scene scene = assemble_scene({plate}, params.brdf_frequencies());
  const ImpulseResponseSet irs = compute_impulse_responses(scene, setup.array, setup.sensor_pose, params);
  return irs.combined.colwise().squaredNorm().mean();
}

}  // namespace echosim
