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

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "echosim/brdf.hpp"
#include "echosim/ertf.hpp"
#include "echosim/mesh.hpp"
#include "echosim/scene.hpp"
#include "echosim/signals.hpp"
#include "echosim/spectral.hpp"

namespace echosim {

/// A repaired object in its local frame with curvature precomputed, so it
/// can be placed repeatedly under rigid transforms.
struct PreparedObject {
  Mesh mesh;
  Eigen::VectorXd face_curvature;
  MaterialParams material;
  Pose pose;
  RepairReport report;
  std::vector<std::string> warnings;
};

PreparedObject prepare_object(const RawMesh& raw, const MaterialParams& material, const Pose& pose,
                              unsigned workers = 1, double merge_tolerance = 1e-6);

/// World-frame geometry with per-face BRDF parameters.
struct Scene {
  Mesh mesh;
  Eigen::VectorXd face_curvature;
  BrdfField brdf;
};

/// Places every object at its pose and derives the BRDF on `frequencies`.
Scene assemble_scene(const std::vector<PreparedObject>& objects, const Eigen::VectorXd& frequencies);

struct RunStats {
  std::int64_t rays = 0;
  std::int64_t ray_hits = 0;
  std::int64_t specular_contributions = 0;
  std::int64_t diffraction_points = 0;
  std::int64_t dropped_specular = 0;
  std::int64_t dropped_diffraction = 0;
  double diffraction_threshold = 0.0;
  std::vector<std::string> warnings;
  std::map<std::string, double> timings;  ///< seconds per stage

  std::int64_t dropped() const { return dropped_specular + dropped_diffraction; }
};

/// Specular and diffraction impulse responses per receiver plus their
/// weighted sum. Results are independent of `params.workers`.
ImpulseResponseSet compute_impulse_responses(const Scene& scene, const SensorArray& array, const Pose& sensor_pose,
                                             const SimParams& params, RunStats* stats = nullptr);

struct EarBanks {
  ErtfFilterBank left;
  ErtfFilterBank right;
};

/// One-tap selection banks summing the "left" / "right" receiver groups
/// (all receivers when the array has no groups).
EarBanks default_ears(const SensorArray& array, double sample_rate);

struct SimulationResult {
  ImpulseResponseSet irs;
  BinauralResult ears;
  RunStats stats;
};

/// Full chain: impulse responses, ear filtering and, when a call is given,
/// convolution with it. With `normalize_peak` the received signals are
/// scaled to unit peak and the factor is reported.
SimulationResult simulate(const Scene& scene, const SensorArray& array, const Pose& sensor_pose,
                          const SimParams& params, const EarBanks& ears, const EmittedCall* call = nullptr,
                          bool normalize_peak = false);

/// Seed used for scan position `index`.
std::uint64_t position_seed(std::uint64_t master, std::size_t index);

/// Everything a scan needs besides the positions.
struct ScanSetup {
  std::vector<PreparedObject> objects;
  SensorArray array;
  Pose sensor_pose;
  SimParams params;
  EarBanks ears;
  /// Patterns the ear banks were fitted to, for desired-vs-realized maps.
  std::optional<AnalyticPattern> left_pattern, right_pattern;
  /// Frequencies the realized pattern is averaged over (defaults to the band).
  Eigen::VectorXd pattern_frequencies;
  bool reference = true;  ///< simulate the 1 m^2 reference plate
};

struct ScanResult {
  std::string axis_label;  ///< "angle_deg" or "direction"
  Eigen::VectorXd axis;
  Points directions;  ///< sphere scans: sensor-frame unit vectors
  Eigen::MatrixXd ir_left, ir_right;              ///< positions x samples
  Eigen::MatrixXd spectrum_left, spectrum_right;  ///< positions x bins, |FFT|
  Eigen::VectorXd spectrum_frequencies;
  Eigen::VectorXd energy_left, energy_right;  ///< ear IR energy
  Eigen::VectorXd combined_energy;            ///< mean combined-IR energy over receivers
  Eigen::VectorXd target_strength_db;         ///< relative to the reference plate
  Eigen::VectorXd desired_left, desired_right;    ///< |E|^2, sphere scans with patterns
  Eigen::VectorXd realized_left, realized_right;  ///< band mean |realized|^2
  double reference_energy = 0.0;
  std::vector<RunStats> stats;
};

struct PositionResult {
  Eigen::VectorXd h_left, h_right;
  double combined_energy = 0.0;
  RunStats stats;
};

/// Objects rotated by `angle_deg` about `axis` through their own positions.
PositionResult simulate_rotation_position(const ScanSetup& setup, const Vec3& axis, double angle_deg,
                                          std::size_t index);
ScanResult run_rotation_scan(const ScanSetup& setup, const Vec3& axis, double start_deg, double end_deg,
                             double step_deg, unsigned workers = 1);

/// Objects centred at `radius` along the sensor-frame `direction`.
PositionResult simulate_sphere_position(const ScanSetup& setup, const Vec3& direction, double radius,
                                        std::size_t index);
ScanResult run_sphere_scan(const ScanSetup& setup, int n_points, double radius, unsigned workers = 1);

/// Mean combined-IR energy of a 1 m x 1 m plate facing the sensor at
/// `range` along the sensor-frame `direction`.
double reference_energy(const ScanSetup& setup, double range, const Vec3& direction);

}  // namespace echosim
