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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "echosim/ertf.hpp"
#include "echosim/mesh.hpp"
#include "echosim/scene.hpp"
#include "echosim/signals.hpp"
#include "echosim/simulation.hpp"

namespace echosim {

/// Material in config units (degrees).
struct MaterialConfig {
  double alpha_min_deg = 5.0;
  double alpha_max_deg = 150.0;
  double k_min = 0.05;
  double k_max = 1.0;
  double kappa_scale = 1.0;

  MaterialParams to_params(double speed_of_sound) const;
};

struct ObjectConfig {
  std::string path;          ///< STL file; empty when `primitive` is set
  nlohmann::json primitive;  ///< {"type": "sphere" | "plate" | "grid" | "box" | "cylinder", ...}
  double scale = 1.0;
  Vec3 position = Vec3::Zero();
  Vec3 rotation_deg = Vec3::Zero();
  double merge_tolerance = 1e-6;
  MaterialConfig material;

  RawMesh load() const;
  Pose pose() const;
};

enum class EarSource { selection, bank_file, pattern, target_csv };

struct EarConfig {
  EarSource source = EarSource::selection;
  std::string group;  ///< receivers used by this ear; empty means all
  std::string bank;   ///< bank_file
  std::string target_csv;
  AnalyticPattern pattern;
  int taps = 128;
  double lambda = 1e-6;
  Regularization lambda_mode = Regularization::trace_normalized;
  int directions = 400;               ///< frontal-hemisphere fit directions
  std::vector<double> frequencies;    ///< empty: DFT bins of the taps inside the band
};

struct CallConfig {
  bool enabled = false;
  CallKind kind = CallKind::hyperbolic_fm;
  double f_start = 80e3;
  double f_end = 40e3;
  double duration = 2e-3;
  Window window = Window::hann;
};

struct OutputConfig {
  std::string directory = "out";
  bool wav = true;
  bool csv = true;
  bool normalize_peak = false;
};

struct ScanConfig {
  Vec3 axis = Vec3::UnitZ();
  double start_deg = -90.0;
  double end_deg = 90.0;
  double step_deg = 1.0;
  int points = 1000;
  double radius = 1.0;
  bool reference = true;
};

struct SimulationConfig {
  std::vector<ObjectConfig> objects;
  SensorArray sensor;
  Vec3 sensor_position = Vec3::Zero();
  Vec3 sensor_rotation_deg = Vec3::Zero();
  SimParams params;
  EarConfig left, right;
  CallConfig call;
  OutputConfig output;
  ScanConfig scan;

  Pose sensor_pose() const;
};

/// TOML (.toml) or JSON (anything else) file; relative paths inside are
/// resolved against the file's directory. Throws ErrorCode::config_error.
SimulationConfig load_config(const std::filesystem::path& path);
SimulationConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
/// Reads TOML text into the JSON document model.
nlohmann::json parse_toml(const std::string& text, const std::string& source = "config");

/// Every setting with defaults resolved; parse_config(to_json(c)) == c.
nlohmann::json to_json(const SimulationConfig& config);

/// Hash over the effective config, excluding the worker count and the
/// output directory.
std::string config_hash(const SimulationConfig& config);

std::vector<PreparedObject> prepare_objects(const SimulationConfig& config);

struct PreparedEars {
  EarBanks banks;
  std::optional<AnalyticPattern> left_pattern, right_pattern;
  Eigen::VectorXd pattern_frequencies;
  FitResult left_fit, right_fit;  ///< set for fitted ears
};

PreparedEars prepare_ears(const SimulationConfig& config);

/// Fits one ear as configured (pattern or CSV sources).
FitResult fit_ear(const EarConfig& ear, const SimulationConfig& config);

std::optional<EmittedCall> make_call(const SimulationConfig& config);

ScanSetup make_scan_setup(const SimulationConfig& config);

}  // namespace echosim
