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

#include <json.hpp>

#include "echosim/config.hpp"

namespace echosim {

/// Pipeline for one configuration; writes per-receiver specular, diffraction
/// and combined IRs, ear IRs, received signals, metadata.json and
/// effective_config.json into `out_dir`.
SimulationResult run_simulation(const SimulationConfig& config, const std::filesystem::path& out_dir);

/// Scans from the [scan] section; write CSV matrices and metadata.json.
ScanResult run_rotation_scan(const SimulationConfig& config, const std::filesystem::path& out_dir);
ScanResult run_sphere_scan(const SimulationConfig& config, const std::filesystem::path& out_dir);

/// Fits both configured ears; writes bank files, realized-pattern CSVs and
/// metadata.json.
PreparedEars run_fit_ertf(const SimulationConfig& config, const std::filesystem::path& out_dir);

/// Diagnostics for an STL file: counts before/after repair, bounding box,
/// area, curvature histogram and BRDF ranges at `params.brdf_frequencies()`.
nlohmann::json mesh_info(const std::filesystem::path& path, const MaterialParams& material,
                         const SimParams& params = {}, int histogram_bins = 20);

/// True when `metadata_path` records the hash of `config`.
bool metadata_matches(const std::filesystem::path& metadata_path, const SimulationConfig& config);

}  // namespace echosim
