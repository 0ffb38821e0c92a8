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

#include <iostream>

#include <CLI11.hpp>

#include "echosim/app.hpp"
#include "echosim/error.hpp"

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c, bool needs_config = true) {
  auto* opt = cmd->add_option("--config", c.config, "Configuration file (.toml or .json)");
  if (needs_config) opt->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "Master random seed");
  cmd->add_option("--workers", c.workers, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--out", c.out, "Output directory");
}

echosim::SimulationConfig load(const Common& c) {
  echosim::SimulationConfig config = echosim::load_config(c.config);
  if (c.seed) config.params.seed = *c.seed;
  if (c.workers) config.params.workers = *c.workers;
  if (!c.out.empty()) config.output.directory = c.out;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sonar and echolocation simulation"};
  app.require_subcommand(1);

  Common sim_opts, rot_opts, sph_opts, fit_opts, info_opts;
  auto* simulate = app.add_subcommand("simulate", "Run one simulation and write impulse responses and signals");
  add_common(simulate, sim_opts);

  auto* rotation = app.add_subcommand("scan-rotation", "Rotate the target over a range of angles");
  add_common(rotation, rot_opts);
  std::optional<double> start, end, step;
  rotation->add_option("--start", start, "First angle (deg)");
  rotation->add_option("--end", end, "Last angle (deg)");
  rotation->add_option("--step", step, "Angle step (deg)");

  auto* sphere = app.add_subcommand("scan-sphere", "Place the target over equal-area frontal directions");
  add_common(sphere, sph_opts);
  std::optional<int> points;
  std::optional<double> radius;
  sphere->add_option("--points", points, "Number of directions");
  sphere->add_option("--radius", radius, "Distance from the sensor (m)");

  auto* fit = app.add_subcommand("fit-ertf", "Fit the configured ear filter banks");
  add_common(fit, fit_opts);

  auto* info = app.add_subcommand("mesh-info", "Report mesh repair, curvature and BRDF diagnostics");
  add_common(info, info_opts, false);
  std::string mesh_path;
  info->add_option("mesh", mesh_path, "STL file (defaults to the config's mesh path)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) {
      const auto config = load(sim_opts);
      const auto result = echosim::run_simulation(config, config.output.directory);
      std::cout << "wrote " << config.output.directory << " (rays hit: " << result.stats.ray_hits
                << ", dropped: " << result.stats.dropped() << ")\n";
    } else if (*rotation) {
      auto config = load(rot_opts);
      if (start) config.scan.start_deg = *start;
      if (end) config.scan.end_deg = *end;
      if (step) config.scan.step_deg = *step;
      const auto scan = echosim::run_rotation_scan(config, config.output.directory);
      std::cout << "wrote " << scan.axis.size() << " positions to " << config.output.directory << "\n";
    } else if (*sphere) {
      auto config = load(sph_opts);
      if (points) config.scan.points = *points;
      if (radius) config.scan.radius = *radius;
      const auto scan = echosim::run_sphere_scan(config, config.output.directory);
      std::cout << "wrote " << scan.axis.size() << " directions to " << config.output.directory << "\n";
    } else if (*fit) {
      const auto config = load(fit_opts);
      const auto ears = echosim::run_fit_ertf(config, config.output.directory);
      std::cout << "wrote left.bank and right.bank to " << config.output.directory << "\n";
    } else if (*info) {
      echosim::MaterialParams material;
      echosim::SimParams params;
      std::string path = mesh_path;
      if (!info_opts.config.empty()) {
        const auto config = load(info_opts);
        params = config.params;
        material = config.objects.front().material.to_params(params.speed_of_sound);
        if (path.empty()) path = config.objects.front().path;
      }
      if (info_opts.workers) params.workers = *info_opts.workers;
      if (path.empty()) throw echosim::Error(echosim::ErrorCode::config_error, "mesh-info needs an STL path");
      const auto report = echosim::mesh_info(path, material, params);
      std::cout << report.dump(2) << "\n";
      if (!info_opts.out.empty()) {
        std::filesystem::create_directories(info_opts.out);
        std::ofstream(std::filesystem::path(info_opts.out) / "mesh_info.json") << report.dump(2) << "\n";
      }
    }
  } catch (const echosim::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
