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

#include <cstdint>
#include <vector>

#include "echosim/brdf.hpp"
#include "echosim/bvh.hpp"
#include "echosim/scene.hpp"

namespace echosim {

struct Ray {
  Vec3 origin;
  Vec3 direction;
  double path = 0.0;
};

enum class Provenance { specular, diffraction };

/// One acoustic path to one receiver: magnitude on the BRDF frequency grid
/// and the total emitter -> ... -> receiver path length.
struct Contribution {
  int receiver = 0;
  Eigen::ArrayXd magnitude;
  double path_length = 0.0;
  Provenance provenance = Provenance::specular;
  Eigen::Index face = -1;
};

/// Stratified ray directions over the sensor's frontal hemisphere (+X in the
/// sensor frame): one jittered direction per cell of an equal-area
/// partition, returned in world coordinates. A single ray points along the
/// boresight.
Points generate_ray_directions(std::int64_t n, const Pose& sensor_pose, std::uint64_t seed);

std::vector<Ray> generate_rays(std::int64_t n, const Pose& sensor_pose, const Vec3& emitter_local, std::uint64_t seed);

struct Bounce {
  Eigen::Index face = -1;
  Vec3 point;
  Vec3 incoming;   ///< unit direction arriving at the point
  Vec3 outgoing;   ///< specular reflection direction
  Vec3 normal;     ///< normal used for the reflection
  double path = 0.0;  ///< emitter -> point path length
};

using BounceChain = std::vector<Bounce>;

struct TraceOptions {
  int max_bounces = 3;
  NormalMode normals = NormalMode::geometric;
  double offset = 1e-6;
};

/// Follows one ray through specular bounces until it escapes or reaches
/// `max_bounces`.
BounceChain trace_path(const Ray& ray, const Bvh& bvh, const TraceOptions& options);

std::vector<BounceChain> trace_paths(const std::vector<Ray>& rays, const Bvh& bvh, const TraceOptions& options);

/// Product of k over all bounces of the chain except the last.
Eigen::ArrayXd chain_gain(const BounceChain& chain, const BrdfField& brdf);

/// Shadow ray from a surface point (lifted off the surface toward
/// `target`) to `target`; true when any geometry blocks it.
bool surface_occluded(const Bvh& bvh, const Vec3& point, const Vec3& normal, const Vec3& target, double offset);

/// Samples the final bounce's lobe toward every receiver. Occluded
/// receivers get a zero-magnitude contribution.
std::vector<Contribution> sample_brdf_to_receivers(const BounceChain& chain, const Points& receivers,
                                                   const BrdfField& brdf, const Bvh& bvh, double offset = 1e-6);

/// Traces all rays and returns every receiver contribution, ordered by ray
/// index. Results do not depend on `workers`.
std::vector<Contribution> specular_contributions(std::int64_t n_rays, const Pose& sensor_pose, const SensorArray& array,
                                                 const Bvh& bvh, const BrdfField& brdf, const TraceOptions& options,
                                                 std::uint64_t seed, unsigned workers);

}  // namespace echosim
