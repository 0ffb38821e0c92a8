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

#include "echosim/raytrace.hpp"

namespace echosim {

/// Face-level importance distribution over high-curvature faces.
struct SamplingDistribution {
  Eigen::VectorXd probability;  ///< per face, sums to 1
  Eigen::VectorXd cumulative;   ///< non-decreasing, ends at 1
  double threshold = 0.0;
};

/// Default curvature threshold: 75th percentile of C_m over faces.
double default_curvature_threshold(const Eigen::VectorXd& face_magnitude);

/// Face weight max(C_m - threshold, 0) * area, normalized. Throws
/// ErrorCode::no_candidates when no face exceeds the threshold.
SamplingDistribution build_sampling_distribution(const Eigen::VectorXd& face_magnitude, const Mesh& mesh,
                                                 double threshold);

struct DiffractionPointSet {
  Points points;
  std::vector<Eigen::Index> faces;
  Eigen::Matrix<double, Eigen::Dynamic, 2> barycentric;  ///< (u, v) weights of corners 1 and 2
  Eigen::VectorXd face_probability;

  Eigen::Index size() const { return points.rows(); }
};

/// Inverse-CDF face draws, uniform position inside each drawn face.
DiffractionPointSet sample_diffraction_points(const SamplingDistribution& dist, const Mesh& mesh, std::int64_t m,
                                              std::uint64_t seed);

/// Per point and receiver: k * lobe(angle to the mirror direction) / M over
/// the emitter -> point -> receiver path. Points hidden from the emitter or
/// a receiver contribute zero.
std::vector<Contribution> evaluate_diffraction(const DiffractionPointSet& points, const Vec3& emitter,
                                               const Points& receivers, const BrdfField& brdf, const Bvh& bvh,
                                               double offset = 1e-6);

/// Contributions of a single point (the building block of
/// evaluate_diffraction).
void evaluate_diffraction_point(const DiffractionPointSet& points, Eigen::Index index, const Vec3& emitter,
                                const Points& receivers, const BrdfField& brdf, const Bvh& bvh, double offset,
                                std::vector<Contribution>& out);

}  // namespace echosim
