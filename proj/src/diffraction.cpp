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

#include "echosim/diffraction.hpp"

#include <algorithm>
#include <cmath>

#include "echosim/error.hpp"
#include "echosim/intersect.hpp"
#include "echosim/rng.hpp"

namespace echosim {

double default_curvature_threshold(const Eigen::VectorXd& face_magnitude) {
  if (face_magnitude.size() == 0) return 0.0;
  std::vector<double> v(face_magnitude.data(), face_magnitude.data() + face_magnitude.size());
  std::sort(v.begin(), v.end());
  // Linear interpolation between order statistics.
  const double pos = 0.75 * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

SamplingDistribution build_sampling_distribution(const Eigen::VectorXd& face_magnitude, const Mesh& mesh,
                                                 double threshold) {
  if (face_magnitude.size() != mesh.face_count())
    throw Error(ErrorCode::invalid_argument, "curvature field does not match the mesh");
  SamplingDistribution dist;
  dist.threshold = threshold;
  const Eigen::VectorXd weight = (face_magnitude.array() - threshold).cwiseMax(0.0) * mesh.face_areas.array();
  const double total = weight.sum();
  if (!(total > 0.0)) throw Error(ErrorCode::no_candidates, "no face exceeds the curvature threshold");
  dist.probability = weight / total;
  dist.cumulative.resize(weight.size());
  double run = 0.0;
  for (Eigen::Index f = 0; f < weight.size(); ++f) {
    run += dist.probability(f);
    dist.cumulative(f) = run;
  }
  // Pin the tail so draws in [0, 1) always land on a candidate.
  for (Eigen::Index f = weight.size() - 1; f >= 0 && dist.probability(f) == 0.0; --f) dist.cumulative(f) = 1.0;
  const Eigen::Index last = weight.size() - 1;
  dist.cumulative(last) = 1.0;
  for (Eigen::Index f = last - 1; f >= 0 && dist.cumulative(f) > 1.0; --f) dist.cumulative(f) = 1.0;
  return dist;
}

DiffractionPointSet sample_diffraction_points(const SamplingDistribution& dist, const Mesh& mesh, std::int64_t m,
                                              std::uint64_t seed) {
  if (m < 0) throw Error(ErrorCode::invalid_argument, "point count must be >= 0");
  DiffractionPointSet set;
  set.points.resize(m, 3);
  set.faces.resize(m);
  set.barycentric.resize(m, 2);
  set.face_probability = dist.probability;
  Rng rng(seed);
  const double* begin = dist.cumulative.data();
  const double* end = begin + dist.cumulative.size();
  for (std::int64_t i = 0; i < m; ++i) {
    const double draw = rng.uniform();
    const double* it = std::upper_bound(begin, end, draw);
    Eigen::Index f = std::min<Eigen::Index>(it - begin, dist.cumulative.size() - 1);
    while (dist.probability(f) == 0.0 && f > 0) --f;  // guards rounding at cdf plateaus
    double u = rng.uniform();
    double v = rng.uniform();
    if (u + v > 1.0) {
      u = 1.0 - u;
      v = 1.0 - v;
    }
    const Vec3 p = mesh.corner(f, 0) + u * (mesh.corner(f, 1) - mesh.corner(f, 0)) +
                   v * (mesh.corner(f, 2) - mesh.corner(f, 0));
    set.points.row(i) = p.transpose();
    set.faces[i] = f;
    set.barycentric(i, 0) = u;
    set.barycentric(i, 1) = v;
  }
  return set;
}

void evaluate_diffraction_point(const DiffractionPointSet& points, Eigen::Index index, const Vec3& emitter,
                                const Points& receivers, const BrdfField& brdf, const Bvh& bvh, double offset,
                                std::vector<Contribution>& out) {
  const Vec3 p = points.points.row(index).transpose();
  const Eigen::Index face = points.faces[index];
  const Vec3 normal = bvh.mesh().geometric_normals.row(face).transpose();
  const Vec3 incident = p - emitter;
  const double leg_in = incident.norm();
  const Vec3 mirror = reflect(incident / leg_in, normal);
  const double scale = 1.0 / static_cast<double>(points.size());
  const bool lit = !surface_occluded(bvh, p, normal, emitter, offset);
  const auto alpha = brdf.alpha.row(face).transpose();
  const auto k = brdf.strength.row(face).transpose();
  for (Eigen::Index i = 0; i < receivers.rows(); ++i) {
    const Vec3 q = receivers.row(i).transpose();
    const Vec3 to = q - p;
    Contribution c;
    c.receiver = static_cast<int>(i);
    c.path_length = leg_in + to.norm();
    c.provenance = Provenance::diffraction;
    c.face = face;
    if (!lit || surface_occluded(bvh, p, normal, q, offset)) {
      c.magnitude = Eigen::ArrayXd::Zero(brdf.frequency_count());
    } else {
      const double theta = angle_between(mirror, to);
      c.magnitude = scale * k * (-std::numbers::ln2 * (theta / alpha).square()).exp();
    }
    out.push_back(std::move(c));
  }
}

std::vector<Contribution> evaluate_diffraction(const DiffractionPointSet& points, const Vec3& emitter,
                                               const Points& receivers, const BrdfField& brdf, const Bvh& bvh,
                                               double offset) {
  std::vector<Contribution> out;
  out.reserve(points.size() * receivers.rows());
  for (Eigen::Index m = 0; m < points.size(); ++m)
    evaluate_diffraction_point(points, m, emitter, receivers, brdf, bvh, offset, out);
  return out;
}

}  // namespace echosim
