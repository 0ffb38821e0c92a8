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

#include "echosim/raytrace.hpp"

#include <algorithm>
#include <cmath>

#include "echosim/error.hpp"
#include "echosim/intersect.hpp"
#include "echosim/parallel.hpp"
#include "echosim/rng.hpp"

namespace echosim {

Points generate_ray_directions(std::int64_t n, const Pose& sensor_pose, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::invalid_argument, "need at least one ray");
  const Mat3 rot = sensor_pose.rotation();
  Points out(n, 3);
  if (n == 1) {
    out.row(0) = (rot * Vec3::UnitX()).transpose();
    return out;
  }
  const SpherePartition cells = partition_sphere(static_cast<int>(n), true);
  Rng rng(seed);
  auto draw_colat = [&](const SpherePartition::Region& c) {
    const double cos_hi = std::cos(c.colat_min);
    const double cos_lo = std::cos(c.colat_max);
    return std::acos(std::clamp(cos_lo + (cos_hi - cos_lo) * rng.uniform(), -1.0, 1.0));
  };
  // Directions come in mirror pairs about the sensor's y = 0 plane
  // (lon -> pi - lon); cells that are their own mirror image sample on it.
  std::size_t i = 0;
  while (i < cells.regions.size()) {
    const auto& first = cells.regions[i];
    if (first.lon_max - first.lon_min >= 2.0 * kPi - 1e-12) {
      const double colat = draw_colat(first);
      out.row(i) = (rot * Vec3(std::cos(colat), 0.0, std::sin(colat))).normalized().transpose();
      ++i;
      continue;
    }
    std::size_t m = 0;
    while (i + m < cells.regions.size() && cells.regions[i + m].colat_min == first.colat_min) ++m;
    const double width = 2.0 * kPi / static_cast<double>(m);
    const auto twice_offset =
        static_cast<long>(std::lround(2.0 * (first.lon_min - kPi / 2.0) / width));
    const auto mm = static_cast<long>(m);
    for (long k = 0; k < mm; ++k) {
      const long partner = (((-k - 1 - twice_offset) % mm) + mm) % mm;
      if (partner < k) continue;
      const auto& c = cells.regions[i + k];
      const double colat = draw_colat(c);
      if (partner == k) {
        // The cell straddles lon = pi/2 or 3pi/2; put the ray on the plane exactly.
        double lon = kPi / 2.0;
        while (lon < c.lon_min) lon += kPi;
        const double side = std::sin(lon) >= 0.0 ? 1.0 : -1.0;
        out.row(i + k) = (rot * Vec3(std::cos(colat), 0.0, side * std::sin(colat))).normalized().transpose();
        continue;
      }
      const double lon = c.lon_min + (c.lon_max - c.lon_min) * rng.uniform();
      const Vec3 local = polar_direction(colat, lon);
      const Vec3 mirrored(local.x(), -local.y(), local.z());
      out.row(i + k) = (rot * local).normalized().transpose();
      out.row(i + partner) = (rot * mirrored).normalized().transpose();
    }
    i += m;
  }
  return out;
}

std::vector<Ray> generate_rays(std::int64_t n, const Pose& sensor_pose, const Vec3& emitter_local,
                               std::uint64_t seed) {
  const Points dirs = generate_ray_directions(n, sensor_pose, seed);
  const Vec3 origin = sensor_pose.apply(emitter_local);
  std::vector<Ray> rays(n);
  for (std::int64_t i = 0; i < n; ++i) rays[i] = Ray{origin, dirs.row(i).transpose(), 0.0};
  return rays;
}

BounceChain trace_path(const Ray& ray, const Bvh& bvh, const TraceOptions& options) {
  BounceChain chain;
  const Mesh& mesh = bvh.mesh();
  Vec3 origin = ray.origin;
  Vec3 dir = ray.direction;
  double path = ray.path;
  double lead = 0.0;  // distance between the true surface point and the offset origin
  for (int b = 0; b < options.max_bounces; ++b) {
    const auto hit = bvh.intersect(origin, dir);
    if (!hit) break;
    Vec3 normal = mesh.geometric_normals.row(hit->face).transpose();
    if (options.normals == NormalMode::geometric) {
      // On a shared edge the normal is ambiguous; use the mean of both faces.
      constexpr double eps = 1e-9;
      const double w = 1.0 - hit->u - hit->v;
      const int edge = hit->v < eps ? 0 : w < eps ? 1 : hit->u < eps ? 2 : -1;
      const int other = edge < 0 ? -1 : bvh.neighbor(hit->face, edge);
      if (other >= 0) {
        const Vec3 n2 = mesh.geometric_normals.row(other).transpose();
        if (n2.dot(normal) > 0.0) normal = (normal + n2).normalized();
      }
    } else {
      const Vec3 n0 = mesh.vertex_normals.row(mesh.faces(hit->face, 0)).transpose();
      const Vec3 n1 = mesh.vertex_normals.row(mesh.faces(hit->face, 1)).transpose();
      const Vec3 n2 = mesh.vertex_normals.row(mesh.faces(hit->face, 2)).transpose();
      const Vec3 blended = (1.0 - hit->u - hit->v) * n0 + hit->u * n1 + hit->v * n2;
      if (blended.squaredNorm() > 0.0) normal = blended.normalized();
    }
    path += lead + hit->t;
    Bounce bounce;
    bounce.face = hit->face;
    bounce.point = hit->point;
    bounce.incoming = dir;
    bounce.outgoing = reflect(dir, normal).normalized();
    bounce.normal = normal;
    bounce.path = path;
    chain.push_back(bounce);
    origin = bounce.point + options.offset * bounce.outgoing;
    dir = bounce.outgoing;
    lead = options.offset;
  }
  return chain;
}

std::vector<BounceChain> trace_paths(const std::vector<Ray>& rays, const Bvh& bvh, const TraceOptions& options) {
  if (options.max_bounces < 1) throw Error(ErrorCode::invalid_argument, "max_bounces must be >= 1");
  std::vector<BounceChain> out;
  out.reserve(rays.size());
  for (const auto& ray : rays) out.push_back(trace_path(ray, bvh, options));
  return out;
}

Eigen::ArrayXd chain_gain(const BounceChain& chain, const BrdfField& brdf) {
  Eigen::ArrayXd gain = Eigen::ArrayXd::Ones(brdf.frequency_count());
  for (std::size_t b = 0; b + 1 < chain.size(); ++b) gain *= brdf.strength.row(chain[b].face).transpose();
  return gain;
}

bool surface_occluded(const Bvh& bvh, const Vec3& point, const Vec3& normal, const Vec3& target, double offset) {
  const double side = normal.dot(target - point) >= 0.0 ? 1.0 : -1.0;
  const Vec3 origin = point + side * offset * normal;
  const Vec3 to = target - origin;
  const double dist = to.norm();
  if (dist <= 0.0) return false;
  return bvh.occluded(origin, to / dist, 0.0, dist * (1.0 - 1e-12));
}

std::vector<Contribution> sample_brdf_to_receivers(const BounceChain& chain, const Points& receivers,
                                                   const BrdfField& brdf, const Bvh& bvh, double offset) {
  if (chain.empty()) throw Error(ErrorCode::invalid_argument, "bounce chain is empty");
  const Bounce& last = chain.back();
  const Eigen::ArrayXd gain = chain_gain(chain, brdf);
  const Vec3& face_normal = last.normal;
  const double out_side = face_normal.dot(last.outgoing);
  std::vector<Contribution> out;
  out.reserve(receivers.rows());
  for (Eigen::Index i = 0; i < receivers.rows(); ++i) {
    const Vec3 q = receivers.row(i).transpose();
    const Vec3 to = q - last.point;
    const double dist = to.norm();
    Contribution c;
    c.receiver = static_cast<int>(i);
    c.path_length = last.path + dist;
    c.provenance = Provenance::specular;
    c.face = last.face;
    // The reflecting surface itself hides receivers on its far side.
    const bool behind = face_normal.dot(to) * out_side <= 0.0;
    if (behind || surface_occluded(bvh, last.point, face_normal, q, offset)) {
      c.magnitude = Eigen::ArrayXd::Zero(brdf.frequency_count());
    } else {
      const double theta = angle_between(last.outgoing, to);
      const auto alpha = brdf.alpha.row(last.face).transpose();
      const auto k = brdf.strength.row(last.face).transpose();
      c.magnitude = gain * k * (-std::numbers::ln2 * (theta / alpha).square()).exp();
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<Contribution> specular_contributions(std::int64_t n_rays, const Pose& sensor_pose,
                                                 const SensorArray& array, const Bvh& bvh, const BrdfField& brdf,
                                                 const TraceOptions& options, std::uint64_t seed, unsigned workers) {
  const std::vector<Ray> rays = generate_rays(n_rays, sensor_pose, array.emitter, seed);
  const WorldSensor world = transform_sensor(array, sensor_pose);
  const std::size_t chunks = std::min<std::size_t>(64, rays.size());
  std::vector<std::vector<Contribution>> parts(chunks);
  parallel_for(chunks, workers, [&](std::size_t c) {
    const auto range = chunk_range(rays.size(), chunks, c);
    for (std::size_t r = range.begin; r < range.end; ++r) {
      const BounceChain chain = trace_path(rays[r], bvh, options);
      if (chain.empty()) continue;
      auto contribs = sample_brdf_to_receivers(chain, world.receivers, brdf, bvh, options.offset);
      for (auto& x : contribs) parts[c].push_back(std::move(x));
    }
  });
  std::vector<Contribution> out;
  for (auto& p : parts)
    for (auto& x : p) out.push_back(std::move(x));
  return out;
}

}  // namespace echosim
