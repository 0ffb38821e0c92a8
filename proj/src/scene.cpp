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

#include "echosim/scene.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Geometry>

#include "echosim/error.hpp"

namespace echosim {

Pose Pose::from_matrix(const Mat4& matrix) {
  Mat4 m = matrix;
  m.row(3) << 0, 0, 0, 1;
  return Pose(m);
}

Vec3 Pose::euler_angles() const {
  const Mat3 r = rotation();
  const double gy = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
  const double gx = std::atan2(r(2, 1), r(2, 2));
  const double gz = std::atan2(r(1, 0), r(0, 0));
  return {gx, gy, gz};
}

Pose Pose::inverse() const {
  Mat4 inv = Mat4::Identity();
  inv.topLeftCorner<3, 3>() = rotation().transpose();
  inv.topRightCorner<3, 1>() = -rotation().transpose() * translation();
  return Pose(inv);
}

Mat3 rotation_xyz(const Vec3& angles) {
  return (Eigen::AngleAxisd(angles.z(), Vec3::UnitZ()) * Eigen::AngleAxisd(angles.y(), Vec3::UnitY()) *
          Eigen::AngleAxisd(angles.x(), Vec3::UnitX()))
      .toRotationMatrix();
}

Pose make_pose(const Vec3& translation, const Vec3& angles) {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation_xyz(angles);
  m.topRightCorner<3, 1>() = translation;
  return Pose::from_matrix(m);
}

Pose axis_rotation(const Vec3& axis, double angle) {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
  return Pose::from_matrix(m);
}

void SensorArray::validate() const {
  if (receivers.rows() < 1) throw Error(ErrorCode::invalid_argument, "sensor needs at least one receiver");
  if (!emitter.allFinite() || !receivers.allFinite())
    throw Error(ErrorCode::invalid_argument, "sensor positions must be finite");
  if (!groups.empty() && static_cast<Eigen::Index>(groups.size()) != receivers.rows())
    throw Error(ErrorCode::invalid_argument, "receiver group labels must match the receiver count");
}

std::vector<int> SensorArray::group_members(const std::string& label) const {
  std::vector<int> out;
  for (Eigen::Index i = 0; i < receivers.rows(); ++i)
    if (groups.empty() || groups[i] == label) out.push_back(static_cast<int>(i));
  return out;
}

WorldSensor transform_sensor(const SensorArray& array, const Pose& pose) {
  WorldSensor out;
  out.emitter = pose.apply(array.emitter);
  out.receivers = (array.receivers * pose.rotation().transpose()).rowwise() + pose.translation().transpose();
  return out;
}

void SimParams::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::invalid_argument, what); };
  if (!(speed_of_sound > 0.0)) fail("speed_of_sound must be positive");
  if (!(sample_rate > 0.0)) fail("sample_rate must be positive");
  if (ir_length < 2 || (ir_length & (ir_length - 1)) != 0) fail("ir_length must be a power of two");
  if (n_rays < 1) fail("n_rays must be >= 1");
  if (max_bounces < 1) fail("max_bounces must be >= 1");
  if (n_diffraction_points < 0) fail("n_diffraction_points must be >= 0");
  if (brdf_frequency_count < 1) fail("brdf_frequency_count must be >= 1");
  if (band) {
    if (!(band->low >= 0.0 && band->high > band->low)) fail("band needs 0 <= low < high");
    if (!(band->high < sample_rate / 2.0)) fail("band must stay below Nyquist (fs > 2 * max frequency)");
    if (band->transition < 0.0) fail("band transition must be non-negative");
  }
}

Eigen::VectorXd SimParams::frequency_grid() const {
  return Eigen::VectorXd::LinSpaced(bin_count(), 0.0, sample_rate / 2.0);
}

Band SimParams::effective_band() const {
  if (band) return *band;
  return Band{0.0, sample_rate / 2.0, 0.0};
}

Eigen::VectorXd SimParams::brdf_frequencies() const {
  const Band b = effective_band();
  const double df = sample_rate / ir_length;
  const double lo = std::max(b.low - b.transition, df);
  const double hi = std::min(b.high + b.transition, sample_rate / 2.0);
  if (brdf_frequency_count == 1 || hi <= lo) return Eigen::VectorXd::Constant(1, std::max(lo, 0.5 * (lo + hi)));
  return Eigen::VectorXd::LinSpaced(brdf_frequency_count, lo, hi);
}

Vec3 polar_direction(double colat, double lon) {
  return {std::cos(colat), std::sin(colat) * std::cos(lon), std::sin(colat) * std::sin(lon)};
}

double SpherePartition::region_area(std::size_t i) const {
  const Region& r = regions.at(i);
  return (std::cos(r.colat_min) - std::cos(r.colat_max)) * (r.lon_max - r.lon_min);
}

SpherePartition partition_sphere(int n, bool hemisphere) {
  if (n < 1) throw Error(ErrorCode::invalid_argument, "partition needs n >= 1");
  const double total = hemisphere ? 2.0 * kPi : 4.0 * kPi;
  const double colat_end = hemisphere ? kPi / 2.0 : kPi;
  const double region = total / n;
  // Colatitude of the cap holding `cells` regions.
  auto cap_colat = [&](double cells) {
    return std::acos(std::clamp(1.0 - cells * region / (2.0 * kPi), -1.0, 1.0));
  };

  SpherePartition out;
  if (n == 1) {
    out.regions.push_back({0.0, colat_end, 0.0, 2.0 * kPi});
  } else if (n == 2 && !hemisphere) {
    out.regions.push_back({0.0, kPi / 2.0, 0.0, 2.0 * kPi});
    out.regions.push_back({kPi / 2.0, kPi, 0.0, 2.0 * kPi});
  } else {
    const int caps = hemisphere ? 1 : 2;
    const double polar = cap_colat(1.0);
    const double span = colat_end - (hemisphere ? polar : 2.0 * polar);
    const double ideal_angle = std::sqrt(region);
    const int collars = std::max(1, static_cast<int>(std::lround(span / ideal_angle)));
    const double fitting = span / collars;

    // Ideal (fractional) region counts per collar, rounded with carried
    // discrepancy so the total stays n - caps.
    std::vector<int> counts(collars);
    double carry = 0.0;
    for (int i = 0; i < collars; ++i) {
      const double top = polar + i * fitting;
      const double bottom = polar + (i + 1) * fitting;
      const double ideal = 2.0 * kPi * (std::cos(top) - std::cos(bottom)) / region;
      counts[i] = static_cast<int>(std::lround(ideal + carry));
      carry += ideal - counts[i];
    }
    int assigned = 0;
    for (int c : counts) assigned += c;
    counts.back() += (n - caps) - assigned;

    out.regions.push_back({0.0, polar, 0.0, 2.0 * kPi});
    double cells = 1.0;
    double top = polar;
    for (int i = 0; i < collars; ++i) {
      if (counts[i] <= 0) continue;
      cells += counts[i];
      const double bottom = (i == collars - 1 && hemisphere) ? colat_end : cap_colat(cells);
      // Collars start at lon = pi/2 so every collar is mirror-symmetric
      // about the y = 0 plane.
      const double offset = (i % 2 == 0) ? 0.0 : 0.5;
      for (int k = 0; k < counts[i]; ++k) {
        const double lon0 = kPi / 2.0 + 2.0 * kPi * (k + offset) / counts[i];
        out.regions.push_back({top, bottom, lon0, lon0 + 2.0 * kPi / counts[i]});
      }
      top = bottom;
    }
    if (!hemisphere) out.regions.push_back({top, kPi, 0.0, 2.0 * kPi});
  }

  out.directions.resize(static_cast<Eigen::Index>(out.regions.size()), 3);
  for (std::size_t i = 0; i < out.regions.size(); ++i) {
    const auto& r = out.regions[i];
    const bool cap = r.lon_max - r.lon_min >= 2.0 * kPi - 1e-12;
    Vec3 d;
    if (cap && r.colat_min == 0.0) {
      d = Vec3::UnitX();
    } else if (cap && r.colat_max >= kPi) {
      d = -Vec3::UnitX();
    } else {
      // Colatitude splitting the cell's area in half.
      const double mid = std::acos(0.5 * (std::cos(r.colat_min) + std::cos(r.colat_max)));
      d = polar_direction(mid, 0.5 * (r.lon_min + r.lon_max));
    }
    out.directions.row(i) = d.normalized().transpose();
  }
  return out;
}

Points partition_sphere_directions(int n, bool hemisphere) { return partition_sphere(n, hemisphere).directions; }

}  // namespace echosim
