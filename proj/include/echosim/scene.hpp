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
#include <optional>
#include <string>
#include <vector>

#include "echosim/types.hpp"

namespace echosim {

/// Rigid transform from a local frame (sensor or object) into the world.
///
/// Euler angles are extrinsic, applied about X first, then Y, then Z:
/// matrix = T(translation) * Rz(gz) * Ry(gy) * Rx(gx).
class Pose {
 public:
  Pose() : matrix_(Mat4::Identity()) {}

  static Pose from_matrix(const Mat4& matrix);

  const Mat4& matrix() const { return matrix_; }
  Mat3 rotation() const { return matrix_.topLeftCorner<3, 3>(); }
  Vec3 translation() const { return matrix_.topRightCorner<3, 1>(); }
  /// Extrinsic X-Y-Z angles reproducing rotation().
  Vec3 euler_angles() const;

  template <typename Derived>
  Vec3 apply(const Eigen::MatrixBase<Derived>& point) const {
    return rotation() * point + translation();
  }
  template <typename Derived>
  Vec3 apply_direction(const Eigen::MatrixBase<Derived>& direction) const {
    return rotation() * direction;
  }

  /// (*this) o inner: applies `inner` first.
  Pose compose(const Pose& inner) const { return from_matrix(matrix_ * inner.matrix_); }
  Pose inverse() const;

 private:
  explicit Pose(const Mat4& m) : matrix_(m) {}
  Mat4 matrix_;
};

Mat3 rotation_xyz(const Vec3& angles);
Pose make_pose(const Vec3& translation, const Vec3& angles);
/// Rotation by `angle` (rad) about a unit `axis` through the origin.
Pose axis_rotation(const Vec3& axis, double angle);

/// One emitter and I receivers, positions in the sensor frame (m). The
/// sensor boresight is +X.
struct SensorArray {
  Vec3 emitter = Vec3::Zero();
  Points receivers;
  std::vector<std::string> groups;  ///< empty, or one label per receiver

  Eigen::Index receiver_count() const { return receivers.rows(); }
  void validate() const;
  /// Receivers carrying `label` (all receivers when no labels are set).
  std::vector<int> group_members(const std::string& label) const;
};

struct WorldSensor {
  Vec3 emitter;
  Points receivers;
};

WorldSensor transform_sensor(const SensorArray& array, const Pose& pose);

enum class NormalMode { geometric, interpolated };

/// Analysis band; the transfer spectra are zeroed outside it with raised
/// cosine edges of width `transition`.
struct Band {
  double low = 0.0;
  double high = 0.0;
  double transition = 5e3;
};

struct SimParams {
  double speed_of_sound = 343.0;
  double sample_rate = 1e6;
  int ir_length = 8192;
  std::int64_t n_rays = 100000;
  int max_bounces = 3;
  std::int64_t n_diffraction_points = 10000;
  double specular_gain = 1.0;
  double diffraction_gain = 1.0;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::optional<Band> band;
  int brdf_frequency_count = 32;
  bool normalize_by_ray_count = false;
  std::optional<double> diffraction_threshold;  ///< 1/m; default is the 75th percentile of C_m
  NormalMode reflection_normals = NormalMode::geometric;
  double self_intersection_offset = 1e-6;

  void validate() const;

  int bin_count() const { return ir_length / 2 + 1; }
  double bin_frequency(int j) const { return j * sample_rate / ir_length; }
  /// One-sided FFT grid f_j = j fs / N_t.
  Eigen::VectorXd frequency_grid() const;
  /// Grid the BRDF is evaluated on: evenly spaced over the analysis band.
  Eigen::VectorXd brdf_frequencies() const;
  /// Band actually used (full band [0, fs/2] when unset).
  Band effective_band() const;
};

/// Equal-area partition of the unit sphere (or the hemisphere around +X)
/// into zones of equal-area cells, polar cap first.
struct SpherePartition {
  struct Region {
    double colat_min, colat_max;
    double lon_min, lon_max;
  };
  Points directions;  ///< one representative unit vector per region
  std::vector<Region> regions;

  double region_area(std::size_t i) const;
};

SpherePartition partition_sphere(int n, bool hemisphere);
Points partition_sphere_directions(int n, bool hemisphere);

/// Unit vector at colatitude `colat` from +X and longitude `lon` around it.
Vec3 polar_direction(double colat, double lon);

}  // namespace echosim
