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

#include <cmath>
#include <limits>
#include <optional>

#include "echosim/types.hpp"

namespace echosim {

template <typename Scalar>
struct TriangleHit {
  Scalar t;
  Scalar u;
  Scalar v;
};

/// Moller-Trumbore ray/triangle test, two-sided. Returns the ray parameter
/// and barycentric (u, v) of the hit (weights of v1 and v2) when
/// t_min < t < t_max.
template <typename Scalar>
std::optional<TriangleHit<Scalar>> moller_trumbore(const Vector3<Scalar>& origin, const Vector3<Scalar>& direction,
                                                   const Vector3<Scalar>& v0, const Vector3<Scalar>& v1,
                                                   const Vector3<Scalar>& v2, Scalar t_min = Scalar(0),
                                                   Scalar t_max = std::numeric_limits<Scalar>::infinity()) {
  const Vector3<Scalar> e1 = v1 - v0;
  const Vector3<Scalar> e2 = v2 - v0;
  const Vector3<Scalar> p = direction.cross(e2);
  const Scalar det = e1.dot(p);
  // Relative threshold: parallel rays (and zero-area triangles) miss.
  const Scalar eps = std::numeric_limits<Scalar>::epsilon() * Scalar(16) * e1.norm() * e2.norm() * direction.norm();
  if (std::abs(det) <= eps) return std::nullopt;
  const Scalar inv = Scalar(1) / det;
  const Vector3<Scalar> s = origin - v0;
  const Scalar u = s.dot(p) * inv;
  if (u < Scalar(0) || u > Scalar(1)) return std::nullopt;
  const Vector3<Scalar> q = s.cross(e1);
  const Scalar v = direction.dot(q) * inv;
  if (v < Scalar(0) || u + v > Scalar(1)) return std::nullopt;
  const Scalar t = e2.dot(q) * inv;
  if (!(t > t_min && t < t_max)) return std::nullopt;
  return TriangleHit<Scalar>{t, u, v};
}

/// Specular reflection d' = d - 2 (d . n) n.
template <typename DerivedD, typename DerivedN>
Vec3 reflect(const Eigen::MatrixBase<DerivedD>& direction, const Eigen::MatrixBase<DerivedN>& normal) {
  return direction - 2.0 * direction.dot(normal) * normal;
}

/// Angle between two directions, stable near 0 and pi.
template <typename DerivedA, typename DerivedB>
double angle_between(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

}  // namespace echosim
