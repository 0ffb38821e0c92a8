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

#include <string>
#include <vector>

#include "echosim/mesh.hpp"

namespace echosim {

/// Per-vertex second fundamental form and derived magnitudes.
///
/// `tensors[v]` is the symmetric 2x2 curvature tensor expressed in the
/// orthonormal tangent frame (`frame_u[v]`, `frame_v[v]`). Curvature is
/// positive where the surface bends away from its outward normal (a sphere
/// of radius R has +1/R).
struct CurvatureField {
  std::vector<Eigen::Matrix2d> tensors;
  Points frame_u;
  Points frame_v;
  Eigen::VectorXd kappa1;  ///< larger principal curvature, 1/m
  Eigen::VectorXd kappa2;  ///< smaller principal curvature, 1/m
  Eigen::VectorXd face_magnitude;  ///< C_m per face, 1/m
  std::vector<std::string> warnings;

  /// max(|kappa1|, |kappa2|) per vertex.
  Eigen::VectorXd vertex_magnitude() const { return kappa1.cwiseAbs().cwiseMax(kappa2.cwiseAbs()); }
};

/// Per-vertex "mixed Voronoi" area and each face corner's share of it.
struct VertexAreas {
  Eigen::VectorXd point;
  Points corner;  // face x corner
};

VertexAreas vertex_areas(const Mesh& mesh);

/// Curvature tensor estimate from per-face finite differences of vertex
/// normals, accumulated into per-vertex tangent frames (Rusinkiewicz 2004).
/// Vertices referenced by no face get zero curvature and a warning.
CurvatureField estimate_curvature(const Mesh& mesh, unsigned workers = 1);

}  // namespace echosim
