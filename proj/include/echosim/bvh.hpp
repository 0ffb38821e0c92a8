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

#include <array>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Geometry>

#include "echosim/mesh.hpp"

namespace echosim {

struct Hit {
  Eigen::Index face = -1;
  double t = 0.0;
  Vec3 point = Vec3::Zero();
  double u = 0.0;  ///< barycentric weight of corner 1
  double v = 0.0;  ///< barycentric weight of corner 2
};

/// Binary bounding-volume hierarchy over a mesh's triangles (median split
/// on the widest centroid axis). Holds a reference to the mesh, which must
/// outlive it.
class Bvh {
 public:
  explicit Bvh(const Mesh& mesh, int leaf_size = 4);

  const Mesh& mesh() const { return *mesh_; }

  /// Face across edge `edge` (corners edge, edge + 1) of `face`, or -1 on a
  /// boundary or non-manifold edge.
  int neighbor(Eigen::Index face, int edge) const { return neighbors_[face][edge]; }

  /// Nearest hit with t in (t_min, t_max).
  std::optional<Hit> intersect(const Vec3& origin, const Vec3& direction, double t_min = 0.0,
                               double t_max = std::numeric_limits<double>::infinity()) const;

  /// True when any triangle blocks the open segment (t_min, t_max).
  bool occluded(const Vec3& origin, const Vec3& direction, double t_min, double t_max) const;

 private:
  struct Node {
    Eigen::AlignedBox3d box;
    int left = -1;  // child index, or -1 for a leaf
    int right = -1;
    int first = 0;  // leaf range into order_
    int count = 0;
  };

  int build(int first, int count, int leaf_size);
  template <bool AnyHit>
  std::optional<Hit> traverse(const Vec3& origin, const Vec3& direction, double t_min, double t_max) const;

  const Mesh* mesh_;
  std::vector<Node> nodes_;
  std::vector<int> order_;
  std::vector<Vec3> centroids_;
  std::vector<std::array<int, 3>> neighbors_;
};

/// Brute-force nearest hit over every face.
std::optional<Hit> intersect_brute_force(const Mesh& mesh, const Vec3& origin, const Vec3& direction,
                                         double t_min = 0.0);

}  // namespace echosim
