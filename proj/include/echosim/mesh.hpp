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

#include <filesystem>
#include <string>
#include <vector>

#include "echosim/types.hpp"

namespace echosim {

class Pose;

enum class StlFormat { ascii, binary };

/// Triangle soup as read from disk: three vertices per facet, no sharing.
struct RawMesh {
  Points vertices;
  Triangles faces;
  StlFormat source_format = StlFormat::binary;

  Eigen::Index vertex_count() const { return vertices.rows(); }
  Eigen::Index face_count() const { return faces.rows(); }
};

/// Repaired triangle mesh with shared vertices and consistent, outward
/// winding.
///
/// `face_normals` are the renormalized averages of the three vertex normals
/// and feed curvature estimation; `geometric_normals` are the flat triangle
/// normals used for specular reflection.
struct Mesh {
  Points vertices;
  Triangles faces;
  Points vertex_normals;
  Points face_normals;
  Points geometric_normals;
  Eigen::VectorXd face_areas;

  Eigen::Index vertex_count() const { return vertices.rows(); }
  Eigen::Index face_count() const { return faces.rows(); }

  Vec3 vertex(Eigen::Index i) const { return vertices.row(i).transpose(); }
  Vec3 corner(Eigen::Index face, int k) const { return vertices.row(faces(face, k)).transpose(); }
  Vec3 face_center(Eigen::Index face) const {
    return (corner(face, 0) + corner(face, 1) + corner(face, 2)) / 3.0;
  }
};

struct RepairReport {
  Eigen::Index raw_vertices = 0;
  Eigen::Index raw_faces = 0;
  Eigen::Index merged_vertices = 0;
  Eigen::Index degenerate_faces = 0;
  Eigen::Index duplicate_faces = 0;
  Eigen::Index flipped_faces = 0;
  Eigen::Index components = 0;
  Eigen::Index boundary_edges = 0;
  Eigen::Index nonmanifold_edges = 0;
  bool orientation_failure = false;
  std::vector<std::string> warnings;
};

RawMesh load_stl(const std::filesystem::path& path);
RawMesh parse_stl(const std::string& bytes);
void save_stl(const std::filesystem::path& path, const RawMesh& mesh, StlFormat format);

/// Merges vertices closer than `merge_tolerance` (m), drops degenerate and
/// duplicate faces, makes windings consistent across shared edges and points
/// each connected component outward, then computes normals and areas.
/// Throws ErrorCode::empty_mesh when nothing survives.
Mesh repair_mesh(const RawMesh& raw, double merge_tolerance = 1e-6, RepairReport* report = nullptr);

/// Recomputes normals and areas from vertices and faces.
void compute_normals(Mesh& mesh);

RawMesh to_raw(const Mesh& mesh);

/// Rigid transform of vertices and normals; areas are unchanged.
Mesh transformed(const Mesh& mesh, const Mat4& transform);

RawMesh scaled(const RawMesh& mesh, double scale);
RawMesh transformed(const RawMesh& mesh, const Mat4& transform);

/// Concatenates meshes (face indices are offset).
Mesh concatenate(const std::vector<Mesh>& parts);
RawMesh concatenate(const std::vector<RawMesh>& parts);

struct BoundingBox {
  Vec3 min;
  Vec3 max;
};

BoundingBox bounding_box(const Points& vertices);

namespace primitives {

/// Shared-vertex analytic shapes, centered at the origin, outward winding.
RawMesh icosphere(double radius, int subdivisions);
/// Square plate in the YZ plane (normal +X), `size` edge length, split into
/// `divisions`² quads.
RawMesh plate(double size, int divisions = 1);
/// Planar grid in the XY plane (normal +Z).
RawMesh grid(double size, int divisions);
RawMesh box(const Vec3& extent);
/// Open cylinder along Z.
RawMesh cylinder(double radius, double height, int segments, int rings);

}  // namespace primitives

}  // namespace echosim
