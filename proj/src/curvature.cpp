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

#include "echosim/curvature.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "echosim/parallel.hpp"

namespace echosim {

namespace {

struct Frame {
  Vec3 u;
  Vec3 v;
};

// Rotates the frame (u, v) so that its normal becomes `new_normal`.
Frame rotate_frame(const Vec3& u, const Vec3& v, const Vec3& new_normal) {
  const Vec3 old_normal = u.cross(v);
  const double ndot = old_normal.dot(new_normal);
  if (ndot <= -1.0) return {-u, -v};
  const Vec3 perp_old = new_normal - ndot * old_normal;
  const Vec3 dperp = (old_normal + new_normal) / (1.0 + ndot);
  return {u - dperp * perp_old.dot(u), v - dperp * perp_old.dot(v)};
}

// Re-expresses tensor `t` given in frame `from` in frame `to`.
Eigen::Matrix2d project_tensor(const Frame& from, const Eigen::Matrix2d& t, const Frame& to) {
  const Frame r = rotate_frame(to.u, to.v, from.u.cross(from.v).normalized());
  Eigen::Matrix2d basis;
  basis << r.u.dot(from.u), r.u.dot(from.v), r.v.dot(from.u), r.v.dot(from.v);
  return basis * t * basis.transpose();
}

}  // namespace

VertexAreas vertex_areas(const Mesh& mesh) {
  VertexAreas out;
  out.point = Eigen::VectorXd::Zero(mesh.vertex_count());
  out.corner = Points::Zero(mesh.face_count(), 3);
  for (Eigen::Index f = 0; f < mesh.face_count(); ++f) {
    const Vec3 e[3] = {mesh.corner(f, 2) - mesh.corner(f, 1), mesh.corner(f, 0) - mesh.corner(f, 2),
                       mesh.corner(f, 1) - mesh.corner(f, 0)};
    const double area = 0.5 * e[0].cross(e[1]).norm();
    const double l2[3] = {e[0].squaredNorm(), e[1].squaredNorm(), e[2].squaredNorm()};
    const double ew[3] = {l2[0] * (l2[1] + l2[2] - l2[0]), l2[1] * (l2[2] + l2[0] - l2[1]),
                          l2[2] * (l2[0] + l2[1] - l2[2])};
    double c[3];
    if (ew[0] <= 0.0) {
      c[1] = -0.25 * l2[2] * area / e[0].dot(e[2]);
      c[2] = -0.25 * l2[1] * area / e[0].dot(e[1]);
      c[0] = area - c[1] - c[2];
    } else if (ew[1] <= 0.0) {
      c[2] = -0.25 * l2[0] * area / e[1].dot(e[0]);
      c[0] = -0.25 * l2[2] * area / e[1].dot(e[2]);
      c[1] = area - c[2] - c[0];
    } else if (ew[2] <= 0.0) {
      c[0] = -0.25 * l2[1] * area / e[2].dot(e[1]);
      c[1] = -0.25 * l2[0] * area / e[2].dot(e[0]);
      c[2] = area - c[0] - c[1];
    } else {
      const double scale = 0.5 * area / (ew[0] + ew[1] + ew[2]);
      for (int j = 0; j < 3; ++j) c[j] = scale * (ew[(j + 1) % 3] + ew[(j + 2) % 3]);
    }
    for (int j = 0; j < 3; ++j) {
      out.corner(f, j) = c[j];
      out.point(mesh.faces(f, j)) += c[j];
    }
  }
  return out;
}

CurvatureField estimate_curvature(const Mesh& mesh, unsigned workers) {
  const Eigen::Index nv = mesh.vertex_count();
  const Eigen::Index nf = mesh.face_count();
  CurvatureField out;
  out.tensors.assign(nv, Eigen::Matrix2d::Zero());
  out.frame_u = Points::Zero(nv, 3);
  out.frame_v = Points::Zero(nv, 3);
  out.kappa1 = Eigen::VectorXd::Zero(nv);
  out.kappa2 = Eigen::VectorXd::Zero(nv);
  out.face_magnitude = Eigen::VectorXd::Zero(nf);

  const VertexAreas areas = vertex_areas(mesh);

  // Initial tangent frames from an incident edge.
  Points seed_dir = Points::Zero(nv, 3);
  for (Eigen::Index f = 0; f < nf; ++f)
    for (int k = 0; k < 3; ++k)
      seed_dir.row(mesh.faces(f, k)) = mesh.vertices.row(mesh.faces(f, (k + 1) % 3)) - mesh.vertices.row(mesh.faces(f, k));
  std::vector<Frame> frames(nv);
  for (Eigen::Index v = 0; v < nv; ++v) {
    const Vec3 n = mesh.vertex_normals.row(v).transpose();
    Vec3 u = Vec3(seed_dir.row(v).transpose()).cross(n);
    if (u.squaredNorm() == 0.0) u = n.unitOrthogonal();
    u.normalize();
    frames[v] = {u, n.cross(u)};
  }

  // Per-face second fundamental form from normal differences along edges.
  std::vector<Frame> face_frames(nf);
  std::vector<Eigen::Matrix2d> face_tensors(nf);
  parallel_for(static_cast<std::size_t>(nf), workers, [&](std::size_t fi) {
    const auto f = static_cast<Eigen::Index>(fi);
    const Vec3 e[3] = {mesh.corner(f, 2) - mesh.corner(f, 1), mesh.corner(f, 0) - mesh.corner(f, 2),
                       mesh.corner(f, 1) - mesh.corner(f, 0)};
    const Vec3 t = e[0].normalized();
    const Vec3 n = e[0].cross(e[1]).normalized();
    const Vec3 b = n.cross(t).normalized();
    Eigen::Matrix3d w = Eigen::Matrix3d::Zero();
    Eigen::Vector3d m = Eigen::Vector3d::Zero();
    for (int j = 0; j < 3; ++j) {
      const double u = e[j].dot(t);
      const double v = e[j].dot(b);
      w(0, 0) += u * u;
      w(0, 1) += u * v;
      w(2, 2) += v * v;
      const Vec3 dn = mesh.vertex_normals.row(mesh.faces(f, (j + 2) % 3)).transpose() -
                      mesh.vertex_normals.row(mesh.faces(f, (j + 1) % 3)).transpose();
      const double dnu = dn.dot(t);
      const double dnv = dn.dot(b);
      m(0) += dnu * u;
      m(1) += dnu * v + dnv * u;
      m(2) += dnv * v;
    }
    w(1, 1) = w(0, 0) + w(2, 2);
    w(1, 2) = w(0, 1);
    w(1, 0) = w(0, 1);
    w(2, 1) = w(1, 2);
    const Eigen::Vector3d sol = w.ldlt().solve(m);
    face_frames[f] = {t, b};
    face_tensors[f] << sol(0), sol(1), sol(1), sol(2);
  });

  // Vertex -> incident (face, corner), in face order for reproducible sums.
  std::vector<std::vector<std::pair<int, int>>> incident(nv);
  for (Eigen::Index f = 0; f < nf; ++f)
    for (int k = 0; k < 3; ++k) incident[mesh.faces(f, k)].emplace_back(int(f), k);

  std::size_t isolated = 0;
  for (Eigen::Index v = 0; v < nv; ++v) isolated += incident[v].empty() ? 1 : 0;
  if (isolated > 0)
    out.warnings.push_back("isolated_vertex: " + std::to_string(isolated) + " vertices in no face, curvature set to 0");

  parallel_for(static_cast<std::size_t>(nv), workers, [&](std::size_t vi) {
    const auto v = static_cast<Eigen::Index>(vi);
    out.frame_u.row(v) = frames[v].u.transpose();
    out.frame_v.row(v) = frames[v].v.transpose();
    if (incident[v].empty() || areas.point(v) <= 0.0) return;
    Eigen::Matrix2d acc = Eigen::Matrix2d::Zero();
    for (const auto& [f, k] : incident[v]) {
      const double weight = areas.corner(f, k) / areas.point(v);
      acc += weight * project_tensor(face_frames[f], face_tensors[f], frames[v]);
    }
    acc(0, 1) = acc(1, 0) = 0.5 * (acc(0, 1) + acc(1, 0));
    out.tensors[v] = acc;
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(acc, Eigen::EigenvaluesOnly);
    out.kappa1(v) = eig.eigenvalues()(1);
    out.kappa2(v) = eig.eigenvalues()(0);
  });

  const Eigen::VectorXd magnitude = out.vertex_magnitude();
  for (Eigen::Index f = 0; f < nf; ++f)
    out.face_magnitude(f) =
        (magnitude(mesh.faces(f, 0)) + magnitude(mesh.faces(f, 1)) + magnitude(mesh.faces(f, 2))) / 3.0;
  return out;
}

}  // namespace echosim
