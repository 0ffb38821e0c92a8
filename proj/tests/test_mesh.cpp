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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <random>

#include "echosim/brdf.hpp"
#include "echosim/curvature.hpp"
#include "echosim/error.hpp"
#include "echosim/mesh.hpp"
#include "oracles.hpp"

using namespace echosim;

namespace {

RawMesh soup(const RawMesh& m) {
  RawMesh out;
  out.vertices.resize(3 * m.face_count(), 3);
  out.faces.resize(m.face_count(), 3);
  for (Eigen::Index f = 0; f < m.face_count(); ++f)
    for (int k = 0; k < 3; ++k) {
      out.vertices.row(3 * f + k) = m.vertices.row(m.faces(f, k));
      out.faces(f, k) = static_cast<int>(3 * f + k);
    }
  return out;
}

RawMesh unit_cube() { return soup(primitives::box(Vec3::Ones())); }

void write_bytes(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream(p, std::ios::binary) << bytes;
}

std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an echosim::Error");
  return ErrorCode::io_error;
}

}  // namespace

TEST_CASE("stl: cube facets load one triangle per facet") {
  const auto dir = oracle::temp_dir("mesh_stl");
  save_stl(dir / "cube.stl", unit_cube(), StlFormat::binary);
  const RawMesh raw = load_stl(dir / "cube.stl");
  CHECK(raw.face_count() == 12);
  CHECK(raw.vertex_count() == 36);
  CHECK(raw.source_format == StlFormat::binary);
}

TEST_CASE("stl: ascii and binary encodings give the same raw mesh") {
  const auto dir = oracle::temp_dir("mesh_fmt");
  const RawMesh cube = unit_cube();
  save_stl(dir / "a.stl", cube, StlFormat::ascii);
  save_stl(dir / "b.stl", cube, StlFormat::binary);
  const RawMesh a = load_stl(dir / "a.stl");
  const RawMesh b = load_stl(dir / "b.stl");
  CHECK(a.source_format == StlFormat::ascii);
  CHECK(a.faces == b.faces);
  CHECK((a.vertices - b.vertices).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.vertices - cube.vertices).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("stl: malformed input") {
  const auto dir = oracle::temp_dir("mesh_bad");
  save_stl(dir / "cube.stl", unit_cube(), StlFormat::binary);
  std::string bytes = read_bytes(dir / "cube.stl");

  SUBCASE("truncated binary record") {
    write_bytes(dir / "t.stl", bytes.substr(0, bytes.size() - 7));
    CHECK(code_of([&] { load_stl(dir / "t.stl"); }) == ErrorCode::parse_error);
  }
  SUBCASE("facet count inconsistent with length") {
    bytes[80] = 13;
    write_bytes(dir / "c.stl", bytes);
    CHECK(code_of([&] { load_stl(dir / "c.stl"); }) == ErrorCode::parse_error);
  }
  SUBCASE("ascii facet with two vertices") {
    write_bytes(dir / "a.stl",
                "solid x\nfacet normal 0 0 1\nouter loop\nvertex 0 0 0\nvertex 1 0 0\nendloop\nendfacet\nendsolid x\n");
    CHECK(code_of([&] { load_stl(dir / "a.stl"); }) == ErrorCode::parse_error);
  }
  SUBCASE("missing file") { CHECK(code_of([&] { load_stl(dir / "nope.stl"); }) == ErrorCode::io_error); }
  SUBCASE("empty file") {
    write_bytes(dir / "e.stl", "");
    CHECK(code_of([&] { load_stl(dir / "e.stl"); }) == ErrorCode::parse_error);
  }
}

TEST_CASE("repair: cube topology") {
  RepairReport report;
  const Mesh m = repair_mesh(unit_cube(), 1e-6, &report);
  CHECK(m.vertex_count() == 8);
  CHECK(m.face_count() == 12);
  CHECK(report.boundary_edges == 0);
  CHECK(m.face_areas.sum() == doctest::Approx(6.0).epsilon(1e-12));
  for (Eigen::Index f = 0; f < m.face_count(); ++f)
    CHECK(m.geometric_normals.row(f).dot(m.face_center(f).transpose()) > 0.0);
}

TEST_CASE("repair: duplicate face removed") {
  RawMesh raw = primitives::icosphere(1.0, 1);
  const Eigen::Index before = raw.face_count();
  raw.faces.conservativeResize(before + 1, 3);
  raw.faces.row(before) << raw.faces(3, 1), raw.faces(3, 2), raw.faces(3, 0);
  RepairReport report;
  const Mesh m = repair_mesh(raw, 1e-6, &report);
  CHECK(m.face_count() == before);
  CHECK(report.duplicate_faces == 1);
}

TEST_CASE("repair: degenerate faces dropped, all-degenerate rejected") {
  RawMesh raw = primitives::box(Vec3::Ones());
  const Eigen::Index before = raw.face_count();
  raw.faces.conservativeResize(before + 1, 3);
  raw.faces.row(before) << 0, 0, 1;
  CHECK(repair_mesh(raw).face_count() == before);

  RawMesh flat;
  flat.vertices.resize(3, 3);
  flat.vertices << 0, 0, 0, 1, 0, 0, 2, 0, 0;
  flat.faces.resize(1, 3);
  flat.faces << 0, 1, 2;
  CHECK(code_of([&] { repair_mesh(flat); }) == ErrorCode::empty_mesh);
}

TEST_CASE("repair: flipped winding on an icosphere is corrected outward") {
  for (int n : {1, 2, 3}) {
    RawMesh raw = primitives::icosphere(0.5, n);
    std::swap(raw.faces(7, 1), raw.faces(7, 2));
    const Mesh m = repair_mesh(raw);
    CHECK(m.face_count() == 20 * (1 << (2 * n)));
    int outward = 0;
    for (Eigen::Index f = 0; f < m.face_count(); ++f)
      outward += m.geometric_normals.row(f).dot(m.face_center(f).transpose()) > 0.0;
    CHECK(outward == m.face_count());
  }
}

TEST_CASE("repair: open mesh and merge tolerance") {
  RepairReport report;
  const Mesh m = repair_mesh(soup(primitives::grid(1.0, 4)), 1e-6, &report);
  CHECK(m.vertex_count() == 25);
  CHECK(report.boundary_edges == 16);
  CHECK_FALSE(report.warnings.empty());

  RawMesh jittered = soup(primitives::grid(1.0, 2));
  jittered.vertices.array() += 1e-8 * Eigen::ArrayXXd::Random(jittered.vertex_count(), 3);
  CHECK(repair_mesh(jittered, 1e-6).vertex_count() == 9);
  CHECK(repair_mesh(jittered, 1e-12).vertex_count() > 9);
}

TEST_CASE("property: repair is idempotent") {
  for (const RawMesh& raw : {unit_cube(), primitives::icosphere(0.3, 2), soup(primitives::cylinder(0.1, 0.3, 24, 6))}) {
    const Mesh once = repair_mesh(raw);
    const Mesh twice = repair_mesh(to_raw(once));
    CHECK(once.faces == twice.faces);
    CHECK(once.vertices == twice.vertices);
    CHECK(once.vertex_normals == twice.vertex_normals);
    CHECK(once.face_normals == twice.face_normals);
  }
}

TEST_CASE("property: normals are unit length, face normal is the averaged vertex normal") {
  const Mesh m = repair_mesh(primitives::icosphere(0.2, 2));
  for (const Points* p : {&m.vertex_normals, &m.face_normals, &m.geometric_normals})
    CHECK((p->rowwise().norm().array() - 1.0).abs().maxCoeff() < 1e-9);
  for (Eigen::Index f = 0; f < m.face_count(); ++f) {
    Vec3 avg = Vec3::Zero();
    for (int k = 0; k < 3; ++k) avg += m.vertex_normals.row(m.faces(f, k)).transpose();
    CHECK((avg.normalized() - m.face_normals.row(f).transpose()).norm() < 1e-12);
  }
}

TEST_CASE("curvature: icosphere radius 0.1 m is 10 per metre") {
  const Mesh m = repair_mesh(primitives::icosphere(0.1, 4));
  const CurvatureField c = estimate_curvature(m);
  CHECK((c.kappa1.array() / 10.0 - 1.0).abs().maxCoeff() < 0.05);
  CHECK((c.kappa2.array() / 10.0 - 1.0).abs().maxCoeff() < 0.05);
  CHECK((c.kappa1.array() >= c.kappa2.array()).all());
  for (const auto& t : c.tensors) CHECK(std::abs(t(0, 1) - t(1, 0)) < 1e-12);
}

TEST_CASE("curvature: plane interior faces are flat") {
  const Mesh m = repair_mesh(primitives::grid(1.0, 10));
  const CurvatureField c = estimate_curvature(m);
  CHECK(c.face_magnitude.cwiseAbs().maxCoeff() < 1e-6);
  CHECK((c.face_magnitude.array() >= 0.0).all());
}

TEST_CASE("curvature: cylinder radius 0.05 m is {20, 0} per metre away from the rims") {
  const double r = 0.05;
  const Mesh m = repair_mesh(primitives::cylinder(r, 0.2, 64, 16));
  const CurvatureField c = estimate_curvature(m);
  int checked = 0;
  for (Eigen::Index v = 0; v < m.vertex_count(); ++v) {
    if (std::abs(m.vertices(v, 2)) > 0.07) continue;
    ++checked;
    CHECK(c.kappa1(v) == doctest::Approx(20.0).epsilon(0.05));
    CHECK(std::abs(c.kappa2(v)) < 0.05 * 20.0);
  }
  CHECK(checked > 0);
}

TEST_CASE("curvature: isolated vertex warns and gets zero") {
  RawMesh raw = primitives::icosphere(0.1, 2);
  const Mesh base = repair_mesh(raw);
  Mesh m = base;
  m.vertices.conservativeResize(m.vertex_count() + 1, 3);
  m.vertices.row(m.vertex_count() - 1) << 5, 5, 5;
  compute_normals(m);
  const CurvatureField c = estimate_curvature(m);
  CHECK(c.kappa1(m.vertex_count() - 1) == 0.0);
  REQUIRE(c.warnings.size() == 1);
  CHECK(c.warnings[0].find("isolated_vertex") != std::string::npos);
}

TEST_CASE("property: curvature is invariant under rigid motion") {
  std::mt19937_64 rng(3);
  const Mesh m = repair_mesh(soup(primitives::cylinder(0.08, 0.3, 40, 10)));
  const CurvatureField a = estimate_curvature(m);
  Mat4 t = Mat4::Identity();
  t.topLeftCorner<3, 3>() = oracle::random_rotation(rng);
  t.topRightCorner<3, 1>() << 1.5, -2.0, 0.7;
  const CurvatureField b = estimate_curvature(transformed(m, t));
  const double scale = a.kappa1.cwiseAbs().maxCoeff();
  CHECK((a.kappa1 - b.kappa1).cwiseAbs().maxCoeff() < 1e-9 * scale);
  CHECK((a.kappa2 - b.kappa2).cwiseAbs().maxCoeff() < 1e-9 * scale);
  CHECK((a.face_magnitude - b.face_magnitude).cwiseAbs().maxCoeff() < 1e-9 * scale);
}

TEST_CASE("property: uniform scaling by s scales curvature by 1/s") {
  const RawMesh raw = primitives::icosphere(0.1, 3);
  const CurvatureField a = estimate_curvature(repair_mesh(raw));
  for (double s : {0.5, 3.0}) {
    const CurvatureField b = estimate_curvature(repair_mesh(scaled(raw, s)));
    CHECK(((b.kappa1 * s - a.kappa1).cwiseAbs().array() / a.kappa1.cwiseAbs().array()).maxCoeff() < 1e-6);
  }
}

TEST_CASE("brdf: plane maps to alpha_min and k_max") {
  const Eigen::VectorXd freqs = Eigen::VectorXd::LinSpaced(5, 20e3, 100e3);
  const MaterialParams mat;
  const BrdfField b = derive_brdf(Eigen::VectorXd::Zero(7), freqs, mat);
  CHECK((b.alpha - mat.alpha_min).abs().maxCoeff() == 0.0);
  CHECK((b.strength - mat.k_max).abs().maxCoeff() == 0.0);
}

TEST_CASE("brdf: monotone in curvature and within bounds") {
  const Eigen::VectorXd freqs = Eigen::VectorXd::LinSpaced(9, 10e3, 150e3);
  Eigen::VectorXd c(6);
  c << 0.0, 0.3, 3.0, 30.0, 300.0, 3000.0;
  const BrdfField b = derive_brdf(c, freqs, MaterialParams{});
  for (Eigen::Index i = 1; i < c.size(); ++i) {
    CHECK((b.alpha.row(i) >= b.alpha.row(i - 1)).all());
    CHECK((b.strength.row(i) <= b.strength.row(i - 1)).all());
  }
  CHECK((b.alpha > 0.0).all());
  CHECK((b.alpha <= kPi).all());
  CHECK((b.strength >= 0.0).all());
  CHECK((b.strength <= 1.0).all());
}

TEST_CASE("brdf: icosphere at 40 kHz matches the closed-form mapping") {
  const Mesh m = repair_mesh(primitives::icosphere(0.1, 3));
  const CurvatureField c = estimate_curvature(m);
  MaterialParams mat;
  mat.kappa_scale = 0.7;
  const BrdfField b = derive_brdf(c, Eigen::VectorXd::Constant(1, 40e3), mat);
  for (Eigen::Index f = 0; f < m.face_count(); ++f) {
    double alpha = 0, k = 0;
    oracle::brdf(c.face_magnitude(f), 40e3, 343.0, 5.0 * oracle::pi / 180.0, 150.0 * oracle::pi / 180.0, 0.05, 1.0,
                 0.7, alpha, k);
    CHECK(b.alpha(f, 0) == doctest::Approx(alpha).epsilon(1e-12));
    CHECK(b.strength(f, 0) == doctest::Approx(k).epsilon(1e-12));
  }
}

TEST_CASE("brdf: invalid material and grid") {
  MaterialParams bad;
  bad.k_max = 1.5;
  CHECK(code_of([&] { derive_brdf(Eigen::VectorXd::Zero(2), Eigen::VectorXd::Constant(1, 1e3), bad); }) ==
        ErrorCode::invalid_material);
  Eigen::VectorXd dec(2);
  dec << 2e3, 1e3;
  CHECK(code_of([&] { derive_brdf(Eigen::VectorXd::Zero(2), dec, MaterialParams{}); }) ==
        ErrorCode::invalid_argument);
}
