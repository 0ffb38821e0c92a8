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

#include <algorithm>
#include <random>

#include "echosim/error.hpp"
#include "echosim/scene.hpp"
#include "oracles.hpp"

using namespace echosim;

namespace {

Pose random_pose(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-kPi, kPi);
  return make_pose(Vec3::Random() * 3.0, Vec3(u(rng), u(rng) / 2.0, u(rng)));
}

Eigen::MatrixXd distances(const Points& p) {
  Eigen::MatrixXd d(p.rows(), p.rows());
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    for (Eigen::Index j = 0; j < p.rows(); ++j) d(i, j) = (p.row(i) - p.row(j)).norm();
  return d;
}

}  // namespace

TEST_CASE("pose: identity and quarter turn") {
  CHECK(make_pose(Vec3::Zero(), Vec3::Zero()).matrix() == Mat4::Identity());
  const Pose p = make_pose(Vec3::Zero(), Vec3(0, 0, kPi / 2));
  CHECK((p.apply(Vec3::UnitX()) - Vec3::UnitY()).norm() < 1e-12);
}

TEST_CASE("pose: extrinsic X then Y then Z") {
  const Vec3 g(0.3, -0.4, 1.1);
  const Pose p = make_pose(Vec3(1, 2, 3), g);
  const Vec3 x(0.2, -0.7, 0.5);
  auto rx = [](double a) {
    Mat3 r;
    r << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
    return r;
  };
  auto ry = [](double a) {
    Mat3 r;
    r << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
    return r;
  };
  auto rz = [](double a) {
    Mat3 r;
    r << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
    return r;
  };
  const Vec3 expected = rz(g.z()) * (ry(g.y()) * (rx(g.x()) * x)) + Vec3(1, 2, 3);
  CHECK((p.apply(x) - expected).norm() < 1e-12);
  CHECK((p.euler_angles() - g).norm() < 1e-12);
}

TEST_CASE("property: poses are rigid and compose like matrices") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const Pose a = random_pose(rng);
    const Pose b = random_pose(rng);
    const Mat3 r = a.rotation();
    CHECK((r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(a.matrix().row(3) == Eigen::RowVector4d(0, 0, 0, 1));
    const Vec3 x = Vec3::Random();
    CHECK((a.compose(b).apply(x) - a.apply(b.apply(x))).norm() < 1e-12);
    const Eigen::Vector4d h = a.matrix() * (b.matrix() * x.homogeneous());
    CHECK((a.compose(b).apply(x) - h.head<3>()).norm() < 1e-12);
    CHECK((a.inverse().apply(a.apply(x)) - x).norm() < 1e-12);
  }
}

TEST_CASE("transform_sensor: identity, translation, isometry") {
  SensorArray array;
  array.emitter = Vec3(0.01, 0, 0);
  array.receivers = Points::Random(6, 3) * 0.05;
  const WorldSensor same = transform_sensor(array, Pose());
  CHECK(same.receivers == array.receivers);
  CHECK(same.emitter == array.emitter);

  const WorldSensor up = transform_sensor(array, make_pose(Vec3(0, 0, 1), Vec3::Zero()));
  CHECK(((up.receivers - array.receivers).rowwise() - Eigen::RowVector3d(0, 0, 1)).cwiseAbs().maxCoeff() < 1e-15);

  std::mt19937_64 rng(5);
  const Eigen::MatrixXd d0 = distances(array.receivers);
  for (int trial = 0; trial < 50; ++trial) {
    const WorldSensor w = transform_sensor(array, random_pose(rng));
    const Eigen::MatrixXd d1 = distances(w.receivers);
    CHECK(((d1 - d0).array().abs() / d0.array().max(1e-300)).maxCoeff() < 1e-12);
  }
}

TEST_CASE("sensor validation") {
  SensorArray empty;
  CHECK_THROWS_AS(empty.validate(), Error);
  SensorArray labelled;
  labelled.receivers = Points::Zero(2, 3);
  labelled.groups = {"left"};
  CHECK_THROWS_AS(labelled.validate(), Error);
}

TEST_CASE("sim params: validation and frequency grid") {
  SimParams p;
  p.validate();
  const Eigen::VectorXd f = p.frequency_grid();
  CHECK(f.size() == p.ir_length / 2 + 1);
  for (int j : {0, 1, 17, p.ir_length / 2}) CHECK(f(j) == doctest::Approx(j * p.sample_rate / p.ir_length));
  SimParams bad = p;
  bad.ir_length = 1000;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = p;
  bad.band = Band{20e3, 600e3, 0};
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = p;
  bad.speed_of_sound = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("partition: single region") {
  const Points d = partition_sphere_directions(1, false);
  REQUIRE(d.rows() == 1);
  CHECK(d.row(0).norm() == doctest::Approx(1.0));
}

TEST_CASE("partition: equal areas, unit vectors, counts") {
  for (bool hemi : {true, false}) {
    for (int n : {2, 3, 7, 50, 333, 1000, 4096}) {
      const SpherePartition p = partition_sphere(n, hemi);
      REQUIRE(p.directions.rows() == n);
      const double expected = (hemi ? 2.0 : 4.0) * kPi / n;
      double total = 0.0;
      for (std::size_t i = 0; i < p.regions.size(); ++i) {
        CHECK(p.region_area(i) == doctest::Approx(expected).epsilon(1e-9));
        total += p.region_area(i);
      }
      CHECK(total == doctest::Approx(expected * n).epsilon(1e-12));
      CHECK((p.directions.rowwise().norm().array() - 1.0).abs().maxCoeff() < 1e-12);
      if (hemi) CHECK((p.directions.col(0).array() >= -1e-12).all());
    }
  }
}

TEST_CASE("partition: representative directions lie inside their regions") {
  const SpherePartition p = partition_sphere(1000, true);
  for (std::size_t i = 0; i < p.regions.size(); ++i) {
    const auto& r = p.regions[i];
    const Vec3 d = p.directions.row(i).transpose();
    const double colat = std::acos(std::clamp(d.x(), -1.0, 1.0));
    CHECK(colat >= r.colat_min - 1e-12);
    CHECK(colat <= r.colat_max + 1e-12);
  }
}

TEST_CASE("partition: n = 1000 hemisphere spacing is even") {
  const Points d = partition_sphere_directions(1000, true);
  Eigen::VectorXd nearest(d.rows());
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    double best = oracle::pi;
    for (Eigen::Index j = 0; j < d.rows(); ++j)
      if (i != j) best = std::min(best, std::acos(std::clamp(d.row(i).dot(d.row(j)), -1.0, 1.0)));
    nearest(i) = best;
  }
  const double mean = nearest.mean();
  const double sd = std::sqrt((nearest.array() - mean).square().mean());
  CHECK(sd / mean < 0.5);
}
