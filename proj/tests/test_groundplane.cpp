// Copyright (c) the plcloud authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "plc/error.hpp"
#include "plc/groundplane.hpp"

using namespace plc;

namespace {

PointCloud cam_cloud(std::vector<Point> pts) {
  PointCloud pc;
  pc.frame = Frame::CameraRect;
  pc.points = std::move(pts);
  return pc;
}

// 80% on the plane y = height + tan(tilt_x) * z, 20% uniform outliers.
PointCloud synthetic_ground(double height, double tilt_x, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> x(-15.0, 15.0);
  std::uniform_real_distribution<double> z(0.5, 40.0);
  std::uniform_real_distribution<double> y_out(0.0, 3.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  PointCloud pc;
  pc.frame = Frame::CameraRect;
  for (std::size_t i = 0; i < n; ++i) {
    const double px = x(rng);
    const double pz = z(rng);
    if (coin(rng) < 0.8)
      pc.points.push_back({px, height + std::tan(tilt_x) * pz, pz, 1.0});
    else
      pc.points.push_back({px, y_out(rng), pz, 1.0});
  }
  return pc;
}

double angle_to(const Vec3& normal, const Vec3& reference) {
  const double c =
      std::clamp(normal.dot(reference) / (normal.norm() * reference.norm()), -1.0, 1.0);
  return std::acos(c);
}

}  // namespace

TEST_CASE("gate keeps points inside the closed box") {
  const PlaneRegionGate gate;
  PointCloud pc = cam_cloud({
      {0.0, 1.7, 10.0, 1.0},   // inside
      {0.0, 1.0, 10.0, 1.0},   // y below range
      {0.0, 1.86, 40.0, 1.0},  // on the closed boundary
      {16.0, 1.7, 10.0, 1.0},  // x outside
      {0.0, 1.7, 41.0, 1.0},   // z outside
  });
  const PointCloud kept = gate_points(pc, gate);
  REQUIRE(kept.size() == 2);
  CHECK(kept.points[0].y == doctest::Approx(1.7));
  CHECK(kept.points[1].y == doctest::Approx(1.86));

  PointCloud velo = pc;
  velo.frame = Frame::Velodyne;
  CHECK_THROWS_AS(gate_points(velo, gate), Error);
}

TEST_CASE("gate equals a brute-force scan on random clouds") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  PointCloud pc;
  pc.frame = Frame::CameraRect;
  for (int i = 0; i < 5000; ++i) pc.points.push_back({u(rng), u(rng) / 20.0, u(rng), 1.0});
  const PlaneRegionGate gate;
  const PointCloud kept = gate_points(pc, gate);
  std::size_t expect = 0;
  for (const Point& p : pc.points)
    if (p.x >= -15 && p.x <= 15 && p.y >= 1.5 && p.y <= 1.86 && p.z >= 0 && p.z <= 40) ++expect;
  CHECK(kept.size() == expect);
}

TEST_CASE("constant-height plane forces the constrained solution") {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  PointCloud pc;
  pc.frame = Frame::CameraRect;
  for (int i = 0; i < 100; ++i) pc.points.push_back({u(rng), 1.7, u(rng) + 15.0, 1.0});

  const GroundPlane plane = fit_ransac(pc, {.iterations = 50, .threshold = 0.02, .seed = 0});
  CHECK(std::fabs(plane.normal.norm() - 1.0) < 1e-9);
  CHECK(std::fabs(plane.normal.x) < 1e-9);
  CHECK(plane.normal.y == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(std::fabs(plane.normal.z) < 1e-9);
  CHECK(plane.offset == doctest::Approx(1.7).epsilon(1e-9));
  CHECK(plane.inlier_count == pc.size());

  // exact-plane input recovers parameters within 1e-9 (the LS refit is exact)
  for (const Point& p : pc.points) CHECK(plane.distance(p.xyz()) < 1e-9);
}

TEST_CASE("80/20 mixture recovers the plane within tolerance") {
  const PointCloud pc = synthetic_ground(1.65, 0.0, 2000, 7);
  const GroundPlane plane = fit_ransac(pc, {.iterations = 200, .threshold = 0.05, .seed = 3});
  CHECK(angle_to(plane.normal, {0.0, -1.0, 0.0}) < 0.5 * M_PI / 180.0);
  CHECK(std::fabs(plane.offset - 1.65) < 0.01);
}

TEST_CASE("5-degree tilt about x is recovered within half a degree") {
  const double tilt = 5.0 * M_PI / 180.0;
  const PointCloud pc = synthetic_ground(1.65, tilt, 2000, 11);
  const GroundPlane plane = fit_ransac(pc, {.iterations = 300, .threshold = 0.02, .seed = 1});
  // plane y = h + tan(t) z has normal parallel to (0, -cos t, sin t)
  const Vec3 truth{0.0, -std::cos(tilt), std::sin(tilt)};
  CHECK(angle_to(plane.normal, truth) < 0.5 * M_PI / 180.0);
}

TEST_CASE("same seed gives a bit-identical plane") {
  const PointCloud pc = synthetic_ground(1.6, 0.02, 500, 13);
  const RansacOptions opts{.iterations = 100, .threshold = 0.03, .seed = 42};
  const GroundPlane a = fit_ransac(pc, opts);
  const GroundPlane b = fit_ransac(pc, opts);
  CHECK(a.normal.x == b.normal.x);
  CHECK(a.normal.y == b.normal.y);
  CHECK(a.normal.z == b.normal.z);
  CHECK(a.offset == b.offset);
  CHECK(a.inlier_count == b.inlier_count);
}

TEST_CASE("w_y stays negative after normalization") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const PointCloud pc = synthetic_ground(1.5, -0.05, 400, seed + 100);
    const GroundPlane plane = fit_ransac(pc, {.iterations = 100, .threshold = 0.05, .seed = seed});
    CHECK(plane.normal.y < 0.0);
    CHECK(std::fabs(plane.normal.norm() - 1.0) < 1e-9);
  }
}

TEST_CASE("degenerate inputs raise typed errors") {
  PointCloud two = cam_cloud({{0, 0, 0, 1}, {1, 1, 1, 1}});
  try {
    fit_ransac(two, {});
    FAIL("expected TooFewPoints");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::TooFewPoints);
  }

  // all points on one vertical line: every 3-sample is collinear
  PointCloud line;
  line.frame = Frame::CameraRect;
  for (int i = 0; i < 30; ++i) line.points.push_back({1.0, 0.1 * i, 2.0, 1.0});
  try {
    fit_ransac(line, {.iterations = 50, .threshold = 0.02, .seed = 0});
    FAIL("expected DegenerateSample");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::DegenerateSample);
  }
}

TEST_CASE("plane file format and round trip") {
  GroundPlane plane;
  plane.normal = {0.0, -1.0, 0.0};
  plane.offset = 1.7;
  const std::string text = write_plane_file(plane);

  // 4 header lines + 1 data line
  CHECK(std::count(text.begin(), text.end(), '\n') == 5);
  CHECK(text.rfind("# Plane\n", 0) == 0);
  CHECK(text.find("Width 4\n") != std::string::npos);
  CHECK(text.find("Height 1\n") != std::string::npos);
  CHECK(text.find("0.000000000 -1.000000000 0.000000000 1.700000000\n") != std::string::npos);

  const GroundPlane back = read_plane_file(text);
  CHECK(std::fabs(back.normal.x - plane.normal.x) < 1e-9);
  CHECK(std::fabs(back.normal.y - plane.normal.y) < 1e-9);
  CHECK(std::fabs(back.normal.z - plane.normal.z) < 1e-9);
  CHECK(std::fabs(back.offset - plane.offset) < 1e-9);
}

TEST_CASE("fitted planes survive the file round trip within 1e-9") {
  const PointCloud pc = synthetic_ground(1.62, 0.03, 800, 21);
  const GroundPlane plane = fit_ransac(pc, {.iterations = 150, .threshold = 0.04, .seed = 5});
  const GroundPlane back = read_plane_file(write_plane_file(plane));
  CHECK(std::fabs(back.normal.x - plane.normal.x) < 1e-9);
  CHECK(std::fabs(back.normal.y - plane.normal.y) < 1e-9);
  CHECK(std::fabs(back.normal.z - plane.normal.z) < 1e-9);
  CHECK(std::fabs(back.offset - plane.offset) < 1e-9);

  try {
    read_plane_file("# Plane\nWidth 4\nHeight 1\n");
    FAIL("expected TruncatedRecord");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::TruncatedRecord);
  }
}
