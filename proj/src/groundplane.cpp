// Copyright (c) the plcloud authors
// SPDX-License-Identifier: Apache-2.0
#include "plc/groundplane.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "plc/error.hpp"

namespace plc {

void PlaneRegionGate::validate() const {
  if (x_min > x_max || y_min > y_max || z_min > z_max)
    throw_error(Errc::InvalidArgument, "empty gate range");
}

PointCloud gate_points(const PointCloud& pc, const PlaneRegionGate& gate) {
  if (pc.frame != Frame::CameraRect)
    throw_error(Errc::WrongFrame, "gate_points expects a CameraRect cloud");
  gate.validate();
  PointCloud out;
  out.frame = pc.frame;
  for (const Point& p : pc.points)
    if (gate.contains(p.xyz())) out.points.push_back(p);
  return out;
}

namespace {

// Solves A x = b for 3x3 A by Cramer's rule; returns false when |det| < 1e-12.
bool solve3(const Mat3& a, const Vec3& b, Vec3& x) {
  const double det = a.det();
  if (std::fabs(det) < 1e-12) return false;
  Mat3 m = a;
  auto replace_col = [](Mat3 m, int col, const Vec3& v) {
    m(0, col) = v.x;
    m(1, col) = v.y;
    m(2, col) = v.z;
    return m;
  };
  x.x = replace_col(m, 0, b).det() / det;
  x.y = replace_col(m, 1, b).det() / det;
  x.z = replace_col(m, 2, b).det() / det;
  return true;
}

struct ConstrainedPlane {
  double w_x = 0.0;
  double w_z = 0.0;
  double h = 0.0;  // plane: w_x*x - y + w_z*z + h = 0

  GroundPlane normalized(double threshold) const {
    const Vec3 w{w_x, -1.0, w_z};
    const double n = w.norm();
    GroundPlane plane;
    plane.normal = w / n;
    plane.offset = h / n;
    plane.inlier_threshold = threshold;
    return plane;
  }
};

std::size_t count_inliers(const PointCloud& pc, const GroundPlane& plane, double threshold) {
  std::size_t n = 0;
  for (const Point& p : pc.points)
    if (plane.distance(p.xyz()) <= threshold) ++n;
  return n;
}

// Least squares over the inliers of `reference`, still with w_y = -1.
bool refit_on_inliers(const PointCloud& pc, const GroundPlane& reference, double threshold,
                      ConstrainedPlane& out) {
  // normal equations for rows [x z 1] * (w_x w_z h)^T = y
  Mat3 ata{};
  ata.m.fill(0.0);
  Vec3 atb{};
  for (const Point& p : pc.points) {
    if (reference.distance(p.xyz()) > threshold) continue;
    const std::array<double, 3> row{p.x, p.z, 1.0};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) ata(i, j) += row[static_cast<std::size_t>(i)] * row[static_cast<std::size_t>(j)];
    atb.x += row[0] * p.y;
    atb.y += row[1] * p.y;
    atb.z += row[2] * p.y;
  }
  Vec3 sol;
  if (!solve3(ata, atb, sol)) return false;
  out = {sol.x, sol.y, sol.z};
  return true;
}

}  // namespace

GroundPlane fit_ransac(const PointCloud& pc, const RansacOptions& opts) {
  const std::size_t n = pc.size();
  if (n < 3) throw_error(Errc::TooFewPoints, "RANSAC needs at least 3 points");
  if (opts.iterations < 1 || !(opts.threshold > 0.0))
    throw_error(Errc::InvalidArgument, "iterations >= 1 and threshold > 0 required");

  std::mt19937_64 rng(opts.seed);
  auto draw = [&] { return static_cast<std::size_t>(rng() % n); };

  bool found = false;
  GroundPlane best;
  std::size_t best_inliers = 0;

  for (int iter = 0; iter < opts.iterations; ++iter) {
    std::size_t i0 = draw(), i1 = draw(), i2 = draw();
    int guard = 0;
    while ((i1 == i0 || i2 == i0 || i2 == i1) && guard++ < 64) {
      if (i1 == i0) i1 = draw();
      if (i2 == i0 || i2 == i1) i2 = draw();
    }
    if (i1 == i0 || i2 == i0 || i2 == i1) continue;

    const Vec3 p0 = pc.points[i0].xyz();
    const Vec3 p1 = pc.points[i1].xyz();
    const Vec3 p2 = pc.points[i2].xyz();
    Mat3 a{{p0.x, p0.z, 1.0, p1.x, p1.z, 1.0, p2.x, p2.z, 1.0}};
    Vec3 sol;
    if (!solve3(a, {p0.y, p1.y, p2.y}, sol)) continue;  // collinear sample, resample next iter

    const ConstrainedPlane candidate{sol.x, sol.y, sol.z};
    GroundPlane plane = candidate.normalized(opts.threshold);
    const std::size_t inliers = count_inliers(pc, plane, opts.threshold);
    if (!found || inliers > best_inliers) {
      found = true;
      best = plane;
      best_inliers = inliers;
    }
  }

  if (!found) throw_error(Errc::DegenerateSample, "no non-collinear sample in any iteration");

  ConstrainedPlane refit;
  if (refit_on_inliers(pc, best, opts.threshold, refit)) {
    GroundPlane refined = refit.normalized(opts.threshold);
    const std::size_t refined_inliers = count_inliers(pc, refined, opts.threshold);
    if (refined_inliers >= best_inliers) {
      best = refined;
      best_inliers = refined_inliers;
    }
  }

  best.inlier_count = best_inliers;
  best.inlier_threshold = opts.threshold;
  return best;
}

std::string write_plane_file(const GroundPlane& plane) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%.9f %.9f %.9f %.9f\n", plane.normal.x, plane.normal.y,
                plane.normal.z, plane.offset);
  std::string out;
  out += "# Plane\n";
  out += "Width 4\n";
  out += "Height 1\n";
  out += "# w_x w_y w_z h\n";
  out += buf;
  return out;
}

GroundPlane read_plane_file(std::string_view text) {
  std::istringstream stream{std::string(text)};
  std::string line, data;
  while (std::getline(stream, line)) {
    if (line.empty() || line[0] == '#') continue;
    // skip the Width/Height header rows
    if (line.rfind("Width", 0) == 0 || line.rfind("Height", 0) == 0) continue;
    data = line;
  }
  if (data.empty()) throw_error(Errc::TruncatedRecord, "plane file has no data row");
  std::istringstream row(data);
  double v[4];
  for (double& x : v)
    if (!(row >> x)) throw_error(Errc::BadNumber, "plane row needs 4 numbers");
  GroundPlane plane;
  plane.normal = {v[0], v[1], v[2]};
  plane.offset = v[3];
  return plane;
}

}  // namespace plc
