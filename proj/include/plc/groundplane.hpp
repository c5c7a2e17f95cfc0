// Copyright (c) the plcloud authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "plc/cloud.hpp"

namespace plc {

/// Plane w.p + h = 0 with unit normal; fitted with the y-component pinned to
/// -1 and normalized afterwards, so normal.y < 0 always holds.
struct GroundPlane {
  Vec3 normal{0.0, -1.0, 0.0};
  double offset = 0.0;  // h, meters
  std::size_t inlier_count = 0;
  double inlier_threshold = 0.0;

  double distance(const Vec3& p) const { return std::fabs(normal.dot(p) + offset); }
};

/// Camera-rect-frame box of candidate ground points (closed intervals).
struct PlaneRegionGate {
  double x_min = -15.0, x_max = 15.0;
  double y_min = 1.5, y_max = 1.86;
  double z_min = 0.0, z_max = 40.0;

  void validate() const;
  bool contains(const Vec3& p) const {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max && p.z >= z_min &&
           p.z <= z_max;
  }
};

PointCloud gate_points(const PointCloud& pc, const PlaneRegionGate& gate);

struct RansacOptions {
  int iterations = 200;
  double threshold = 0.02;  // m
  std::uint64_t seed = 0;
};

/// RANSAC plane fit with the w_y = -1 constraint: each iteration samples three
/// points, solves the 3x3 system for (w_x, w_z, h), and scores inliers against
/// the normalized plane. The best sample is refined by a constrained
/// least-squares fit on its inliers; the refit is kept only if it does not
/// lose inliers. Deterministic for a given seed.
GroundPlane fit_ransac(const PointCloud& pc, const RansacOptions& opts = {});

/// AVOD-style plane text: header lines then one `w_x w_y w_z h` row.
std::string write_plane_file(const GroundPlane& plane);
GroundPlane read_plane_file(std::string_view text);

}  // namespace plc
