// Copyright (c) the plcloud authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "plc/calib.hpp"
#include "plc/depthmap.hpp"

namespace plc {

enum class Frame { CameraRect, Velodyne };

const char* frame_name(Frame f) noexcept;

struct Point {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double reflectance = 1.0;

  Vec3 xyz() const { return {x, y, z}; }
};

struct PointCloud {
  Frame frame = Frame::CameraRect;
  std::vector<Point> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

struct CloudFilterConfig {
  double max_height_above_lidar = 1.0;  // m, Velodyne up-axis, boundary inclusive
  double depth_ceiling = 120.0;         // m
  double min_depth = 0.0;               // m

  void validate() const;
};

/// Back-projects every valid depth pixel into the rectified camera frame,
/// one point per valid pixel in row-major pixel order, reflectance 1.0.
PointCloud backproject(const DepthMap& d, const CameraModel& cam);

struct ImagePoint {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
};

struct ProjectionResult {
  std::vector<ImagePoint> pixels;
  std::size_t dropped_behind_camera = 0;
};

/// Pinhole projection of a CameraRect cloud; points with z <= 0 are dropped
/// and counted.
ProjectionResult project_to_image(const PointCloud& pc, const CameraModel& cam);

PointCloud to_velodyne(const PointCloud& pc, const CalibrationSet& calib);
PointCloud to_camera(const PointCloud& pc, const CalibrationSet& calib);

/// Keeps points whose Velodyne up-coordinate is at or below the configured
/// height; order preserved.
PointCloud height_filter(const PointCloud& pc, const CloudFilterConfig& cfg);

/// Projects a Velodyne-frame cloud into the image and converts per-pixel depth
/// to disparity. When several points land on one pixel a seeded PRNG keeps one
/// of them; uncovered pixels stay invalid.
DisparityMap pseudo_disparity_gt(const PointCloud& lidar, const CalibrationSet& calib,
                                 int image_width, int image_height, std::uint64_t seed = 0);

// --- KITTI Velodyne binary: little-endian float32 (x, y, z, reflectance) ---

PointCloud read_bin(std::span<const std::uint8_t> bytes, Frame frame = Frame::Velodyne);
std::vector<std::uint8_t> write_bin(const PointCloud& pc);

// --- Per-instance spread measurement (depth-blur study) ---

/// Instance-id image: 0 = background, ids >= 1 are object instances.
struct InstanceMask {
  int width = 0;
  int height = 0;
  std::vector<std::int32_t> labels;

  std::size_t size() const { return labels.size(); }
};

struct InstanceSpread {
  std::int32_t instance = 0;
  std::size_t point_count = 0;
  Vec3 extent_before;  // axis-aligned (dx, dy, dz)
  Vec3 extent_after;
  Vec3 ratio;          // after / before (1.0 where both extents are zero)
};

/// Per-point instance labels for two index-aligned clouds. Labels <= 0 are
/// background; instances with no points are omitted from the table.
std::vector<InstanceSpread> spread_report(const PointCloud& before, const PointCloud& after,
                                          std::span<const std::int32_t> point_labels);

/// Flattens an instance mask onto the valid pixels of the grid the clouds were
/// built from (row-major), producing one label per cloud point.
std::vector<std::int32_t> point_labels_from_mask(const InstanceMask& mask,
                                                 const PixelGrid& source_grid);

}  // namespace plc
