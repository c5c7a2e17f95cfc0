// Copyright (c) the plcloud authors
// SPDX-License-Identifier: Apache-2.0
#include "plc/cloud.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <random>

#include "plc/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "point cloud binary format assumes a little-endian host");

namespace plc {

const char* frame_name(Frame f) noexcept {
  return f == Frame::CameraRect ? "CameraRect" : "Velodyne";
}

void CloudFilterConfig::validate() const {
  if (!std::isfinite(max_height_above_lidar))
    throw_error(Errc::InvalidArgument, "max height must be finite");
  if (!(depth_ceiling > min_depth) || min_depth < 0.0)
    throw_error(Errc::InvalidArgument, "need depth_ceiling > min_depth >= 0");
}

namespace {

void require_frame(const PointCloud& pc, Frame expected, const char* op) {
  if (pc.frame != expected)
    throw_error(Errc::WrongFrame, std::string(op) + " expects a " + frame_name(expected) +
                                      " cloud, got " + frame_name(pc.frame));
}

PointCloud apply_transform(const PointCloud& pc, const RigidTransform& t, Frame new_frame) {
  PointCloud out;
  out.frame = new_frame;
  out.points.reserve(pc.size());
  for (const Point& p : pc.points) {
    const Vec3 q = t.apply(p.xyz());
    out.points.push_back({q.x, q.y, q.z, p.reflectance});
  }
  return out;
}

}  // namespace

PointCloud backproject(const DepthMap& d, const CameraModel& cam) {
  if (cam.width != 0 && (cam.width != d.width || cam.height != d.height))
    throw_error(Errc::DimensionMismatch, "depth map does not match camera image size");
  const double bx = cam.applied_offset_x();
  const double by = cam.applied_offset_y();
  PointCloud pc;
  pc.frame = Frame::CameraRect;
  pc.points.reserve(d.valid_count());
  std::size_t i = 0;
  for (int v = 0; v < d.height; ++v) {
    for (int u = 0; u < d.width; ++u, ++i) {
      if (!d.valid[i]) continue;
      const double z = d.values[i];
      pc.points.push_back({(u - cam.c_u) * z / cam.f_u + bx,
                           (v - cam.c_v) * z / cam.f_v + by, z, 1.0});
    }
  }
  return pc;
}

ProjectionResult project_to_image(const PointCloud& pc, const CameraModel& cam) {
  require_frame(pc, Frame::CameraRect, "project_to_image");
  const double bx = cam.applied_offset_x();
  const double by = cam.applied_offset_y();
  ProjectionResult res;
  res.pixels.reserve(pc.size());
  for (const Point& p : pc.points) {
    if (p.z <= 0.0) {
      ++res.dropped_behind_camera;
      continue;
    }
    res.pixels.push_back({cam.f_u * (p.x - bx) / p.z + cam.c_u,
                          cam.f_v * (p.y - by) / p.z + cam.c_v, p.z});
  }
  return res;
}

PointCloud to_velodyne(const PointCloud& pc, const CalibrationSet& calib) {
  require_frame(pc, Frame::CameraRect, "to_velodyne");
  return apply_transform(pc, cam_to_velo(calib), Frame::Velodyne);
}

PointCloud to_camera(const PointCloud& pc, const CalibrationSet& calib) {
  require_frame(pc, Frame::Velodyne, "to_camera");
  return apply_transform(pc, velo_to_cam_rect(calib), Frame::CameraRect);
}

PointCloud height_filter(const PointCloud& pc, const CloudFilterConfig& cfg) {
  require_frame(pc, Frame::Velodyne, "height_filter");
  cfg.validate();
  PointCloud out;
  out.frame = pc.frame;
  out.points.reserve(pc.size());
  for (const Point& p : pc.points)
    if (p.z <= cfg.max_height_above_lidar) out.points.push_back(p);
  return out;
}

DisparityMap pseudo_disparity_gt(const PointCloud& lidar, const CalibrationSet& calib,
                                 int image_width, int image_height, std::uint64_t seed) {
  if (lidar.empty()) throw_error(Errc::EmptyCloud, "pseudo_disparity_gt needs points");
  require_frame(lidar, Frame::Velodyne, "pseudo_disparity_gt");
  const CameraModel cam = calib.cam.with_image_size(image_width, image_height);

  const PointCloud cam_cloud = to_camera(lidar, calib);
  const ProjectionResult proj = project_to_image(cam_cloud, cam);

  // candidate disparities per pixel, in point order
  std::map<std::size_t, std::vector<double>> hits;
  const double fb = cam.f_u * cam.baseline_b;
  for (const ImagePoint& ip : proj.pixels) {
    const long u = std::lround(ip.u);
    const long v = std::lround(ip.v);
    if (u < 0 || u >= image_width || v < 0 || v >= image_height) continue;
    const std::size_t idx =
        static_cast<std::size_t>(v) * static_cast<std::size_t>(image_width) +
        static_cast<std::size_t>(u);
    hits[idx].push_back(fb / ip.depth);
  }

  // std::map iteration is pixel-index order, so the RNG consumption sequence
  // is reproducible for a given input + seed.
  DisparityMap out = DisparityMap::make(image_width, image_height);
  std::mt19937_64 rng(seed);
  for (const auto& [idx, candidates] : hits) {
    const std::size_t pick =
        candidates.size() == 1 ? 0 : static_cast<std::size_t>(rng() % candidates.size());
    out.values[idx] = candidates[pick];
    out.valid[idx] = 1;
  }
  return out;
}

PointCloud read_bin(std::span<const std::uint8_t> bytes, Frame frame) {
  if (bytes.size() % 16 != 0)
    throw_error(Errc::TruncatedRecord,
                std::to_string(bytes.size()) + " bytes is not a whole number of 16-byte records");
  PointCloud pc;
  pc.frame = frame;
  pc.points.resize(bytes.size() / 16);
  const std::uint8_t* p = bytes.data();
  for (Point& pt : pc.points) {
    float f[4];
    std::memcpy(f, p, 16);
    p += 16;
    pt.x = f[0];
    pt.y = f[1];
    pt.z = f[2];
    pt.reflectance = std::clamp(static_cast<double>(f[3]), 0.0, 1.0);
  }
  return pc;
}

std::vector<std::uint8_t> write_bin(const PointCloud& pc) {
  std::vector<std::uint8_t> out;
  out.resize(pc.size() * 16);
  std::uint8_t* p = out.data();
  for (const Point& pt : pc.points) {
    const float f[4] = {static_cast<float>(pt.x), static_cast<float>(pt.y),
                        static_cast<float>(pt.z), static_cast<float>(pt.reflectance)};
    std::memcpy(p, f, 16);
    p += 16;
  }
  return out;
}

std::vector<std::int32_t> point_labels_from_mask(const InstanceMask& mask,
                                                 const PixelGrid& source_grid) {
  if (mask.width != source_grid.width || mask.height != source_grid.height)
    throw_error(Errc::MaskMismatch, "instance mask does not match the source grid");
  std::vector<std::int32_t> labels;
  labels.reserve(source_grid.valid_count());
  for (std::size_t i = 0; i < source_grid.size(); ++i)
    if (source_grid.valid[i]) labels.push_back(mask.labels[i]);
  return labels;
}

std::vector<InstanceSpread> spread_report(const PointCloud& before, const PointCloud& after,
                                          std::span<const std::int32_t> point_labels) {
  if (before.size() != after.size() || before.size() != point_labels.size())
    throw_error(Errc::MaskMismatch,
                "spread_report needs index-aligned clouds and one label per point");

  struct Acc {
    Vec3 lo_b{1e300, 1e300, 1e300}, hi_b{-1e300, -1e300, -1e300};
    Vec3 lo_a{1e300, 1e300, 1e300}, hi_a{-1e300, -1e300, -1e300};
    std::size_t n = 0;
  };
  std::map<std::int32_t, Acc> by_instance;
  for (std::size_t i = 0; i < point_labels.size(); ++i) {
    if (point_labels[i] <= 0) continue;
    Acc& a = by_instance[point_labels[i]];
    const Point& pb = before.points[i];
    const Point& pa = after.points[i];
    a.lo_b = {std::min(a.lo_b.x, pb.x), std::min(a.lo_b.y, pb.y), std::min(a.lo_b.z, pb.z)};
    a.hi_b = {std::max(a.hi_b.x, pb.x), std::max(a.hi_b.y, pb.y), std::max(a.hi_b.z, pb.z)};
    a.lo_a = {std::min(a.lo_a.x, pa.x), std::min(a.lo_a.y, pa.y), std::min(a.lo_a.z, pa.z)};
    a.hi_a = {std::max(a.hi_a.x, pa.x), std::max(a.hi_a.y, pa.y), std::max(a.hi_a.z, pa.z)};
    ++a.n;
  }

  auto ratio1 = [](double num, double den) {
    if (den > 0.0) return num / den;
    return num > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
  };

  std::vector<InstanceSpread> rows;
  rows.reserve(by_instance.size());
  for (const auto& [id, a] : by_instance) {
    InstanceSpread row;
    row.instance = id;
    row.point_count = a.n;
    row.extent_before = a.hi_b - a.lo_b;
    row.extent_after = a.hi_a - a.lo_a;
    row.ratio = {ratio1(row.extent_after.x, row.extent_before.x),
                 ratio1(row.extent_after.y, row.extent_before.y),
                 ratio1(row.extent_after.z, row.extent_before.z)};
    rows.push_back(row);
  }
  return rows;
}

}  // namespace plc
