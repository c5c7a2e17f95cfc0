// Copyright (c) the plcloud authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>

#include "plc/geometry.hpp"

namespace plc {

/// Rectified pinhole camera with a stereo baseline.
///
/// `offset_x` / `offset_y` are the metric translation offsets of the camera
/// relative to the rectified reference camera, recovered from the projection
/// matrix as -P[0,3]/f_u and -P[1,3]/f_v. They are applied during projection
/// and back-projection when `use_projection_offset` is set (side cameras in a
/// rectified rig are displaced from the reference optical center).
struct CameraModel {
  double f_u = 0.0;  // horizontal focal length, px
  double f_v = 0.0;  // vertical focal length, px
  double c_u = 0.0;  // principal point column, px
  double c_v = 0.0;  // principal point row, px
  double baseline_b = 0.0;  // stereo baseline, m
  int width = 0;
  int height = 0;
  double offset_x = 0.0;  // m
  double offset_y = 0.0;  // m
  bool use_projection_offset = true;

  // Offsets actually applied by projection/back-projection.
  double applied_offset_x() const { return use_projection_offset ? offset_x : 0.0; }
  double applied_offset_y() const { return use_projection_offset ? offset_y : 0.0; }

  CameraModel with_image_size(int w, int h) const {
    CameraModel c = *this;
    c.width = w;
    c.height = h;
    return c;
  }

  // Throws Errc::InvalidArgument when an invariant is violated.
  void validate() const;
};

struct CalibrationSet {
  CameraModel cam;
  Mat3 rect_rotation;          // rectifying rotation applied after velo_to_cam
  RigidTransform velo_to_cam;  // LiDAR frame -> unrectified camera frame
  std::string source_file;
};

/// Parses KITTI-style calibration text: lines of `KEY: v1 v2 ... vn`.
/// Requires P2 and P3 (12 values), R0_rect (9) and Tr_velo_to_cam (12);
/// unknown keys are ignored. The image size is not part of the file format,
/// so callers pass it (KITTI object images by default).
CalibrationSet parse_kitti_calib(std::string_view text, std::string source_file = "",
                                 int image_width = 1242, int image_height = 375);

/// Velodyne frame -> rectified camera frame as a single rigid transform.
RigidTransform velo_to_cam_rect(const CalibrationSet& calib);

/// Rectified camera frame -> Velodyne frame (inverse of the above).
RigidTransform cam_to_velo(const CalibrationSet& calib);

}  // namespace plc
