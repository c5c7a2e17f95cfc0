// Copyright (c) the plcloud authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "plc/calib.hpp"

namespace plc {

/// Dense per-pixel grid with an explicit invalid-pixel mask, row-major.
struct PixelGrid {
  int width = 0;
  int height = 0;
  std::vector<double> values;        // size width*height
  std::vector<std::uint8_t> valid;   // size width*height, 0 or 1

  static void init(PixelGrid& g, int w, int h) {
    g.width = w;
    g.height = h;
    g.values.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0.0);
    g.valid.assign(g.values.size(), 0);
  }

  std::size_t size() const { return values.size(); }
  std::size_t index(int u, int v) const {
    return static_cast<std::size_t>(v) * static_cast<std::size_t>(width) +
           static_cast<std::size_t>(u);
  }
  double at(int u, int v) const { return values[index(u, v)]; }
  bool is_valid(int u, int v) const { return valid[index(u, v)] != 0; }
  void set(int u, int v, double value) {
    const std::size_t i = index(u, v);
    values[i] = value;
    valid[i] = 1;
  }
  void set_invalid(int u, int v) {
    const std::size_t i = index(u, v);
    values[i] = 0.0;
    valid[i] = 0;
  }
  std::size_t valid_count() const;
};

struct DisparityMap : PixelGrid {
  static DisparityMap make(int w, int h) {
    DisparityMap m;
    init(m, w, h);
    return m;
  }
};

struct DepthMap : PixelGrid {
  static DepthMap make(int w, int h) {
    DepthMap m;
    init(m, w, h);
    return m;
  }
};

struct DepthConvertOptions {
  double min_disparity = 1e-6;  // disparities at or below are invalid
  double depth_ceiling = 120.0; // depths beyond are dropped, not clamped
};

/// D(u,v) = f_u * b / Y(u,v). Invalid or near-zero disparities and depths
/// beyond the ceiling come out invalid.
DepthMap disparity_to_depth(const DisparityMap& y, const CameraModel& cam,
                            const DepthConvertOptions& opts = {});

/// Inverse of disparity_to_depth on valid pixels.
DisparityMap depth_to_disparity(const DepthMap& d, const CameraModel& cam,
                                const DepthConvertOptions& opts = {});

/// Truncated-window mean filter. Each valid output pixel is the mean of the
/// valid input pixels inside the (kernel x kernel) window clipped to the
/// image; the validity mask passes through unchanged.
DepthMap box_smooth(const DepthMap& d, int kernel);

// --- 16-bit PNG disparity (KITTI convention: stored = disparity*256, 0 = invalid) ---

DisparityMap read_disparity_png(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> write_disparity_png(const DisparityMap& map);

// Raw 16-bit single-channel PNG; used for disparity and instance-id images.
struct Png16 {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> pixels;  // row-major
};
Png16 read_png16(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> write_png16(const Png16& image);

// --- PLDM depth dump: 'PLDM', u16 width, u16 height (LE), then f32 LE row-major;
// --- invalid pixels are stored as 0.

DepthMap read_depth_pldm(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> write_depth_pldm(const DepthMap& map);

}  // namespace plc
