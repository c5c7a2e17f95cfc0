// Copyright (c) the plcloud authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "plc/cloud.hpp"

namespace plc {

/// Bird's-eye-view grid over the Velodyne frame: rows follow the forward axis
/// (x), columns the lateral axis (y), heights (z) land in slice channels.
struct BevConfig {
  double lateral_min = -40.0, lateral_max = 40.0;  // m
  double forward_min = 0.0, forward_max = 70.0;    // m
  double resolution = 0.1;                         // m per cell
  int height_slices = 5;
  double height_min = -2.5, height_max = 1.0;      // m, Velodyne up-axis
  bool include_density = true;
  bool occupancy_mode = false;  // slice channels carry 0/1 instead of max height
  double density_normalizer = 64.0;

  void validate() const;
  int rows() const;
  int cols() const;
};

struct BevTensor {
  int channels = 0;
  int rows = 0;
  int cols = 0;
  std::vector<float> values;  // C-order (channel, row, col)

  std::size_t index(int c, int r, int col) const {
    return (static_cast<std::size_t>(c) * static_cast<std::size_t>(rows) +
            static_cast<std::size_t>(r)) *
               static_cast<std::size_t>(cols) +
           static_cast<std::size_t>(col);
  }
  float at(int c, int r, int col) const { return values[index(c, r, col)]; }
};

struct BevRaster {
  BevTensor tensor;
  std::vector<std::uint32_t> cell_counts;  // rows*cols, in-range points per cell
  std::size_t in_range = 0;
  std::size_t dropped = 0;
};

/// Bins a Velodyne cloud. Slice channels hold the max height inside the slice
/// normalized to [0,1] (or occupancy), the optional last channel holds
/// log-normalized point density.
BevRaster rasterize(const PointCloud& pc, const BevConfig& cfg);

// --- PLBV dump: 'PLBV', u16 channels/rows/cols (LE), 6 pad bytes, f32 LE C-order ---

std::vector<std::uint8_t> write_bev(const BevTensor& t);
BevTensor read_bev(const std::vector<std::uint8_t>& bytes);

/// One channel as an 8-bit binary PGM (values scaled by 255) for inspection.
std::string bev_channel_to_pgm(const BevTensor& t, int channel);

}  // namespace plc
