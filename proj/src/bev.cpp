// Copyright (c) the plcloud authors
// SPDX-License-Identifier: Apache-2.0
#include "plc/bev.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "plc/error.hpp"

namespace plc {

void BevConfig::validate() const {
  if (!(resolution > 0.0)) throw_error(Errc::InvalidArgument, "resolution must be positive");
  if (!(height_max > height_min)) throw_error(Errc::InvalidArgument, "empty height window");
  if (height_slices < 1) throw_error(Errc::InvalidArgument, "need at least one height slice");
  if (!(lateral_max > lateral_min) || !(forward_max > forward_min))
    throw_error(Errc::InvalidArgument, "empty spatial range");
  if (!(density_normalizer > 0.0))
    throw_error(Errc::InvalidArgument, "density normalizer must be positive");
}

namespace {

// ceil with a guard against FP noise pushing an exact multiple upward
int cell_count(double extent, double res) {
  return static_cast<int>(std::ceil(extent / res - 1e-9));
}

}  // namespace

int BevConfig::rows() const { return cell_count(forward_max - forward_min, resolution); }
int BevConfig::cols() const { return cell_count(lateral_max - lateral_min, resolution); }

BevRaster rasterize(const PointCloud& pc, const BevConfig& cfg) {
  if (pc.frame != Frame::Velodyne)
    throw_error(Errc::WrongFrame, "rasterize expects a Velodyne cloud");
  cfg.validate();

  const int rows = cfg.rows();
  const int cols = cfg.cols();
  const int slices = cfg.height_slices;
  const double slice_height = (cfg.height_max - cfg.height_min) / slices;

  BevRaster out;
  out.tensor.channels = slices + (cfg.include_density ? 1 : 0);
  out.tensor.rows = rows;
  out.tensor.cols = cols;
  out.tensor.values.assign(static_cast<std::size_t>(out.tensor.channels) * rows * cols, 0.0f);
  out.cell_counts.assign(static_cast<std::size_t>(rows) * cols, 0);

  for (const Point& p : pc.points) {
    const double forward = p.x;
    const double lateral = p.y;
    const double height = p.z;
    const int row = static_cast<int>(std::floor((forward - cfg.forward_min) / cfg.resolution));
    const int col = static_cast<int>(std::floor((lateral - cfg.lateral_min) / cfg.resolution));
    if (row < 0 || row >= rows || col < 0 || col >= cols || height < cfg.height_min ||
        height > cfg.height_max) {
      ++out.dropped;
      continue;
    }
    ++out.in_range;
    ++out.cell_counts[static_cast<std::size_t>(row) * cols + col];

    const int slice = std::clamp(
        static_cast<int>(std::floor((height - cfg.height_min) / slice_height)), 0, slices - 1);
    const double slice_lo = cfg.height_min + slice * slice_height;
    const float encoded =
        cfg.occupancy_mode
            ? 1.0f
            : static_cast<float>(std::clamp((height - slice_lo) / slice_height, 0.0, 1.0));
    float& cell = out.tensor.values[out.tensor.index(slice, row, col)];
    cell = std::max(cell, encoded);
  }

  if (cfg.include_density) {
    const double denom = std::log(cfg.density_normalizer + 1.0);
    const std::size_t base = static_cast<std::size_t>(slices) * rows * cols;
    for (std::size_t i = 0; i < out.cell_counts.size(); ++i) {
      const std::uint32_t n = out.cell_counts[i];
      if (n == 0) continue;
      out.tensor.values[base + i] =
          static_cast<float>(std::min(1.0, std::log(static_cast<double>(n) + 1.0) / denom));
    }
  }
  return out;
}

namespace {

constexpr char kPlbvMagic[4] = {'P', 'L', 'B', 'V'};

void put_u16_le(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

std::uint16_t get_u16_le(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

}  // namespace

std::vector<std::uint8_t> write_bev(const BevTensor& t) {
  std::vector<std::uint8_t> out;
  out.reserve(16 + t.values.size() * 4);
  out.insert(out.end(), kPlbvMagic, kPlbvMagic + 4);
  put_u16_le(out, static_cast<std::uint16_t>(t.channels));
  put_u16_le(out, static_cast<std::uint16_t>(t.rows));
  put_u16_le(out, static_cast<std::uint16_t>(t.cols));
  out.insert(out.end(), 6, 0);
  for (float f : t.values) {
    std::uint8_t buf[4];
    std::memcpy(buf, &f, 4);
    out.insert(out.end(), buf, buf + 4);
  }
  return out;
}

BevTensor read_bev(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kPlbvMagic, 4) != 0)
    throw_error(Errc::TruncatedRecord, "missing PLBV header");
  BevTensor t;
  t.channels = get_u16_le(bytes.data() + 4);
  t.rows = get_u16_le(bytes.data() + 6);
  t.cols = get_u16_le(bytes.data() + 8);
  const std::size_t count =
      static_cast<std::size_t>(t.channels) * static_cast<std::size_t>(t.rows) *
      static_cast<std::size_t>(t.cols);
  if (bytes.size() != 16 + count * 4)
    throw_error(Errc::TruncatedRecord, "PLBV payload does not match header dimensions");
  t.values.resize(count);
  std::memcpy(t.values.data(), bytes.data() + 16, count * 4);
  return t;
}

std::string bev_channel_to_pgm(const BevTensor& t, int channel) {
  if (channel < 0 || channel >= t.channels)
    throw_error(Errc::InvalidArgument, "channel out of range");
  std::string out = "P5\n" + std::to_string(t.cols) + " " + std::to_string(t.rows) + "\n255\n";
  out.reserve(out.size() + static_cast<std::size_t>(t.rows) * t.cols);
  for (int r = 0; r < t.rows; ++r)
    for (int c = 0; c < t.cols; ++c) {
      const float v = std::clamp(t.at(channel, r, c), 0.0f, 1.0f);
      out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0f))));
    }
  return out;
}

}  // namespace plc
