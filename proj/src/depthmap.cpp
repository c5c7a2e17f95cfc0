// Copyright (c) the plcloud authors
// SPDX-License-Identifier: Apache-2.0
#include "plc/depthmap.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

#include "plc/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "binary map formats assume a little-endian host");

namespace plc {

std::size_t PixelGrid::valid_count() const {
  std::size_t n = 0;
  for (std::uint8_t v : valid) n += v;
  return n;
}

namespace {

void check_dims(const PixelGrid& map, const CameraModel& cam) {
  if (map.width <= 0 || map.height <= 0)
    throw_error(Errc::DimensionMismatch, "empty map");
  if (cam.width != 0 && (cam.width != map.width || cam.height != map.height))
    throw_error(Errc::DimensionMismatch,
                "map " + std::to_string(map.width) + "x" + std::to_string(map.height) +
                    " vs camera " + std::to_string(cam.width) + "x" + std::to_string(cam.height));
}

}  // namespace

DepthMap disparity_to_depth(const DisparityMap& y, const CameraModel& cam,
                            const DepthConvertOptions& opts) {
  check_dims(y, cam);
  const double fb = cam.f_u * cam.baseline_b;
  DepthMap d = DepthMap::make(y.width, y.height);
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!y.valid[i] || y.values[i] <= opts.min_disparity) continue;
    const double z = fb / y.values[i];
    if (z > opts.depth_ceiling) continue;
    d.values[i] = z;
    d.valid[i] = 1;
  }
  return d;
}

DisparityMap depth_to_disparity(const DepthMap& d, const CameraModel& cam,
                                const DepthConvertOptions& opts) {
  check_dims(d, cam);
  const double fb = cam.f_u * cam.baseline_b;
  DisparityMap y = DisparityMap::make(d.width, d.height);
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!d.valid[i] || d.values[i] <= 0.0) continue;
    const double disp = fb / d.values[i];
    if (disp <= opts.min_disparity) continue;
    y.values[i] = disp;
    y.valid[i] = 1;
  }
  return y;
}

DepthMap box_smooth(const DepthMap& d, int kernel) {
  if (kernel < 1 || kernel % 2 == 0)
    throw_error(Errc::EvenKernel, "kernel must be odd and >= 1, got " + std::to_string(kernel));
  if (kernel == 1) return d;
  const int r = kernel / 2;
  DepthMap out = DepthMap::make(d.width, d.height);
  for (int v = 0; v < d.height; ++v) {
    const int v0 = std::max(0, v - r);
    const int v1 = std::min(d.height - 1, v + r);
    for (int u = 0; u < d.width; ++u) {
      if (!d.is_valid(u, v)) continue;
      const int u0 = std::max(0, u - r);
      const int u1 = std::min(d.width - 1, u + r);
      double sum = 0.0;
      int n = 0;
      for (int vv = v0; vv <= v1; ++vv)
        for (int uu = u0; uu <= u1; ++uu)
          if (d.is_valid(uu, vv)) {
            sum += d.at(uu, vv);
            ++n;
          }
      // n >= 1: the window contains the (valid) center pixel
      out.set(u, v, sum / n);
    }
  }
  return out;
}

DisparityMap read_disparity_png(const std::vector<std::uint8_t>& bytes) {
  const Png16 img = read_png16(bytes);
  DisparityMap map = DisparityMap::make(img.width, img.height);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    const std::uint16_t stored = img.pixels[i];
    if (stored == 0) continue;
    map.values[i] = stored / 256.0;
    map.valid[i] = 1;
  }
  return map;
}

std::vector<std::uint8_t> write_disparity_png(const DisparityMap& map) {
  Png16 img;
  img.width = map.width;
  img.height = map.height;
  img.pixels.assign(map.size(), 0);
  for (std::size_t i = 0; i < map.size(); ++i) {
    if (!map.valid[i] || map.values[i] <= 0.0) continue;
    const double stored = std::round(map.values[i] * 256.0);
    img.pixels[i] = static_cast<std::uint16_t>(std::clamp(stored, 1.0, 65535.0));
  }
  return write_png16(img);
}

namespace {

constexpr char kPldmMagic[4] = {'P', 'L', 'D', 'M'};

void put_u16_le(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

std::uint16_t get_u16_le(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

}  // namespace

DepthMap read_depth_pldm(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kPldmMagic, 4) != 0)
    throw_error(Errc::TruncatedRecord, "missing PLDM header");
  const int w = get_u16_le(bytes.data() + 4);
  const int h = get_u16_le(bytes.data() + 6);
  const std::size_t expected = 8 + static_cast<std::size_t>(w) * h * 4;
  if (bytes.size() != expected)
    throw_error(Errc::TruncatedRecord, "PLDM payload: expected " + std::to_string(expected) +
                                           " bytes, got " + std::to_string(bytes.size()));
  DepthMap map = DepthMap::make(w, h);
  const std::uint8_t* p = bytes.data() + 8;
  for (std::size_t i = 0; i < map.size(); ++i, p += 4) {
    float f;
    std::memcpy(&f, p, 4);
    if (f > 0.0f) {
      map.values[i] = f;
      map.valid[i] = 1;
    }
  }
  return map;
}

std::vector<std::uint8_t> write_depth_pldm(const DepthMap& map) {
  std::vector<std::uint8_t> out;
  out.reserve(8 + map.size() * 4);
  out.insert(out.end(), kPldmMagic, kPldmMagic + 4);
  put_u16_le(out, static_cast<std::uint16_t>(map.width));
  put_u16_le(out, static_cast<std::uint16_t>(map.height));
  for (std::size_t i = 0; i < map.size(); ++i) {
    const float f = map.valid[i] ? static_cast<float>(map.values[i]) : 0.0f;
    std::uint8_t buf[4];
    std::memcpy(buf, &f, 4);
    out.insert(out.end(), buf, buf + 4);
  }
  return out;
}

}  // namespace plc
