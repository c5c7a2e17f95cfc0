// Copyright (c) the plcloud authors
// SPDX-License-Identifier: Apache-2.0
#include "plc/calib.hpp"

#include <charconv>
#include <map>
#include <sstream>
#include <vector>

#include "plc/error.hpp"

namespace plc {

void CameraModel::validate() const {
  if (!(f_u > 0.0) || !(f_v > 0.0))
    throw_error(Errc::InvalidArgument, "focal lengths must be positive");
  if (!(baseline_b > 0.0)) throw_error(Errc::InvalidArgument, "baseline must be positive");
  if (width <= 0 || height <= 0)
    throw_error(Errc::InvalidArgument, "image size must be positive");
  if (c_u < 0.0 || c_u >= width || c_v < 0.0 || c_v >= height)
    throw_error(Errc::InvalidArgument, "principal point outside the image");
}

namespace {

std::map<std::string, std::vector<double>, std::less<>> parse_key_values(std::string_view text) {
  std::map<std::string, std::vector<double>, std::less<>> out;
  std::istringstream stream{std::string(text)};
  std::string line;
  while (std::getline(stream, line)) {
    const auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    std::string key = line.substr(0, colon);
    while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
    if (key.empty()) continue;
    // A token that fails to parse truncates the value list; the per-key
    // count check turns that into MalformedMatrix.
    std::vector<double> values;
    std::istringstream rest(line.substr(colon + 1));
    std::string tok;
    while (rest >> tok) {
      double v = 0.0;
      const char* begin = tok.data();
      const char* end = begin + tok.size();
      auto [ptr, ec] = std::from_chars(begin, end, v);
      if (ec != std::errc{} || ptr != end) break;
      values.push_back(v);
    }
    out[key] = std::move(values);
  }
  return out;
}

const std::vector<double>& require(
    const std::map<std::string, std::vector<double>, std::less<>>& kv, const std::string& key,
    std::size_t expected) {
  auto it = kv.find(key);
  if (it == kv.end()) throw_error(Errc::MissingKey, key);
  if (it->second.size() != expected)
    throw_error(Errc::MalformedMatrix, key + ": expected " + std::to_string(expected) +
                                           " values, got " + std::to_string(it->second.size()));
  return it->second;
}

Mat3 rotation_from(const std::vector<double>& v, std::size_t offset, int stride,
                   const std::string& name) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      r(i, j) = v[offset + static_cast<std::size_t>(i * stride + j)];
  if (!r.is_rotation(1e-6)) throw_error(Errc::NonOrthonormalRotation, name);
  return r;
}

}  // namespace

CalibrationSet parse_kitti_calib(std::string_view text, std::string source_file, int image_width,
                                 int image_height) {
  const auto kv = parse_key_values(text);
  const auto& p2 = require(kv, "P2", 12);
  const auto& p3 = require(kv, "P3", 12);
  const auto& r0 = require(kv, "R0_rect", 9);
  const auto& tr = require(kv, "Tr_velo_to_cam", 12);

  CalibrationSet calib;
  calib.source_file = std::move(source_file);
  calib.rect_rotation = rotation_from(r0, 0, 3, "R0_rect");
  calib.velo_to_cam.rotation = rotation_from(tr, 0, 4, "Tr_velo_to_cam");
  calib.velo_to_cam.translation = {tr[3], tr[7], tr[11]};

  CameraModel& cam = calib.cam;
  cam.f_u = p2[0];
  cam.f_v = p2[5];
  cam.c_u = p2[2];
  cam.c_v = p2[6];
  if (cam.f_u == 0.0 || cam.f_v == 0.0) throw_error(Errc::MalformedMatrix, "P2: zero focal length");
  // KITTI publishes no baseline field; recover it from the horizontal
  // projection offsets of the two rectified color cameras.
  cam.baseline_b = (p2[3] - p3[3]) / cam.f_u;
  cam.offset_x = -p2[3] / cam.f_u;
  cam.offset_y = -p2[7] / cam.f_v;
  cam.width = image_width;
  cam.height = image_height;
  cam.validate();
  return calib;
}

RigidTransform velo_to_cam_rect(const CalibrationSet& calib) {
  return RigidTransform{calib.rect_rotation, Vec3{}}.compose(calib.velo_to_cam);
}

RigidTransform cam_to_velo(const CalibrationSet& calib) {
  return velo_to_cam_rect(calib).inverse();
}

}  // namespace plc
