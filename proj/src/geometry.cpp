// Copyright (c) the plcloud authors
// SPDX-License-Identifier: Apache-2.0
#include "plc/geometry.hpp"

namespace plc {

Mat3 axis_angle_rotation(const Vec3& axis, double angle) {
  const Vec3 a = axis.normalized();
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const double t = 1.0 - c;
  Mat3 r;
  r(0, 0) = c + a.x * a.x * t;
  r(0, 1) = a.x * a.y * t - a.z * s;
  r(0, 2) = a.x * a.z * t + a.y * s;
  r(1, 0) = a.y * a.x * t + a.z * s;
  r(1, 1) = c + a.y * a.y * t;
  r(1, 2) = a.y * a.z * t - a.x * s;
  r(2, 0) = a.z * a.x * t - a.y * s;
  r(2, 1) = a.z * a.y * t + a.x * s;
  r(2, 2) = c + a.z * a.z * t;
  return r;
}

}  // namespace plc
