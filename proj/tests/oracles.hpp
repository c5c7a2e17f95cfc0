// Copyright (c) the plcloud authors
// SPDX-License-Identifier: Apache-2.0
//
// Test-only reference implementations, kept independent of the library code
// paths they are used to check.
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include "plc/boxeval.hpp"

namespace oracles {

// y-interval of the rotated rectangle footprint cut by the vertical line x=c.
// The rectangle is decoded from the box fields directly (center, half dims,
// axis directions), not from the library's corner/clipping code.
inline std::optional<std::pair<double, double>> rect_line_cut(const plc::Box3D& b, double x) {
  const double c = std::cos(b.rotation_y);
  const double s = std::sin(b.rotation_y);
  // footprint axes in the (x, z) plane: u along length, v along width
  const double ux = c, uz = -s;
  const double vx = s, vz = c;
  const double hl = b.l / 2.0, hw = b.w / 2.0;

  // point (x, y): | (p-ctr)·u | <= hl and | (p-ctr)·v | <= hw
  // each constraint is linear in y:  a*y + t0 in [-h, h]
  double lo = -1e300, hi = 1e300;
  const double dx = x - b.x;
  const struct {
    double a, t0, h;
  } cons[2] = {{uz, dx * ux, hl}, {vz, dx * vx, hw}};
  for (const auto& cn : cons) {
    const double base = cn.t0 + (-b.z) * cn.a;
    if (std::fabs(cn.a) < 1e-300) {
      if (std::fabs(cn.t0) > cn.h) return std::nullopt;
      continue;
    }
    double y0 = (-cn.h - base) / cn.a;
    double y1 = (cn.h - base) / cn.a;
    if (y0 > y1) std::swap(y0, y1);
    lo = std::max(lo, y0);
    hi = std::min(hi, y1);
  }
  if (lo >= hi) return std::nullopt;
  return std::make_pair(lo, hi);
}

// Scanline quadrature: exact interval overlap in z, midpoint discretization
// along x only.
inline double bev_iou_scanline(const plc::Box3D& a, const plc::Box3D& b, int columns = 20000) {
  const double ra = std::hypot(a.l, a.w) / 2.0;
  const double rb = std::hypot(b.l, b.w) / 2.0;
  const double x0 = std::min(a.x - ra, b.x - rb);
  const double x1 = std::max(a.x + ra, b.x + rb);
  const double h = (x1 - x0) / columns;
  double inter = 0.0;
  for (int i = 0; i < columns; ++i) {
    const double x = x0 + (i + 0.5) * h;
    const auto ia = rect_line_cut(a, x);
    if (!ia) continue;
    const auto ib = rect_line_cut(b, x);
    if (!ib) continue;
    const double lo = std::max(ia->first, ib->first);
    const double hi = std::min(ia->second, ib->second);
    if (hi > lo) inter += (hi - lo) * h;
  }
  const double uni = a.l * a.w + b.l * b.w - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

// Center-of-cell 2D rasterization over the joint bounding box.
inline double bev_iou_raster(const plc::Box3D& a, const plc::Box3D& b, int grid = 600) {
  auto inside = [](const plc::Box3D& box, double x, double z) {
    const double c = std::cos(box.rotation_y);
    const double s = std::sin(box.rotation_y);
    const double dx = x - box.x;
    const double dz = z - box.z;
    const double u = dx * c - dz * s;
    const double v = dx * s + dz * c;
    return std::fabs(u) <= box.l / 2.0 && std::fabs(v) <= box.w / 2.0;
  };
  const double ra = std::hypot(a.l, a.w) / 2.0;
  const double rb = std::hypot(b.l, b.w) / 2.0;
  const double x0 = std::min(a.x - ra, b.x - rb);
  const double x1 = std::max(a.x + ra, b.x + rb);
  const double z0 = std::min(a.z - ra, b.z - rb);
  const double z1 = std::max(a.z + ra, b.z + rb);
  long na = 0, nb = 0, ni = 0;
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      const double x = x0 + (i + 0.5) * (x1 - x0) / grid;
      const double z = z0 + (j + 0.5) * (z1 - z0) / grid;
      const bool in_a = inside(a, x, z);
      const bool in_b = inside(b, x, z);
      na += in_a;
      nb += in_b;
      ni += in_a && in_b;
    }
  const long nu = na + nb - ni;
  return nu > 0 ? static_cast<double>(ni) / static_cast<double>(nu) : 0.0;
}

}  // namespace oracles
