// Copyright (c) the plcloud authors
// SPDX-License-Identifier: Apache-2.0
#include "plc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "plc/error.hpp"

namespace plc {

void SceneSpec::validate() const {
  camera.validate();
  if (disparity_noise_sigma < 0.0)
    throw_error(Errc::InvalidArgument, "noise sigma must be non-negative");
  for (const SceneObject& obj : objects) {
    obj.box.validate();
    if (!(obj.box.z > 0.0))
      throw_error(Errc::DegenerateScene, "object behind the camera");
  }
  if (objects.empty() && !ground_height)
    throw_error(Errc::DegenerateScene, "scene has no surfaces");
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double to_unit(std::uint64_t x) { return static_cast<double>(x >> 11) * 0x1.0p-53; }

// Standard normal from a hash of (seed, pixel index); reproducible no matter
// how pixels are traversed.
double pixel_gaussian(std::uint64_t seed, std::uint64_t pixel_index) {
  const std::uint64_t a = splitmix64(seed ^ splitmix64(pixel_index));
  const std::uint64_t b = splitmix64(a);
  const double u1 = 1.0 - to_unit(a);  // (0, 1]
  const double u2 = to_unit(b);        // [0, 1)
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

struct LocalBox {
  Mat3 world_from_local;  // rotation about the camera vertical axis
  Vec3 center;            // mid-height center
  Vec3 half;              // (l/2, h/2, w/2) in local (x, y, z)
};

LocalBox make_local(const Box3D& b) {
  const double c = std::cos(b.rotation_y);
  const double s = std::sin(b.rotation_y);
  LocalBox lb;
  lb.world_from_local = Mat3{{c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c}};
  lb.center = {b.x, b.y - b.h / 2.0, b.z};
  lb.half = {b.l / 2.0, b.h / 2.0, b.w / 2.0};
  return lb;
}

// Slab-method ray/box intersection; returns the smallest positive ray
// parameter or nothing.
std::optional<double> ray_box(const LocalBox& box, const Vec3& origin, const Vec3& dir) {
  const Mat3 local_from_world = box.world_from_local.transpose();
  const Vec3 o = local_from_world * (origin - box.center);
  const Vec3 d = local_from_world * dir;
  double tmin = -std::numeric_limits<double>::infinity();
  double tmax = std::numeric_limits<double>::infinity();
  const double os[3] = {o.x, o.y, o.z};
  const double ds[3] = {d.x, d.y, d.z};
  const double hs[3] = {box.half.x, box.half.y, box.half.z};
  for (int i = 0; i < 3; ++i) {
    if (std::fabs(ds[i]) < 1e-15) {
      if (os[i] < -hs[i] || os[i] > hs[i]) return std::nullopt;
      continue;
    }
    double t0 = (-hs[i] - os[i]) / ds[i];
    double t1 = (hs[i] - os[i]) / ds[i];
    if (t0 > t1) std::swap(t0, t1);
    tmin = std::max(tmin, t0);
    tmax = std::min(tmax, t1);
    if (tmin > tmax) return std::nullopt;
  }
  if (tmax <= 0.0) return std::nullopt;
  return tmin > 0.0 ? tmin : tmax;
}

double wrap_angle(double a) {
  while (a > M_PI) a -= 2.0 * M_PI;
  while (a <= -M_PI) a += 2.0 * M_PI;
  return a;
}

GtObject make_label(const SceneObject& obj, const CameraModel& cam, std::size_t visible_px,
                    std::size_t occluded_px) {
  GtObject gt;
  gt.type = object_class_name(obj.cls);
  gt.cls = obj.cls;
  gt.box = obj.box;
  gt.alpha = wrap_angle(obj.box.rotation_y - std::atan2(obj.box.x, obj.box.z));

  // 2D bounds from the projected box corners, truncation from the clipped area
  const LocalBox lb = make_local(obj.box);
  const double bx = cam.applied_offset_x();
  const double by = cam.applied_offset_y();
  double u0 = 1e300, v0 = 1e300, u1 = -1e300, v1 = -1e300;
  bool behind = false;
  for (int i = 0; i < 8; ++i) {
    const Vec3 corner_local{(i & 1 ? 1.0 : -1.0) * lb.half.x, (i & 2 ? 1.0 : -1.0) * lb.half.y,
                            (i & 4 ? 1.0 : -1.0) * lb.half.z};
    const Vec3 p = lb.world_from_local * corner_local + lb.center;
    if (p.z <= 0.0) {
      behind = true;
      continue;
    }
    const double u = cam.f_u * (p.x - bx) / p.z + cam.c_u;
    const double v = cam.f_v * (p.y - by) / p.z + cam.c_v;
    u0 = std::min(u0, u);
    v0 = std::min(v0, v);
    u1 = std::max(u1, u);
    v1 = std::max(v1, v);
  }

  if (u1 < u0) {  // fully behind the camera
    gt.truncation = 1.0;
    gt.occlusion = 3;
    return gt;
  }
  const double cu0 = std::clamp(u0, 0.0, static_cast<double>(cam.width - 1));
  const double cv0 = std::clamp(v0, 0.0, static_cast<double>(cam.height - 1));
  const double cu1 = std::clamp(u1, 0.0, static_cast<double>(cam.width - 1));
  const double cv1 = std::clamp(v1, 0.0, static_cast<double>(cam.height - 1));
  gt.bbox_left = cu0;
  gt.bbox_top = cv0;
  gt.bbox_right = cu1;
  gt.bbox_bottom = cv1;
  const double full = (u1 - u0) * (v1 - v0);
  const double clipped = (cu1 - cu0) * (cv1 - cv0);
  gt.truncation = behind || full <= 0.0 ? 1.0 : std::clamp(1.0 - clipped / full, 0.0, 1.0);

  const std::size_t total = visible_px + occluded_px;
  if (total == 0)
    gt.occlusion = 3;
  else {
    const double frac = static_cast<double>(occluded_px) / static_cast<double>(total);
    gt.occlusion = frac <= 0.1 ? 0 : (frac <= 0.5 ? 1 : 2);
  }
  return gt;
}

}  // namespace

RenderResult render(const SceneSpec& spec, std::uint64_t seed) {
  spec.validate();
  const CameraModel& cam = spec.camera;
  const int width = cam.width;
  const int height = cam.height;

  std::vector<LocalBox> boxes;
  boxes.reserve(spec.objects.size());
  for (const SceneObject& obj : spec.objects) boxes.push_back(make_local(obj.box));

  RenderResult out;
  out.depth = DepthMap::make(width, height);
  out.mask.width = width;
  out.mask.height = height;
  out.mask.labels.assign(out.depth.size(), 0);

  std::vector<std::size_t> visible(spec.objects.size(), 0);
  std::vector<std::size_t> occluded(spec.objects.size(), 0);

  const Vec3 origin{cam.applied_offset_x(), cam.applied_offset_y(), 0.0};
  const double fb = cam.f_u * cam.baseline_b;

  std::size_t idx = 0;
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u, ++idx) {
      const Vec3 dir{(u - cam.c_u) / cam.f_u, (v - cam.c_v) / cam.f_v, 1.0};

      double best_t = std::numeric_limits<double>::infinity();
      std::int32_t label = 0;
      // normalized so pixel depth == ray parameter (dir.z == 1)
      struct Hit {
        std::size_t obj;
        double t;
      };
      std::vector<Hit> hits;
      hits.reserve(boxes.size());
      for (std::size_t b = 0; b < boxes.size(); ++b) {
        if (auto t = ray_box(boxes[b], origin, dir)) {
          hits.push_back({b, *t});
          if (*t < best_t) {
            best_t = *t;
            label = static_cast<std::int32_t>(b) + 1;
          }
        }
      }
      if (spec.ground_height && dir.y > 1e-15) {
        const double t = (*spec.ground_height - origin.y) / dir.y;
        if (t > 0.0 && t < best_t) {
          best_t = t;
          label = 0;
        }
      }
      for (const Hit& h : hits) {
        if (static_cast<std::int32_t>(h.obj) + 1 == label)
          ++visible[h.obj];
        else
          ++occluded[h.obj];
      }
      if (!std::isfinite(best_t)) continue;

      double depth = best_t;
      if (spec.disparity_noise_sigma > 0.0) {
        const double disparity =
            fb / depth + spec.disparity_noise_sigma * pixel_gaussian(seed, idx);
        if (disparity <= 1e-6) continue;
        depth = fb / disparity;
      }
      out.depth.values[idx] = depth;
      out.depth.valid[idx] = 1;
      out.mask.labels[idx] = label;
    }
  }

  out.labels.reserve(spec.objects.size());
  for (std::size_t b = 0; b < spec.objects.size(); ++b)
    out.labels.push_back(make_label(spec.objects[b], cam, visible[b], occluded[b]));
  return out;
}

// --- scene spec text ---------------------------------------------------------

SceneSpec parse_scene_spec(std::string_view text) {
  SceneSpec spec;
  spec.calib.rect_rotation = Mat3::identity();
  spec.calib.velo_to_cam = RigidTransform::identity();

  int width = 0, height = 0;
  double f_u = 0, f_v = 0, c_u = 0, c_v = 0, baseline = 0;

  std::istringstream stream{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream row(line);
    std::string key;
    if (!(row >> key)) continue;

    auto need = [&](auto&... vals) {
      if (!((row >> vals) && ...))
        throw_error(Errc::BadNumber, "scene line " + std::to_string(line_no) + " (" + key + ")");
    };

    if (key == "image_size") {
      need(width, height);
    } else if (key == "focal") {
      need(f_u, f_v);
    } else if (key == "principal") {
      need(c_u, c_v);
    } else if (key == "baseline") {
      need(baseline);
    } else if (key == "ground_height") {
      double g;
      need(g);
      spec.ground_height = g;
    } else if (key == "noise_sigma") {
      need(spec.disparity_noise_sigma);
    } else if (key == "r0_rect") {
      Mat3 r;
      need(r.m[0], r.m[1], r.m[2], r.m[3], r.m[4], r.m[5], r.m[6], r.m[7], r.m[8]);
      if (!r.is_rotation(1e-6)) throw_error(Errc::NonOrthonormalRotation, "r0_rect");
      spec.calib.rect_rotation = r;
    } else if (key == "velo_to_cam") {
      Mat3 r;
      Vec3 t;
      need(r.m[0], r.m[1], r.m[2], t.x, r.m[3], r.m[4], r.m[5], t.y, r.m[6], r.m[7], r.m[8], t.z);
      if (!r.is_rotation(1e-6)) throw_error(Errc::NonOrthonormalRotation, "velo_to_cam");
      spec.calib.velo_to_cam = {r, t};
    } else if (key == "object") {
      SceneObject obj;
      std::string cls;
      if (!(row >> cls))
        throw_error(Errc::BadNumber, "scene line " + std::to_string(line_no) + ": missing class");
      obj.cls = object_class_from(cls);
      if (obj.cls == ObjectClass::Other || obj.cls == ObjectClass::DontCare)
        throw_error(Errc::UnknownClass, "scene line " + std::to_string(line_no) + ": " + cls);
      need(obj.box.x, obj.box.y, obj.box.z, obj.box.h, obj.box.w, obj.box.l, obj.box.rotation_y);
      spec.objects.push_back(obj);
    } else {
      throw_error(Errc::InvalidArgument,
                  "scene line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }

  spec.camera.f_u = f_u;
  spec.camera.f_v = f_v;
  spec.camera.c_u = c_u;
  spec.camera.c_v = c_v;
  spec.camera.baseline_b = baseline;
  spec.camera.width = width;
  spec.camera.height = height;
  spec.calib.cam = spec.camera;
  spec.validate();
  return spec;
}

std::string write_scene_spec(const SceneSpec& spec) {
  char buf[400];
  std::string out;
  std::snprintf(buf, sizeof(buf), "image_size %d %d\nfocal %.9f %.9f\nprincipal %.9f %.9f\nbaseline %.9f\n",
                spec.camera.width, spec.camera.height, spec.camera.f_u, spec.camera.f_v,
                spec.camera.c_u, spec.camera.c_v, spec.camera.baseline_b);
  out += buf;
  if (spec.ground_height) {
    std::snprintf(buf, sizeof(buf), "ground_height %.9f\n", *spec.ground_height);
    out += buf;
  }
  if (spec.disparity_noise_sigma > 0.0) {
    std::snprintf(buf, sizeof(buf), "noise_sigma %.9f\n", spec.disparity_noise_sigma);
    out += buf;
  }
  auto write_mat = [&](const char* key, const Mat3& r, const Vec3* t) {
    out += key;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        std::snprintf(buf, sizeof(buf), " %.9f", r(i, j));
        out += buf;
      }
      if (t) {
        const double tv = i == 0 ? t->x : (i == 1 ? t->y : t->z);
        std::snprintf(buf, sizeof(buf), " %.9f", tv);
        out += buf;
      }
    }
    out += '\n';
  };
  if (spec.calib.rect_rotation.m != Mat3::identity().m)
    write_mat("r0_rect", spec.calib.rect_rotation, nullptr);
  if (spec.calib.velo_to_cam.rotation.m != Mat3::identity().m ||
      spec.calib.velo_to_cam.translation.norm() != 0.0)
    write_mat("velo_to_cam", spec.calib.velo_to_cam.rotation, &spec.calib.velo_to_cam.translation);
  for (const SceneObject& obj : spec.objects) {
    std::snprintf(buf, sizeof(buf), "object %s %.9f %.9f %.9f %.9f %.9f %.9f %.9f\n",
                  object_class_name(obj.cls), obj.box.x, obj.box.y, obj.box.z, obj.box.h,
                  obj.box.w, obj.box.l, obj.box.rotation_y);
    out += buf;
  }
  return out;
}

}  // namespace plc
