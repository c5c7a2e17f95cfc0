// Copyright (c) the plcloud authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "plc/boxeval.hpp"
#include "plc/calib.hpp"
#include "plc/cloud.hpp"
#include "plc/depthmap.hpp"

namespace plc {

struct SceneObject {
  Box3D box;  // camera-rect frame
  ObjectClass cls = ObjectClass::Car;
};

/// Analytic test scene: oriented boxes over an optional horizontal ground
/// plane, seen by a calibrated stereo rig.
struct SceneSpec {
  CameraModel camera;
  CalibrationSet calib;
  std::vector<SceneObject> objects;
  std::optional<double> ground_height;  // camera-frame y of the ground
  double disparity_noise_sigma = 0.0;   // px

  void validate() const;
};

struct RenderResult {
  DepthMap depth;
  InstanceMask mask;  // 0 = ground/background, 1..N = objects
  std::vector<GtObject> labels;
};

/// Exact per-pixel ray casting (slab method); depth is the nearest hit, pixels
/// that hit nothing are invalid. With disparity_noise_sigma > 0 the disparity
/// of each hit is perturbed by seeded Gaussian noise and converted back
/// through the stereo depth relation, so depth error grows quadratically with
/// distance. Deterministic in (spec, seed), independent of traversal order.
RenderResult render(const SceneSpec& spec, std::uint64_t seed = 0);

/// Plain-text key/value scene description. Keys: image_size W H, focal FU FV,
/// principal CU CV, baseline B, ground_height Y, noise_sigma S, r0_rect (9),
/// velo_to_cam (12), and repeatable `object CLASS x y z h w l ry`.
SceneSpec parse_scene_spec(std::string_view text);
std::string write_scene_spec(const SceneSpec& spec);

}  // namespace plc
