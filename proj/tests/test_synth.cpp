// Copyright (c) the plcloud authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "plc/cloud.hpp"
#include "plc/error.hpp"
#include "plc/synth.hpp"

using namespace plc;

namespace {

SceneSpec base_scene(int w = 320, int h = 200) {
  SceneSpec spec;
  spec.camera.f_u = 350.0;
  spec.camera.f_v = 350.0;
  spec.camera.c_u = w / 2.0;
  spec.camera.c_v = h / 2.0;
  spec.camera.baseline_b = 0.54;
  spec.camera.width = w;
  spec.camera.height = h;
  spec.calib.cam = spec.camera;
  return spec;
}

SceneObject car_at(double x, double y, double z, double ry = 0.0) {
  SceneObject obj;
  obj.cls = ObjectClass::Car;
  obj.box.x = x;
  obj.box.y = y;
  obj.box.z = z;
  obj.box.h = 1.5;
  obj.box.w = 1.8;
  obj.box.l = 4.2;
  obj.box.rotation_y = ry;
  return obj;
}

}  // namespace

TEST_CASE("fronto-parallel face filling the view renders constant depth") {
  SceneSpec spec = base_scene(64, 48);
  SceneObject wall;
  wall.cls = ObjectClass::Misc;
  wall.box.x = 0.0;
  wall.box.y = 50.0;  // bottom far below the frustum
  wall.box.z = 10.05;
  wall.box.h = 100.0;
  wall.box.w = 0.1;  // thin slab, front face at z = 10.0
  wall.box.l = 100.0;
  wall.box.rotation_y = 0.0;
  spec.objects.push_back(wall);

  const RenderResult r = render(spec, 0);
  CHECK(r.depth.valid_count() == 64 * 48);
  for (std::size_t i = 0; i < r.depth.size(); ++i) {
    CHECK(r.depth.values[i] == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(r.mask.labels[i] == 1);
  }
  REQUIRE(r.labels.size() == 1);
  CHECK(r.labels[0].truncation > 0.5);  // wall extends far beyond the image
}

TEST_CASE("ground-only scene matches the closed-form ray/plane depth") {
  SceneSpec spec = base_scene(100, 80);
  spec.ground_height = 1.65;
  const RenderResult r = render(spec, 0);

  const double c_v = spec.camera.c_v;
  const double f_v = spec.camera.f_v;
  double worst = 0.0;
  std::size_t wrong_validity = 0, wrong_label = 0;
  for (int v = 0; v < 80; ++v) {
    for (int u = 0; u < 100; ++u) {
      if (v <= c_v) {
        wrong_validity += r.depth.is_valid(u, v);  // horizon and above stay empty
      } else if (!r.depth.is_valid(u, v)) {
        ++wrong_validity;
      } else {
        const double expect = 1.65 * f_v / (v - c_v);
        worst = std::max(worst, std::fabs(r.depth.at(u, v) - expect) / expect);
        wrong_label += r.mask.labels[r.depth.index(u, v)] != 0;
      }
    }
  }
  CHECK(wrong_validity == 0);
  CHECK(wrong_label == 0);
  CHECK(worst < 1e-12);
}

TEST_CASE("back-projected render lies on the scene surfaces") {
  SceneSpec spec = base_scene();
  spec.ground_height = 1.65;
  spec.objects.push_back(car_at(-1.0, 1.65, 14.0, 0.4));
  const RenderResult r = render(spec, 0);
  const PointCloud pc = backproject(r.depth, spec.camera);

  // distance to the car box in its local frame, or to the ground plane
  const SceneObject& car = spec.objects[0];
  const double cc = std::cos(car.box.rotation_y);
  const double cs = std::sin(car.box.rotation_y);
  std::size_t k = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < r.depth.size(); ++i) {
    if (!r.depth.valid[i]) continue;
    const Point& p = pc.points[k++];
    if (r.mask.labels[i] == 1) {
      const double dx = p.x - car.box.x;
      const double dy = p.y - (car.box.y - car.box.h / 2.0);
      const double dz = p.z - car.box.z;
      const double lx = dx * cc - dz * cs;
      const double lz = dx * cs + dz * cc;
      const double face = std::max({std::fabs(lx) - car.box.l / 2.0,
                                    std::fabs(dy) - car.box.h / 2.0,
                                    std::fabs(lz) - car.box.w / 2.0});
      worst = std::max(worst, std::fabs(face));
    } else {
      worst = std::max(worst, std::fabs(p.y - 1.65));
    }
  }
  CHECK(k == pc.size());
  CHECK(worst < 1e-6);
}

TEST_CASE("rendering is deterministic and noise free pixels carry no jitter") {
  SceneSpec spec = base_scene(80, 60);
  spec.ground_height = 1.6;
  spec.objects.push_back(car_at(0.5, 1.6, 12.0));
  spec.disparity_noise_sigma = 0.5;
  const RenderResult a = render(spec, 7);
  const RenderResult b = render(spec, 7);
  CHECK(a.depth.values == b.depth.values);
  CHECK(a.depth.valid == b.depth.valid);
  CHECK(a.mask.labels == b.mask.labels);

  const RenderResult c = render(spec, 8);
  CHECK(a.depth.values != c.depth.values);

  spec.disparity_noise_sigma = 0.0;
  const RenderResult clean1 = render(spec, 7);
  const RenderResult clean2 = render(spec, 12345);
  CHECK(clean1.depth.values == clean2.depth.values);
}

TEST_CASE("disparity noise grows depth error roughly quadratically") {
  SceneSpec spec = base_scene(240, 160);
  const double depths[2] = {10.0, 40.0};
  // two fronto-parallel slabs side by side
  for (int i = 0; i < 2; ++i) {
    SceneObject slab;
    slab.cls = ObjectClass::Misc;
    slab.box.x = i == 0 ? -30.0 : 30.0;
    slab.box.y = 60.0;
    slab.box.z = depths[i] + 0.05;
    slab.box.h = 120.0;
    slab.box.w = 0.1;
    slab.box.l = 59.0;
    slab.box.rotation_y = 0.0;
    spec.objects.push_back(slab);
  }
  spec.disparity_noise_sigma = 0.05;
  const RenderResult r = render(spec, 3);

  double sum[2] = {0, 0}, sum2[2] = {0, 0};
  std::size_t n[2] = {0, 0};
  for (std::size_t i = 0; i < r.depth.size(); ++i) {
    if (!r.depth.valid[i] || r.mask.labels[i] == 0) continue;
    const int slab = r.mask.labels[i] - 1;
    sum[slab] += r.depth.values[i];
    sum2[slab] += r.depth.values[i] * r.depth.values[i];
    ++n[slab];
  }
  REQUIRE(n[0] > 3000);
  REQUIRE(n[1] > 3000);
  double sigma[2];
  for (int i = 0; i < 2; ++i) {
    const double mean = sum[i] / n[i];
    sigma[i] = std::sqrt(std::max(0.0, sum2[i] / n[i] - mean * mean));
  }
  // sigma_z ~ z^2 * sigma_d / (f b): ratio should be near (40/10)^2 = 16
  const double ratio = sigma[1] / sigma[0];
  CHECK(ratio > 16.0 / 1.5);
  CHECK(ratio < 16.0 * 1.5);
}

TEST_CASE("labels carry projected 2D boxes, truncation and occlusion") {
  SceneSpec spec = base_scene();
  spec.ground_height = 1.65;
  spec.objects.push_back(car_at(0.0, 1.65, 15.0));    // fully visible
  spec.objects.push_back(car_at(0.0, 1.65, 25.0));    // behind the first
  spec.objects.push_back(car_at(-5.0, 1.65, 12.0));   // pokes out of the image
  const RenderResult r = render(spec, 0);
  REQUIRE(r.labels.size() == 3);

  const GtObject& front = r.labels[0];
  CHECK(front.truncation == doctest::Approx(0.0));
  CHECK(front.occlusion == 0);
  CHECK(front.bbox2d_height() > 20.0);
  CHECK(front.box.z == doctest::Approx(15.0));
  CHECK(front.cls == ObjectClass::Car);

  const GtObject& hidden = r.labels[1];
  CHECK(hidden.occlusion >= 1);

  const GtObject& cut = r.labels[2];
  CHECK(cut.truncation > 0.2);
}

TEST_CASE("scene spec text round-trips") {
  SceneSpec spec = base_scene();
  spec.ground_height = 1.65;
  spec.disparity_noise_sigma = 0.25;
  spec.objects.push_back(car_at(1.0, 1.65, 22.0, -0.3));
  spec.calib.velo_to_cam.translation = {0.1, -0.2, 0.3};

  const std::string text = write_scene_spec(spec);
  const SceneSpec back = parse_scene_spec(text);
  CHECK(back.camera.f_u == doctest::Approx(spec.camera.f_u));
  CHECK(back.camera.width == spec.camera.width);
  CHECK(*back.ground_height == doctest::Approx(1.65));
  CHECK(back.disparity_noise_sigma == doctest::Approx(0.25));
  REQUIRE(back.objects.size() == 1);
  CHECK(back.objects[0].box.z == doctest::Approx(22.0));
  CHECK(back.objects[0].box.rotation_y == doctest::Approx(-0.3));
  CHECK(back.calib.velo_to_cam.translation.y == doctest::Approx(-0.2));

  const RenderResult a = render(spec, 5);
  const RenderResult b = render(back, 5);
  CHECK(a.depth.values == b.depth.values);
}

TEST_CASE("scene spec grammar errors") {
  CHECK_THROWS_AS(parse_scene_spec("image_size 10\n"), Error);          // missing value
  CHECK_THROWS_AS(parse_scene_spec("bogus_key 1 2 3\n"), Error);        // unknown key
  CHECK_THROWS_AS(parse_scene_spec("object Tree 0 0 5 1 1 1 0\n"), Error);
  // no surfaces at all
  CHECK_THROWS_AS(
      parse_scene_spec("image_size 10 10\nfocal 10 10\nprincipal 5 5\nbaseline 0.5\n"), Error);
  // objects behind the camera
  SceneSpec spec = base_scene();
  spec.objects.push_back(car_at(0, 1.65, -5.0));
  CHECK_THROWS_AS(render(spec, 0), Error);
}
