// Copyright (c) the plcloud authors
// SPDX-License-Identifier: Apache-2.0
//
// plcloud: depth/disparity maps -> pseudo-LiDAR point clouds, plus ground
// planes, BEV tensors, pseudo-disparity ground truth and detection scoring.
#include <CLI11.hpp>
#include <iostream>

#include "plc/error.hpp"
#include "plc/pipeline.hpp"

namespace {

using namespace plc;
using namespace plc::pipeline;

void add_common(CLI::App* app, CommonOpts& common, bool with_seed = true) {
  app->add_option("--out", common.out_dir, "output directory")->required();
  app->add_option("--jobs", common.jobs, "parallel frame workers")->default_val(1);
  app->add_flag("--keep-going", common.keep_going, "continue after per-frame failures");
  if (with_seed) app->add_option("--seed", common.seed, "PRNG seed")->default_val(0);
}

void add_calib(CLI::App* app, CalibSource& calib) {
  auto* dir = app->add_option("--calib-dir", calib.dir, "directory of <frame>.txt calibrations");
  auto* file = app->add_option("--calib", calib.file, "single calibration file for all frames");
  dir->excludes(file);
  app->add_option("--image-size", [&calib](const std::vector<std::string>& vals) {
        calib.image_width = std::stoi(vals.at(0));
        calib.image_height = std::stoi(vals.at(1));
        return true;
      },
      "image WIDTH HEIGHT for operations that need it")
      ->expected(2);
}

int run(int argc, char** argv) {
  CLI::App app{"pseudo-LiDAR conversion and evaluation toolkit"};
  app.require_subcommand(1);

  // convert
  ConvertCmd convert;
  auto* c = app.add_subcommand("convert", "disparity PNGs -> Velodyne-frame .bin clouds");
  c->add_option("--disparity-dir", convert.disparity_dir, "input disparity PNGs")->required();
  add_calib(c, convert.calib);
  add_common(c, convert.common, false);
  c->add_option("--depth-ceiling", convert.opts.filter.depth_ceiling)->default_val(120.0);
  c->add_option("--min-depth", convert.opts.filter.min_depth)->default_val(0.0);
  c->add_option("--max-height", convert.opts.filter.max_height_above_lidar,
                "height cut above the LiDAR origin, m")
      ->default_val(1.0);
  bool no_height_filter = false;
  c->add_flag("--no-height-filter", no_height_filter);

  // plane
  PlaneCmd plane;
  auto* p = app.add_subcommand("plane", "fit per-frame ground planes");
  p->add_option("--input-dir", plane.input_dir, "directory of .bin clouds or disparity PNGs")
      ->required();
  add_calib(p, plane.calib);
  add_common(p, plane.common);
  p->add_option("--iters", plane.ransac.iterations)->default_val(200);
  p->add_option("--threshold", plane.ransac.threshold)->default_val(0.02);

  // bev
  BevCmd bev;
  auto* b = app.add_subcommand("bev", ".bin clouds -> bird's-eye-view tensors");
  b->add_option("--bin-dir", bev.bin_dir)->required();
  add_common(b, bev.common, false);
  b->add_option("--resolution", bev.config.resolution)->default_val(0.1);
  b->add_option("--slices", bev.config.height_slices)->default_val(5);
  b->add_flag("--occupancy", bev.config.occupancy_mode, "0/1 slices instead of max height");
  bool no_density = false;
  b->add_flag("--no-density", no_density);
  b->add_flag("--pgm", bev.write_pgm, "also write one PGM per channel");

  // gtdisp
  GtDispCmd gtdisp;
  auto* g = app.add_subcommand("gtdisp", "LiDAR .bin -> pseudo disparity ground truth PNGs");
  g->add_option("--velodyne-dir", gtdisp.velodyne_dir)->required();
  add_calib(g, gtdisp.calib);
  add_common(g, gtdisp.common);

  // eval
  EvalCmd eval;
  auto* e = app.add_subcommand("eval", "KITTI-style AP_BEV / AP_3D evaluation");
  e->add_option("--gt-dir", eval.gt_dir)->required();
  e->add_option("--det-dir", eval.det_dir)->required();
  std::vector<double> ious;
  e->add_option("--iou", ious, "IoU thresholds (default 0.5 0.7)");
  int interp = 11;
  e->add_option("--interp", interp, "11 or 40 point interpolation")->default_val(11);
  std::vector<std::string> classes;
  e->add_option("--classes", classes, "classes to evaluate (default Car)");
  e->add_option("--report", eval.report_path, "also write the report as TSV");
  e->add_option("--format", eval.format, "table | tsv | json")->default_val("table");

  // blur-study
  BlurStudyCmd blur;
  auto* s = app.add_subcommand("blur-study",
                               "measure per-instance spread caused by depth-map smoothing");
  s->add_option("--input-dir", blur.input_dir, ".pldm depth or disparity PNGs")->required();
  s->add_option("--mask-dir", blur.mask_dir, "16-bit instance-id PNGs")->required();
  add_calib(s, blur.calib);
  add_common(s, blur.common, false);
  s->add_option("--kernel", blur.kernel, "box filter size (odd)")->default_val(11);
  bool no_clouds = false;
  s->add_flag("--no-cloud-export", no_clouds);

  // synth
  SynthCmd synth;
  auto* y = app.add_subcommand("synth", "render an analytic scene to depth/mask/labels/cloud");
  y->add_option("--scene", synth.scene_file, "scene spec file")->required();
  y->add_option("--frame-id", synth.frame_id)->default_val("000000");
  add_common(y, synth.common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*c) {
      convert.opts.apply_height_filter = !no_height_filter;
      return cmd_convert(convert, std::cout);
    }
    if (*p) return cmd_plane(plane, std::cout);
    if (*b) {
      bev.config.include_density = !no_density;
      return cmd_bev(bev, std::cout);
    }
    if (*g) return cmd_gtdisp(gtdisp, std::cout);
    if (*e) {
      if (!ious.empty()) eval.config.iou_thresholds = ious;
      if (interp != 11 && interp != 40) throw_error(Errc::InvalidArgument, "--interp must be 11 or 40");
      eval.config.mode = interp == 11 ? ApInterp::Interp11 : ApInterp::Interp40;
      if (!classes.empty()) {
        eval.config.classes.clear();
        for (const std::string& name : classes) {
          const ObjectClass cls = object_class_from(name);
          if (cls == ObjectClass::Other || cls == ObjectClass::DontCare)
            throw_error(Errc::UnknownClass, name);
          eval.config.classes.push_back(cls);
        }
      }
      return cmd_eval(eval, std::cout);
    }
    if (*s) {
      blur.export_clouds = !no_clouds;
      return cmd_blur_study(blur, std::cout);
    }
    if (*y) return cmd_synth(synth, std::cout);
  } catch (const std::exception& err) {
    std::cerr << "plcloud: " << err.what() << '\n';
    return 2;
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
