// Copyright (c) the plcloud authors
// SPDX-License-Identifier: Apache-2.0
#include "plc/pipeline.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "plc/error.hpp"

namespace plc::pipeline {

namespace fs = std::filesystem;

std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_error(Errc::IoError, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

std::string read_text_file(const fs::path& path) {
  const auto bytes = read_file(path);
  return std::string(bytes.begin(), bytes.end());
}

namespace {

void write_atomic_impl(const fs::path& path, const void* data, std::size_t size) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw_error(Errc::IoError, "cannot write " + tmp.string());
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    if (!out) throw_error(Errc::IoError, "short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

}  // namespace

void write_file_atomic(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  write_atomic_impl(path, bytes.data(), bytes.size());
}

void write_file_atomic(const fs::path& path, std::string_view text) {
  write_atomic_impl(path, text.data(), text.size());
}

std::vector<std::string> list_frame_stems(const fs::path& dir, std::string_view extension) {
  if (!fs::is_directory(dir)) throw_error(Errc::IoError, dir.string() + " is not a directory");
  std::vector<std::string> stems;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    if (entry.path().extension() == extension) stems.push_back(entry.path().stem().string());
  }
  std::sort(stems.begin(), stems.end());
  return stems;
}

CalibrationSet CalibSource::load(const std::string& stem) const {
  const fs::path path = file.empty() ? dir / (stem + ".txt") : file;
  return parse_kitti_calib(read_text_file(path), path.string(), image_width, image_height);
}

// --- per-frame compositions ---

PointCloud convert_disparity(const DisparityMap& disparity, const CalibrationSet& calib,
                             const ConvertOptions& opts, ConvertStats* stats) {
  opts.filter.validate();
  DepthConvertOptions depth_opts = opts.depth;
  depth_opts.depth_ceiling = opts.filter.depth_ceiling;
  const CameraModel cam = calib.cam.with_image_size(disparity.width, disparity.height);

  DepthMap depth = disparity_to_depth(disparity, cam, depth_opts);
  if (opts.filter.min_depth > 0.0) {
    for (std::size_t i = 0; i < depth.size(); ++i)
      if (depth.valid[i] && depth.values[i] <= opts.filter.min_depth) {
        depth.values[i] = 0.0;
        depth.valid[i] = 0;
      }
  }

  PointCloud cloud = to_velodyne(backproject(depth, cam), calib);
  const std::size_t before = cloud.size();
  if (opts.apply_height_filter) cloud = height_filter(cloud, opts.filter);
  if (stats) {
    stats->valid_pixels = depth.valid_count();
    stats->points_out = cloud.size();
    stats->dropped_by_height = before - cloud.size();
  }
  return cloud;
}

std::vector<InstanceSpread> blur_study(const DepthMap& depth, const InstanceMask& mask,
                                       const CameraModel& cam, int kernel) {
  const CameraModel sized = cam.with_image_size(depth.width, depth.height);
  const DepthMap blurred = box_smooth(depth, kernel);
  const PointCloud before = backproject(depth, sized);
  const PointCloud after = backproject(blurred, sized);
  const auto labels = point_labels_from_mask(mask, depth);
  return spread_report(before, after, labels);
}

std::string spread_table(const std::vector<InstanceSpread>& rows) {
  std::string out =
      "instance\tpoints\tdx_before\tdy_before\tdz_before\tdx_after\tdy_after\tdz_after\t"
      "rx\try\trz\n";
  char buf[400];
  for (const InstanceSpread& r : rows) {
    std::snprintf(buf, sizeof(buf),
                  "%d\t%zu\t%.9f\t%.9f\t%.9f\t%.9f\t%.9f\t%.9f\t%.9f\t%.9f\t%.9f\n", r.instance,
                  r.point_count, r.extent_before.x, r.extent_before.y, r.extent_before.z,
                  r.extent_after.x, r.extent_after.y, r.extent_after.z, r.ratio.x, r.ratio.y,
                  r.ratio.z);
    out += buf;
  }
  return out;
}

// --- frame runner ---

namespace {

struct FrameLog {
  bool ok = true;
  std::string message;
};

/// Runs fn(i) for every frame with `jobs` workers. Output order and results
/// are independent of the worker count.
int run_frames(std::size_t count, const CommonOpts& common,
               const std::function<std::string(std::size_t)>& fn, std::ostream& log) {
  std::vector<FrameLog> logs(count);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count || stop.load()) return;
      try {
        logs[i].message = fn(i);
      } catch (const std::exception& e) {
        logs[i].ok = false;
        logs[i].message = e.what();
        if (!common.keep_going) stop.store(true);
      }
    }
  };

  const int jobs = std::max(1, common.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  bool any_failed = false;
  std::size_t done = 0;
  for (std::size_t i = 0; i < count; ++i) {
    if (logs[i].message.empty() && logs[i].ok) continue;  // skipped after stop
    if (logs[i].ok) {
      ++done;
      log << logs[i].message << '\n';
    } else {
      any_failed = true;
      log << "error: " << logs[i].message << '\n';
    }
  }
  log << done << "/" << count << " frames done\n";
  return any_failed ? 1 : 0;
}

}  // namespace

// --- directory commands ---

int cmd_convert(const ConvertCmd& cmd, std::ostream& log) {
  const auto stems = list_frame_stems(cmd.disparity_dir, ".png");
  return run_frames(
      stems.size(), cmd.common,
      [&](std::size_t i) {
        const std::string& stem = stems[i];
        const DisparityMap disparity =
            read_disparity_png(read_file(cmd.disparity_dir / (stem + ".png")));
        const CalibrationSet calib = cmd.calib.load(stem);
        ConvertStats stats;
        const PointCloud cloud = convert_disparity(disparity, calib, cmd.opts, &stats);
        write_file_atomic(cmd.common.out_dir / (stem + ".bin"), write_bin(cloud));
        char buf[200];
        std::snprintf(buf, sizeof(buf), "%s: %zu points (%zu valid px, %zu above height cut)",
                      stem.c_str(), stats.points_out, stats.valid_pixels,
                      stats.dropped_by_height);
        std::string msg = buf;
        if (stats.points_out == 0) msg += " [warning: empty cloud]";
        return msg;
      },
      log);
}

int cmd_plane(const PlaneCmd& cmd, std::ostream& log) {
  auto stems = list_frame_stems(cmd.input_dir, ".bin");
  bool from_bin = true;
  if (stems.empty()) {
    stems = list_frame_stems(cmd.input_dir, ".png");
    from_bin = false;
  }
  return run_frames(
      stems.size(), cmd.common,
      [&](std::size_t i) {
        const std::string& stem = stems[i];
        const CalibrationSet calib = cmd.calib.load(stem);
        PointCloud cam_cloud;
        if (from_bin) {
          const PointCloud velo =
              read_bin(read_file(cmd.input_dir / (stem + ".bin")), Frame::Velodyne);
          cam_cloud = to_camera(velo, calib);
        } else {
          const DisparityMap disparity =
              read_disparity_png(read_file(cmd.input_dir / (stem + ".png")));
          const CameraModel cam = calib.cam.with_image_size(disparity.width, disparity.height);
          cam_cloud = backproject(disparity_to_depth(disparity, cam, cmd.convert.depth), cam);
        }
        RansacOptions ransac = cmd.ransac;
        ransac.seed = cmd.common.seed;
        const GroundPlane plane = fit_ransac(gate_points(cam_cloud, cmd.gate), ransac);
        write_file_atomic(cmd.common.out_dir / (stem + ".txt"), write_plane_file(plane));
        char buf[200];
        std::snprintf(buf, sizeof(buf), "%s: normal (%.4f %.4f %.4f) h %.4f, %zu inliers",
                      stem.c_str(), plane.normal.x, plane.normal.y, plane.normal.z, plane.offset,
                      plane.inlier_count);
        return std::string(buf);
      },
      log);
}

int cmd_bev(const BevCmd& cmd, std::ostream& log) {
  const auto stems = list_frame_stems(cmd.bin_dir, ".bin");
  cmd.config.validate();
  return run_frames(
      stems.size(), cmd.common,
      [&](std::size_t i) {
        const std::string& stem = stems[i];
        const PointCloud cloud = read_bin(read_file(cmd.bin_dir / (stem + ".bin")));
        const BevRaster raster = rasterize(cloud, cmd.config);
        write_file_atomic(cmd.common.out_dir / (stem + ".plbv"), write_bev(raster.tensor));
        if (cmd.write_pgm)
          for (int c = 0; c < raster.tensor.channels; ++c)
            write_file_atomic(cmd.common.out_dir / (stem + ".c" + std::to_string(c) + ".pgm"),
                              bev_channel_to_pgm(raster.tensor, c));
        char buf[200];
        std::snprintf(buf, sizeof(buf), "%s: %zu in range, %zu dropped", stem.c_str(),
                      raster.in_range, raster.dropped);
        return std::string(buf);
      },
      log);
}

int cmd_gtdisp(const GtDispCmd& cmd, std::ostream& log) {
  const auto stems = list_frame_stems(cmd.velodyne_dir, ".bin");
  return run_frames(
      stems.size(), cmd.common,
      [&](std::size_t i) {
        const std::string& stem = stems[i];
        const PointCloud velo = read_bin(read_file(cmd.velodyne_dir / (stem + ".bin")));
        const CalibrationSet calib = cmd.calib.load(stem);
        const DisparityMap disparity = pseudo_disparity_gt(
            velo, calib, cmd.calib.image_width, cmd.calib.image_height, cmd.common.seed);
        write_file_atomic(cmd.common.out_dir / (stem + ".png"), write_disparity_png(disparity));
        char buf[200];
        std::snprintf(buf, sizeof(buf), "%s: %zu pixels covered", stem.c_str(),
                      disparity.valid_count());
        return std::string(buf);
      },
      log);
}

int cmd_eval(const EvalCmd& cmd, std::ostream& log) {
  const auto gt_stems = list_frame_stems(cmd.gt_dir, ".txt");
  std::map<std::string, std::vector<GtObject>> gts;
  std::map<std::string, std::vector<Detection>> dets;
  for (const std::string& stem : gt_stems)
    gts[stem] = parse_kitti_label(read_text_file(cmd.gt_dir / (stem + ".txt"))).gts;
  for (const std::string& stem : list_frame_stems(cmd.det_dir, ".txt"))
    dets[stem] = parse_kitti_label(read_text_file(cmd.det_dir / (stem + ".txt"))).dets;

  const EvalReport report = evaluate_frames(gts, dets, cmd.config);
  if (cmd.format == "tsv")
    log << report.to_tsv();
  else if (cmd.format == "json")
    log << report.to_json();
  else
    log << report.to_table();
  if (!cmd.report_path.empty()) write_file_atomic(cmd.report_path, report.to_tsv());
  return 0;
}

int cmd_blur_study(const BlurStudyCmd& cmd, std::ostream& log) {
  auto stems = list_frame_stems(cmd.input_dir, ".pldm");
  bool from_depth = true;
  if (stems.empty()) {
    stems = list_frame_stems(cmd.input_dir, ".png");
    from_depth = false;
  }
  return run_frames(
      stems.size(), cmd.common,
      [&](std::size_t i) {
        const std::string& stem = stems[i];
        const CalibrationSet calib = cmd.calib.load(stem);
        DepthMap depth;
        if (from_depth) {
          depth = read_depth_pldm(read_file(cmd.input_dir / (stem + ".pldm")));
        } else {
          const DisparityMap disparity =
              read_disparity_png(read_file(cmd.input_dir / (stem + ".png")));
          depth = disparity_to_depth(
              disparity, calib.cam.with_image_size(disparity.width, disparity.height));
        }
        fs::path mask_path = cmd.mask_dir / (stem + "_mask.png");
        if (!fs::exists(mask_path)) mask_path = cmd.mask_dir / (stem + ".png");
        const Png16 mask_img = read_png16(read_file(mask_path));
        InstanceMask mask;
        mask.width = mask_img.width;
        mask.height = mask_img.height;
        mask.labels.assign(mask_img.pixels.begin(), mask_img.pixels.end());

        const CameraModel cam = calib.cam.with_image_size(depth.width, depth.height);
        const auto rows = blur_study(depth, mask, cam, cmd.kernel);
        write_file_atomic(cmd.common.out_dir / (stem + "_spread.tsv"), spread_table(rows));
        if (cmd.export_clouds) {
          write_file_atomic(cmd.common.out_dir / (stem + "_before.bin"),
                            write_bin(backproject(depth, cam)));
          write_file_atomic(cmd.common.out_dir / (stem + "_after.bin"),
                            write_bin(backproject(box_smooth(depth, cmd.kernel), cam)));
        }
        char buf[200];
        std::snprintf(buf, sizeof(buf), "%s: %zu instances measured", stem.c_str(), rows.size());
        return std::string(buf);
      },
      log);
}

// Outputs land in per-artifact subdirectories so they can feed the other
// subcommands directly (convert --disparity-dir <out>/disparity, ...).
int cmd_synth(const SynthCmd& cmd, std::ostream& log) {
  const SceneSpec spec = parse_scene_spec(read_text_file(cmd.scene_file));
  const RenderResult rendered = render(spec, cmd.common.seed);
  const std::string& stem = cmd.frame_id;
  const fs::path& out = cmd.common.out_dir;

  write_file_atomic(out / "depth" / (stem + ".pldm"), write_depth_pldm(rendered.depth));

  Png16 mask_img;
  mask_img.width = rendered.mask.width;
  mask_img.height = rendered.mask.height;
  mask_img.pixels.reserve(rendered.mask.size());
  for (std::int32_t label : rendered.mask.labels)
    mask_img.pixels.push_back(static_cast<std::uint16_t>(std::max(0, label)));
  write_file_atomic(out / "mask" / (stem + ".png"), write_png16(mask_img));

  write_file_atomic(out / "label" / (stem + ".txt"), write_kitti_label(rendered.labels));

  const CameraModel& cam = spec.camera;
  write_file_atomic(out / "disparity" / (stem + ".png"),
                    write_disparity_png(depth_to_disparity(rendered.depth, cam)));
  const PointCloud cloud = to_velodyne(backproject(rendered.depth, cam), spec.calib);
  write_file_atomic(out / "velodyne" / (stem + ".bin"), write_bin(cloud));

  log << stem << ": " << rendered.depth.valid_count() << " valid px, " << rendered.labels.size()
      << " objects\n";
  return 0;
}

}  // namespace plc::pipeline
