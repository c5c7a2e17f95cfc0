// Copyright (c) the plcloud authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "plc/bev.hpp"
#include "plc/boxeval.hpp"
#include "plc/calib.hpp"
#include "plc/cloud.hpp"
#include "plc/depthmap.hpp"
#include "plc/groundplane.hpp"
#include "plc/synth.hpp"

namespace plc::pipeline {

// --- file helpers (atomic writes: temp file + rename) ---

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);
void write_file_atomic(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

/// Sorted stems of the files in `dir` carrying `extension` (".png", ".bin", ...).
std::vector<std::string> list_frame_stems(const std::filesystem::path& dir,
                                          std::string_view extension);

/// Per-frame calibration: a directory of `<stem>.txt` files or one shared file.
struct CalibSource {
  std::filesystem::path dir;         // used when `file` is empty
  std::filesystem::path file;
  int image_width = 1242;
  int image_height = 375;

  CalibrationSet load(const std::string& stem) const;
};

// --- per-frame compositions ---

struct ConvertOptions {
  DepthConvertOptions depth;
  CloudFilterConfig filter;
  bool apply_height_filter = true;
};

struct ConvertStats {
  std::size_t valid_pixels = 0;
  std::size_t points_out = 0;
  std::size_t dropped_by_height = 0;
};

/// disparity -> depth -> pseudo-LiDAR -> Velodyne frame -> height filter.
PointCloud convert_disparity(const DisparityMap& disparity, const CalibrationSet& calib,
                             const ConvertOptions& opts, ConvertStats* stats = nullptr);

/// Blurs the depth map, back-projects both versions and measures per-instance
/// spread.
std::vector<InstanceSpread> blur_study(const DepthMap& depth, const InstanceMask& mask,
                                       const CameraModel& cam, int kernel);

std::string spread_table(const std::vector<InstanceSpread>& rows);

// --- directory commands (the CLI wraps these 1:1) ---

struct CommonOpts {
  std::filesystem::path out_dir;
  int jobs = 1;
  bool keep_going = false;
  std::uint64_t seed = 0;
};

struct ConvertCmd {
  std::filesystem::path disparity_dir;
  CalibSource calib;
  ConvertOptions opts;
  CommonOpts common;
};

struct PlaneCmd {
  std::filesystem::path input_dir;  // *.bin clouds or *.png disparities
  CalibSource calib;
  PlaneRegionGate gate;
  RansacOptions ransac;
  ConvertOptions convert;  // used for the disparity route
  CommonOpts common;
};

struct BevCmd {
  std::filesystem::path bin_dir;
  BevConfig config;
  bool write_pgm = false;
  CommonOpts common;
};

struct GtDispCmd {
  std::filesystem::path velodyne_dir;
  CalibSource calib;
  CommonOpts common;
};

struct EvalCmd {
  std::filesystem::path gt_dir;
  std::filesystem::path det_dir;
  EvalConfig config;
  std::filesystem::path report_path;  // optional TSV output
  std::string format = "table";       // table | tsv | json
};

struct BlurStudyCmd {
  std::filesystem::path input_dir;  // *.pldm depth or *.png disparity
  std::filesystem::path mask_dir;   // <stem>_mask.png or <stem>.png
  CalibSource calib;
  int kernel = 11;
  bool export_clouds = true;
  CommonOpts common;
};

struct SynthCmd {
  std::filesystem::path scene_file;
  std::string frame_id = "000000";
  CommonOpts common;
};

// All return a process exit code: 0 = success, 1 = at least one frame failed.
// Configuration problems (missing dirs, bad flags) throw instead.
int cmd_convert(const ConvertCmd& cmd, std::ostream& log);
int cmd_plane(const PlaneCmd& cmd, std::ostream& log);
int cmd_bev(const BevCmd& cmd, std::ostream& log);
int cmd_gtdisp(const GtDispCmd& cmd, std::ostream& log);
int cmd_eval(const EvalCmd& cmd, std::ostream& log);
int cmd_blur_study(const BlurStudyCmd& cmd, std::ostream& log);
int cmd_synth(const SynthCmd& cmd, std::ostream& log);

}  // namespace plc::pipeline
