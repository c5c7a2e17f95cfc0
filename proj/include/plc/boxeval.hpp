// Copyright (c) the plcloud authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "plc/geometry.hpp"

namespace plc {

enum class ObjectClass {
  Car,
  Van,
  Truck,
  Pedestrian,
  PersonSitting,
  Cyclist,
  Tram,
  Misc,
  DontCare,
  Other,
};

ObjectClass object_class_from(std::string_view name);
const char* object_class_name(ObjectClass cls);

/// Oriented 3D box, camera-rect frame, KITTI conventions: the center sits at
/// the bottom face (y grows downward), dims are (height, width, length),
/// rotation about the vertical axis.
struct Box3D {
  double x = 0.0, y = 0.0, z = 0.0;  // m
  double h = 0.0, w = 0.0, l = 0.0;  // m
  double rotation_y = 0.0;           // rad, in (-pi, pi]

  double volume() const { return h * w * l; }
  double footprint_area() const { return w * l; }
  void validate() const;
};

/// One KITTI label row (15 fields).
struct GtObject {
  std::string type;  // raw class token from the file
  ObjectClass cls = ObjectClass::Other;
  double truncation = 0.0;  // [0,1]
  int occlusion = 0;        // {0,1,2,3}
  double alpha = 0.0;
  double bbox_left = 0.0, bbox_top = 0.0, bbox_right = 0.0, bbox_bottom = 0.0;
  Box3D box;

  double bbox2d_height() const { return bbox_bottom - bbox_top; }
  bool dont_care() const { return cls == ObjectClass::DontCare; }
};

struct Detection {
  Box3D box;
  ObjectClass cls = ObjectClass::Car;
  double score = 0.0;
};

struct LabelFile {
  std::vector<GtObject> gts;        // 15-field rows
  std::vector<Detection> dets;      // 16-field rows (score present)
};

/// Parses KITTI label text; rows with a 16th field become detections.
/// DontCare rows are preserved in `gts` (flagged through their class).
LabelFile parse_kitti_label(std::string_view text);

std::string format_kitti_line(const GtObject& obj, std::optional<double> score = std::nullopt);
std::string write_kitti_label(std::span<const GtObject> objects);
/// Detection row with placeholder 2D/score-independent fields.
std::string format_kitti_detection(const Detection& det);

enum class Difficulty { Easy, Moderate, Hard, Ignored };

const char* difficulty_name(Difficulty d);

/// KITTI devkit tiers from 2D box height, occlusion and truncation.
Difficulty classify_difficulty(const GtObject& gt);

/// IoU of the rotated ground-plane footprints (convex polygon clipping).
double bev_iou(const Box3D& a, const Box3D& b);

/// Volume IoU: footprint intersection times vertical overlap of [y-h, y].
double iou_3d(const Box3D& a, const Box3D& b);

enum class EvalMetric { Bev, Box3D };
enum class ApInterp { Interp11, Interp40 };

const char* metric_name(EvalMetric m);

struct OverlapFns {
  // symmetric IoU used for matching
  std::function<double(const Box3D&, const Box3D&)> iou;
  // overlap normalized by the first (detection) box, for DontCare suppression
  std::function<double(const Box3D&, const Box3D&)> over_detection;
};

OverlapFns overlap_fns(EvalMetric metric);

/// Interpolated average precision (percent) over index-aligned per-frame
/// ground-truth/detection lists. Detections are processed in descending score
/// order (input order breaks ties) and greedily match the unmatched same-class
/// ground truth of highest IoU >= threshold. Ground truths harder than the
/// requested difficulty match detections without counting; DontCare overlap
/// suppresses would-be false positives.
double average_precision(std::span<const std::vector<GtObject>> gts_per_frame,
                         std::span<const std::vector<Detection>> dets_per_frame, ObjectClass cls,
                         Difficulty difficulty, const OverlapFns& fns, double iou_threshold,
                         ApInterp mode);

double average_precision(std::span<const std::vector<GtObject>> gts_per_frame,
                         std::span<const std::vector<Detection>> dets_per_frame, ObjectClass cls,
                         Difficulty difficulty, EvalMetric metric, double iou_threshold,
                         ApInterp mode);

struct EvalConfig {
  std::vector<ObjectClass> classes{ObjectClass::Car};
  std::vector<double> iou_thresholds{0.5, 0.7};
  ApInterp mode = ApInterp::Interp11;
};

struct EvalEntry {
  ObjectClass cls = ObjectClass::Car;
  Difficulty difficulty = Difficulty::Easy;
  EvalMetric metric = EvalMetric::Bev;
  double iou_threshold = 0.0;
  double ap = 0.0;  // percent
};

struct EvalReport {
  ApInterp mode = ApInterp::Interp11;
  std::vector<EvalEntry> entries;

  double ap(ObjectClass cls, Difficulty d, EvalMetric m, double iou_threshold) const;
  std::string to_tsv() const;
  std::string to_json() const;
  /// AP_BEV / AP_3D table, one block per (class, IoU threshold).
  std::string to_table() const;
};

/// Runs both metrics at every configured threshold and difficulty. Frame key
/// sets of the two maps must match exactly.
EvalReport evaluate_frames(const std::map<std::string, std::vector<GtObject>>& gts,
                           const std::map<std::string, std::vector<Detection>>& dets,
                           const EvalConfig& config = {});

}  // namespace plc
