// Copyright (c) the plcloud authors
// SPDX-License-Identifier: Apache-2.0
#include "plc/boxeval.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "plc/error.hpp"

namespace plc {

namespace {

constexpr std::array<std::pair<std::string_view, ObjectClass>, 9> kClassNames{{
    {"Car", ObjectClass::Car},
    {"Van", ObjectClass::Van},
    {"Truck", ObjectClass::Truck},
    {"Pedestrian", ObjectClass::Pedestrian},
    {"Person_sitting", ObjectClass::PersonSitting},
    {"Cyclist", ObjectClass::Cyclist},
    {"Tram", ObjectClass::Tram},
    {"Misc", ObjectClass::Misc},
    {"DontCare", ObjectClass::DontCare},
}};

}  // namespace

ObjectClass object_class_from(std::string_view name) {
  for (const auto& [n, c] : kClassNames)
    if (n == name) return c;
  return ObjectClass::Other;
}

const char* object_class_name(ObjectClass cls) {
  for (const auto& [n, c] : kClassNames)
    if (c == cls) return n.data();
  return "Other";
}

void Box3D::validate() const {
  if (!(h > 0.0) || !(w > 0.0) || !(l > 0.0))
    throw_error(Errc::InvalidArgument, "box dimensions must be positive");
  if (!(rotation_y > -M_PI - 1e-9) || !(rotation_y <= M_PI + 1e-9))
    throw_error(Errc::InvalidArgument, "rotation_y outside (-pi, pi]");
}

// --- label parsing -----------------------------------------------------------

LabelFile parse_kitti_label(std::string_view text) {
  LabelFile out;
  std::istringstream stream{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    std::istringstream row(line);
    std::vector<std::string> tokens;
    std::string tok;
    while (row >> tok) tokens.push_back(tok);
    if (tokens.empty()) continue;
    if (tokens.size() != 15 && tokens.size() != 16)
      throw_error(Errc::FieldCount, "line " + std::to_string(line_no) + ": got " +
                                        std::to_string(tokens.size()) + " fields, expected 15 or 16");
    std::array<double, 15> num{};
    for (std::size_t f = 1; f < tokens.size(); ++f) {
      const std::string& t = tokens[f];
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
      if (ec != std::errc{} || ptr != t.data() + t.size())
        throw_error(Errc::BadNumber,
                    "line " + std::to_string(line_no) + ", field " + std::to_string(f + 1) +
                        ": '" + t + "'");
      num[f - 1] = v;
    }

    GtObject obj;
    obj.type = tokens[0];
    obj.cls = object_class_from(tokens[0]);
    obj.truncation = num[0];
    obj.occlusion = static_cast<int>(std::lround(num[1]));
    obj.alpha = num[2];
    obj.bbox_left = num[3];
    obj.bbox_top = num[4];
    obj.bbox_right = num[5];
    obj.bbox_bottom = num[6];
    obj.box.h = num[7];
    obj.box.w = num[8];
    obj.box.l = num[9];
    obj.box.x = num[10];
    obj.box.y = num[11];
    obj.box.z = num[12];
    obj.box.rotation_y = num[13];

    if (tokens.size() == 16) {
      Detection det;
      det.box = obj.box;
      det.cls = obj.cls;
      det.score = num[14];
      out.dets.push_back(det);
    } else {
      out.gts.push_back(std::move(obj));
    }
  }
  return out;
}

std::string format_kitti_line(const GtObject& obj, std::optional<double> score) {
  char buf[512];
  int n = std::snprintf(buf, sizeof(buf),
                        "%s %.2f %d %.2f %.2f %.2f %.2f %.2f %.2f %.2f %.2f %.2f %.2f %.2f %.2f",
                        obj.type.c_str(), obj.truncation, obj.occlusion, obj.alpha, obj.bbox_left,
                        obj.bbox_top, obj.bbox_right, obj.bbox_bottom, obj.box.h, obj.box.w,
                        obj.box.l, obj.box.x, obj.box.y, obj.box.z, obj.box.rotation_y);
  std::string line(buf, static_cast<std::size_t>(n));
  if (score) {
    std::snprintf(buf, sizeof(buf), " %.6f", *score);
    line += buf;
  }
  return line;
}

std::string write_kitti_label(std::span<const GtObject> objects) {
  std::string out;
  for (const GtObject& obj : objects) {
    out += format_kitti_line(obj);
    out += '\n';
  }
  return out;
}

std::string format_kitti_detection(const Detection& det) {
  GtObject shell;
  shell.type = object_class_name(det.cls);
  shell.truncation = -1.0;
  shell.occlusion = -1;
  shell.alpha = -10.0;
  shell.bbox_left = shell.bbox_top = shell.bbox_right = shell.bbox_bottom = -1.0;
  shell.box = det.box;
  return format_kitti_line(shell, det.score);
}

// --- difficulty --------------------------------------------------------------

const char* difficulty_name(Difficulty d) {
  switch (d) {
    case Difficulty::Easy: return "Easy";
    case Difficulty::Moderate: return "Moderate";
    case Difficulty::Hard: return "Hard";
    case Difficulty::Ignored: return "Ignored";
  }
  return "?";
}

Difficulty classify_difficulty(const GtObject& gt) {
  const double height = gt.bbox2d_height();
  if (height >= 40.0 && gt.occlusion <= 0 && gt.truncation <= 0.15) return Difficulty::Easy;
  if (height >= 25.0 && gt.occlusion <= 1 && gt.truncation <= 0.30) return Difficulty::Moderate;
  if (height >= 25.0 && gt.occlusion <= 2 && gt.truncation <= 0.50) return Difficulty::Hard;
  return Difficulty::Ignored;
}

// --- rotated-footprint geometry ----------------------------------------------

namespace {

struct P2d {
  double x = 0.0;
  double y = 0.0;
};

double cross(const P2d& o, const P2d& a, const P2d& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Ground-plane footprint in (x, z), counter-clockwise.
std::array<P2d, 4> footprint(const Box3D& b) {
  const double c = std::cos(b.rotation_y);
  const double s = std::sin(b.rotation_y);
  const double l2 = b.l / 2.0;
  const double w2 = b.w / 2.0;
  const std::array<std::array<double, 2>, 4> local{{{l2, w2}, {-l2, w2}, {-l2, -w2}, {l2, -w2}}};
  std::array<P2d, 4> out;
  for (std::size_t i = 0; i < 4; ++i) {
    const double dx = local[i][0];
    const double dz = local[i][1];
    out[i] = {b.x + dx * c + dz * s, b.z - dx * s + dz * c};
  }
  return out;
}

double shoelace_area(const std::vector<P2d>& poly) {
  if (poly.size() < 3) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const P2d& a = poly[i];
    const P2d& b = poly[(i + 1) % poly.size()];
    sum += a.x * b.y - b.x * a.y;
  }
  return std::fabs(sum) / 2.0;
}

// Sutherland-Hodgman: clip `poly` against the half-plane left of (e0 -> e1).
std::vector<P2d> clip_edge(const std::vector<P2d>& poly, const P2d& e0, const P2d& e1) {
  std::vector<P2d> out;
  out.reserve(poly.size() + 2);
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const P2d& cur = poly[i];
    const P2d& nxt = poly[(i + 1) % poly.size()];
    const double dc = cross(e0, e1, cur);
    const double dn = cross(e0, e1, nxt);
    if (dc >= 0.0) out.push_back(cur);
    if ((dc >= 0.0) != (dn >= 0.0)) {
      const double t = dc / (dc - dn);
      out.push_back({cur.x + t * (nxt.x - cur.x), cur.y + t * (nxt.y - cur.y)});
    }
  }
  return out;
}

double footprint_intersection_area(const Box3D& a, const Box3D& b) {
  if (a.l <= 0.0 || a.w <= 0.0 || b.l <= 0.0 || b.w <= 0.0) return 0.0;
  const auto fa = footprint(a);
  const auto fb = footprint(b);
  std::vector<P2d> poly(fa.begin(), fa.end());
  for (std::size_t i = 0; i < 4 && !poly.empty(); ++i)
    poly = clip_edge(poly, fb[i], fb[(i + 1) % 4]);
  return shoelace_area(poly);
}

double vertical_overlap(const Box3D& a, const Box3D& b) {
  const double top = std::max(a.y - a.h, b.y - b.h);
  const double bottom = std::min(a.y, b.y);
  return std::max(0.0, bottom - top);
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

double bev_iou(const Box3D& a, const Box3D& b) {
  const double inter = footprint_intersection_area(a, b);
  if (inter <= 0.0) return 0.0;
  const double uni = a.footprint_area() + b.footprint_area() - inter;
  if (uni <= 0.0) return 0.0;
  return clamp01(inter / uni);
}

double iou_3d(const Box3D& a, const Box3D& b) {
  if (a.h <= 0.0 || b.h <= 0.0) return 0.0;
  const double inter = footprint_intersection_area(a, b) * vertical_overlap(a, b);
  if (inter <= 0.0) return 0.0;
  const double uni = a.volume() + b.volume() - inter;
  if (uni <= 0.0) return 0.0;
  return clamp01(inter / uni);
}

const char* metric_name(EvalMetric m) { return m == EvalMetric::Bev ? "AP_BEV" : "AP_3D"; }

OverlapFns overlap_fns(EvalMetric metric) {
  if (metric == EvalMetric::Bev) {
    return {
        [](const Box3D& a, const Box3D& b) { return bev_iou(a, b); },
        [](const Box3D& det, const Box3D& dc) {
          if (det.footprint_area() <= 0.0) return 0.0;
          return clamp01(footprint_intersection_area(det, dc) / det.footprint_area());
        },
    };
  }
  return {
      [](const Box3D& a, const Box3D& b) { return iou_3d(a, b); },
      [](const Box3D& det, const Box3D& dc) {
        if (det.volume() <= 0.0) return 0.0;
        const double inter = footprint_intersection_area(det, dc) * vertical_overlap(det, dc);
        return clamp01(inter / det.volume());
      },
  };
}

// --- average precision -------------------------------------------------------

namespace {

struct ScoredOutcome {
  double score = 0.0;
  bool tp = false;
};

double interpolate_ap(const std::vector<std::pair<double, double>>& pr_points, ApInterp mode) {
  const int samples = mode == ApInterp::Interp11 ? 11 : 40;
  double sum = 0.0;
  for (int i = 0; i < samples; ++i) {
    // 11-point grid starts at recall 0, the 40-point grid at 1/40
    const double r = mode == ApInterp::Interp11 ? i / 10.0 : (i + 1) / 40.0;
    double best = 0.0;
    for (const auto& [recall, precision] : pr_points)
      if (recall + 1e-12 >= r) best = std::max(best, precision);
    sum += best;
  }
  return 100.0 * sum / samples;
}

}  // namespace

double average_precision(std::span<const std::vector<GtObject>> gts_per_frame,
                         std::span<const std::vector<Detection>> dets_per_frame, ObjectClass cls,
                         Difficulty difficulty, const OverlapFns& fns, double iou_threshold,
                         ApInterp mode) {
  if (gts_per_frame.size() != dets_per_frame.size())
    throw_error(Errc::FrameMismatch, "per-frame lists differ in length");
  if (cls == ObjectClass::DontCare || cls == ObjectClass::Other)
    throw_error(Errc::UnknownClass, "cannot evaluate this class");

  enum class GtKind { Counted, IgnoredGt, DontCare, OtherClass };

  std::size_t n_pos = 0;
  std::vector<ScoredOutcome> records;

  for (std::size_t f = 0; f < gts_per_frame.size(); ++f) {
    const auto& gts = gts_per_frame[f];
    const auto& dets = dets_per_frame[f];

    std::vector<GtKind> kind(gts.size());
    for (std::size_t j = 0; j < gts.size(); ++j) {
      if (gts[j].dont_care())
        kind[j] = GtKind::DontCare;
      else if (gts[j].cls != cls)
        kind[j] = GtKind::OtherClass;
      else if (static_cast<int>(classify_difficulty(gts[j])) <= static_cast<int>(difficulty))
        kind[j] = GtKind::Counted;
      else
        kind[j] = GtKind::IgnoredGt;
      if (kind[j] == GtKind::Counted) ++n_pos;
    }

    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < dets.size(); ++i)
      if (dets[i].cls == cls) order.push_back(i);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });

    std::vector<char> matched(gts.size(), 0);
    for (std::size_t i : order) {
      const Detection& det = dets[i];
      std::ptrdiff_t best = -1;
      double best_iou = 0.0;
      for (std::size_t j = 0; j < gts.size(); ++j) {
        if (matched[j] || kind[j] == GtKind::DontCare || kind[j] == GtKind::OtherClass) continue;
        const double o = fns.iou(det.box, gts[j].box);
        if (o >= iou_threshold && o > best_iou) {
          best_iou = o;
          best = static_cast<std::ptrdiff_t>(j);
        }
      }
      if (best >= 0) {
        matched[static_cast<std::size_t>(best)] = 1;
        if (kind[static_cast<std::size_t>(best)] == GtKind::Counted)
          records.push_back({det.score, true});
        // a match to an ignored ground truth is neither TP nor FP
        continue;
      }
      bool suppressed = false;
      for (std::size_t j = 0; j < gts.size() && !suppressed; ++j)
        if (kind[j] == GtKind::DontCare &&
            fns.over_detection(det.box, gts[j].box) >= iou_threshold)
          suppressed = true;
      if (!suppressed) records.push_back({det.score, false});
    }
  }

  if (n_pos == 0) return 0.0;

  // global score sweep; stable sort keeps (frame, score-rank) order on ties
  std::stable_sort(records.begin(), records.end(),
                   [](const ScoredOutcome& a, const ScoredOutcome& b) { return a.score > b.score; });

  std::vector<std::pair<double, double>> pr_points;
  pr_points.reserve(records.size());
  std::size_t tp = 0, fp = 0;
  for (const ScoredOutcome& rec : records) {
    rec.tp ? ++tp : ++fp;
    pr_points.emplace_back(static_cast<double>(tp) / static_cast<double>(n_pos),
                           static_cast<double>(tp) / static_cast<double>(tp + fp));
  }
  return interpolate_ap(pr_points, mode);
}

double average_precision(std::span<const std::vector<GtObject>> gts_per_frame,
                         std::span<const std::vector<Detection>> dets_per_frame, ObjectClass cls,
                         Difficulty difficulty, EvalMetric metric, double iou_threshold,
                         ApInterp mode) {
  return average_precision(gts_per_frame, dets_per_frame, cls, difficulty, overlap_fns(metric),
                           iou_threshold, mode);
}

// --- whole-dataset evaluation ------------------------------------------------

EvalReport evaluate_frames(const std::map<std::string, std::vector<GtObject>>& gts,
                           const std::map<std::string, std::vector<Detection>>& dets,
                           const EvalConfig& config) {
  if (gts.size() != dets.size())
    throw_error(Errc::FrameMismatch, "ground truth has " + std::to_string(gts.size()) +
                                         " frames, detections have " + std::to_string(dets.size()));
  std::vector<std::vector<GtObject>> gt_frames;
  std::vector<std::vector<Detection>> det_frames;
  auto git = gts.begin();
  auto dit = dets.begin();
  for (; git != gts.end(); ++git, ++dit) {
    if (git->first != dit->first)
      throw_error(Errc::FrameMismatch, "frame '" + git->first + "' vs '" + dit->first + "'");
    gt_frames.push_back(git->second);
    det_frames.push_back(dit->second);
  }

  EvalReport report;
  report.mode = config.mode;
  for (ObjectClass cls : config.classes)
    for (double thr : config.iou_thresholds)
      for (EvalMetric metric : {EvalMetric::Bev, EvalMetric::Box3D})
        for (Difficulty d : {Difficulty::Easy, Difficulty::Moderate, Difficulty::Hard}) {
          EvalEntry e;
          e.cls = cls;
          e.difficulty = d;
          e.metric = metric;
          e.iou_threshold = thr;
          e.ap = average_precision(gt_frames, det_frames, cls, d, metric, thr, config.mode);
          report.entries.push_back(e);
        }
  return report;
}

double EvalReport::ap(ObjectClass cls, Difficulty d, EvalMetric m, double iou_threshold) const {
  for (const EvalEntry& e : entries)
    if (e.cls == cls && e.difficulty == d && e.metric == m &&
        std::fabs(e.iou_threshold - iou_threshold) < 1e-9)
      return e.ap;
  throw_error(Errc::InvalidArgument, "no such report entry");
}

std::string EvalReport::to_tsv() const {
  std::string out = "class\tdifficulty\tmetric\tiou\tap\n";
  char buf[160];
  for (const EvalEntry& e : entries) {
    std::snprintf(buf, sizeof(buf), "%s\t%s\t%s\t%.2f\t%.4f\n", object_class_name(e.cls),
                  difficulty_name(e.difficulty), metric_name(e.metric), e.iou_threshold, e.ap);
    out += buf;
  }
  return out;
}

std::string EvalReport::to_json() const {
  std::string out = "[\n";
  char buf[240];
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const EvalEntry& e = entries[i];
    std::snprintf(buf, sizeof(buf),
                  "  {\"class\": \"%s\", \"difficulty\": \"%s\", \"metric\": \"%s\", "
                  "\"iou\": %.2f, \"ap\": %.4f}%s\n",
                  object_class_name(e.cls), difficulty_name(e.difficulty), metric_name(e.metric),
                  e.iou_threshold, e.ap, i + 1 < entries.size() ? "," : "");
    out += buf;
  }
  out += "]\n";
  return out;
}

std::string EvalReport::to_table() const {
  std::string out;
  char buf[200];
  for (const EvalEntry& probe : entries) {
    if (probe.difficulty != Difficulty::Easy || probe.metric != EvalMetric::Bev) continue;
    std::snprintf(buf, sizeof(buf), "%s  IoU=%.2f  (AP_BEV / AP_3D, %s)\n",
                  object_class_name(probe.cls), probe.iou_threshold,
                  mode == ApInterp::Interp11 ? "11-point" : "40-point");
    out += buf;
    out += "  Easy          Moderate      Hard\n  ";
    for (Difficulty d : {Difficulty::Easy, Difficulty::Moderate, Difficulty::Hard}) {
      std::snprintf(buf, sizeof(buf), "%5.2f / %5.2f  ",
                    ap(probe.cls, d, EvalMetric::Bev, probe.iou_threshold),
                    ap(probe.cls, d, EvalMetric::Box3D, probe.iou_threshold));
      out += buf;
    }
    out += "\n";
  }
  return out;
}

}  // namespace plc
