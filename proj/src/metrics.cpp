#include "pedrecon/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace pedrecon {

double intersection_area(const BBox& a, const BBox& b) {
  const double w = std::min(a.right(), b.right()) - std::max(a.x, b.x);
  const double h = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
  return w > 0.0 && h > 0.0 ? w * h : 0.0;
}

double iou(const BBox& a, const BBox& b) {
  const double inter = intersection_area(a, b);
  if (inter <= 0.0) return 0.0;
  return inter / (a.area() + b.area() - inter);
}

double crossover(const BBox& gt, const BBox& est, bool relative_to_estimate) {
  const double denom = relative_to_estimate ? est.area() : gt.area();
  return denom > 0.0 ? intersection_area(gt, est) / denom : 0.0;
}

namespace {

// Fractions are relative to the total GT area; with no GT they stay 0.
void finalize_areas(MatchReport& r) {
  if (!(r.gt_area_total > 0.0)) {
    r.tp_area = r.fp_area = r.fn_area = 0.0;
    return;
  }
  r.tp_area = r.overlap_area_total / r.gt_area_total;
  r.fp_area = (r.est_area_total - r.overlap_area_total) / r.gt_area_total;
  r.fn_area = (r.gt_area_total - r.overlap_area_total) / r.gt_area_total;
}

}  // namespace

MatchReport match_boxes(std::span<const BBox> gt, std::span<const BBox> est, double iou_threshold) {
  require(iou_threshold > 0.0 && iou_threshold <= 1.0, "IoU threshold must lie in (0, 1]");

  std::vector<BoxMatch> candidates;
  for (std::size_t g = 0; g < gt.size(); ++g)
    for (std::size_t e = 0; e < est.size(); ++e) {
      const double overlap = iou(gt[g], est[e]);
      if (overlap >= iou_threshold) candidates.push_back({g, e, overlap});
    }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const BoxMatch& a, const BoxMatch& b) { return a.iou > b.iou; });

  MatchReport report;
  std::vector<bool> gt_used(gt.size(), false);
  std::vector<bool> est_used(est.size(), false);
  for (const auto& c : candidates) {
    if (gt_used[c.gt] || est_used[c.est]) continue;
    gt_used[c.gt] = est_used[c.est] = true;
    report.matches.push_back(c);
  }
  report.true_positives = report.matches.size();
  report.false_positives = est.size() - report.true_positives;
  report.false_negatives = gt.size() - report.true_positives;

  for (const auto& g : gt) report.gt_area_total += g.area();
  for (const auto& e : est) report.est_area_total += e.area();
  for (const auto& m : report.matches) report.overlap_area_total += intersection_area(gt[m.gt], est[m.est]);
  finalize_areas(report);
  return report;
}

MatchReport merge(const MatchReport& a, const MatchReport& b) {
  MatchReport out;
  out.true_positives = a.true_positives + b.true_positives;
  out.false_positives = a.false_positives + b.false_positives;
  out.false_negatives = a.false_negatives + b.false_negatives;
  out.matches = a.matches;
  out.matches.insert(out.matches.end(), b.matches.begin(), b.matches.end());
  out.gt_area_total = a.gt_area_total + b.gt_area_total;
  out.est_area_total = a.est_area_total + b.est_area_total;
  out.overlap_area_total = a.overlap_area_total + b.overlap_area_total;
  finalize_areas(out);
  return out;
}

std::vector<BBox> filter_min_size(std::span<const BBox> boxes, double min_w, double min_h) {
  std::vector<BBox> out;
  std::copy_if(boxes.begin(), boxes.end(), std::back_inserter(out),
               [&](const BBox& b) { return b.w >= min_w && b.h >= min_h; });
  return out;
}

BBox enlarge_bbox(const BBox& box, double fraction, int width, int height) {
  require(fraction >= 0.0, "enlargement fraction must be non-negative");
  if (fraction == 0.0) return box;
  const double cx = box.x + 0.5 * box.w;
  const double cy = box.y + 0.5 * box.h;
  const double w = box.w * (1.0 + fraction);
  const double h = box.h * (1.0 + fraction);
  BBox out = box;
  const double x0 = std::max(0.0, cx - 0.5 * w);
  const double y0 = std::max(0.0, cy - 0.5 * h);
  const double x1 = std::min(static_cast<double>(width), cx + 0.5 * w);
  const double y1 = std::min(static_cast<double>(height), cy + 0.5 * h);
  out.x = x0;
  out.y = y0;
  out.w = x1 - x0;
  out.h = y1 - y0;
  return out;
}

CrossoverHit best_crossover(std::span<const BBox> gt, const BBox& est, bool relative_to_estimate) {
  CrossoverHit hit;
  for (std::size_t g = 0; g < gt.size(); ++g) {
    const double c = crossover(gt[g], est, relative_to_estimate);
    if (c > hit.crossover) hit = {g, c};
  }
  return hit;
}

BinaryMask human_mask(const SegmentationMask& segmentation, bool merge_adjacent_bikes) {
  BinaryMask mask(segmentation.width(), segmentation.height(), 0);
  std::deque<std::pair<int, int>> frontier;
  for (int v = 0; v < segmentation.height(); ++v)
    for (int u = 0; u < segmentation.width(); ++u) {
      const int id = segmentation(u, v);
      if (id == class_id(SemanticClass::person) || id == class_id(SemanticClass::rider)) {
        mask(u, v) = 1;
        if (merge_adjacent_bikes) frontier.emplace_back(u, v);
      }
    }
  while (!frontier.empty()) {
    const auto [u, v] = frontier.front();
    frontier.pop_front();
    for (int dv = -1; dv <= 1; ++dv)
      for (int du = -1; du <= 1; ++du) {
        const int nu = u + du;
        const int nv = v + dv;
        if (!segmentation.contains(nu, nv) || mask(nu, nv)) continue;
        if (segmentation(nu, nv) != class_id(SemanticClass::bike)) continue;
        mask(nu, nv) = 1;
        frontier.emplace_back(nu, nv);
      }
  }
  return mask;
}

namespace {

constexpr double kFar = 1e20;

// Lower envelope of parabolas (q - p)^2 + f(p).
void distance_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  int k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  for (int q = 1; q < n; ++q) {
    auto meet = [&](int p) { return ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * q - 2.0 * p); };
    double s = meet(v[k]);
    while (s <= z[k]) s = meet(v[--k]);
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace

Raster<double> squared_distance_transform(const BinaryMask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  Raster<double> out(w, h, std::numeric_limits<double>::infinity());
  if (std::none_of(mask.values().begin(), mask.values().end(), [](std::uint8_t x) { return x != 0; })) return out;

  const int n = std::max(w, h);
  std::vector<double> f(static_cast<std::size_t>(n)), d(static_cast<std::size_t>(n));
  std::vector<int> v(static_cast<std::size_t>(n));
  std::vector<double> z(static_cast<std::size_t>(n) + 1);

  f.resize(static_cast<std::size_t>(h));
  d.resize(static_cast<std::size_t>(h));
  for (int u = 0; u < w; ++u) {
    for (int r = 0; r < h; ++r) f[static_cast<std::size_t>(r)] = mask(u, r) ? 0.0 : kFar;
    distance_1d(f, d, v, z);
    for (int r = 0; r < h; ++r) out(u, r) = d[static_cast<std::size_t>(r)];
  }
  f.resize(static_cast<std::size_t>(w));
  d.resize(static_cast<std::size_t>(w));
  for (int r = 0; r < h; ++r) {
    for (int u = 0; u < w; ++u) f[static_cast<std::size_t>(u)] = out(u, r);
    distance_1d(f, d, v, z);
    for (int u = 0; u < w; ++u) out(u, r) = d[static_cast<std::size_t>(u)];
  }
  return out;
}

JointDistances mpjds(const Skeleton2D& s2d, const Raster<double>& squared_distances) {
  require(!squared_distances.empty(), "MPJDS: empty mask");
  require(std::isfinite(squared_distances.values().front()), "MPJDS: mask has no set pixel");
  require(s2d.valid_count() > 0, "MPJDS: no valid joint");

  JointDistances out;
  double sum = 0.0;
  int n = 0;
  for (int j = 0; j < kJointCount; ++j) {
    const auto& joint = s2d.joints[j];
    if (!joint.valid) continue;
    const int u = std::clamp(static_cast<int>(std::lround(joint.u)), 0, squared_distances.width() - 1);
    const int v = std::clamp(static_cast<int>(std::lround(joint.v)), 0, squared_distances.height() - 1);
    const double dist = std::sqrt(squared_distances(u, v));
    out.per_joint[j] = dist;
    sum += dist;
    ++n;
  }
  out.mean = sum / n;
  return out;
}

JointDistances mpjds(const Skeleton2D& s2d, const BinaryMask& mask) {
  require(s2d.valid_count() > 0, "MPJDS: no valid joint");
  return mpjds(s2d, squared_distance_transform(mask));
}

double mpjds_normalized(double mpjds_mean, const BBox& gt_box) {
  require(gt_box.h > 0.0, "MPJDS normalisation: degenerate GT box");
  return mpjds_mean / gt_box.h;
}

double mpjds_normalized(const Skeleton2D& s2d, const BinaryMask& mask, const BBox& gt_box) {
  require(gt_box.h > 0.0, "MPJDS normalisation: degenerate GT box");
  return mpjds_normalized(mpjds(s2d, mask).mean, gt_box);
}

std::array<double, kJointCount> per_joint_report(std::span<const JointDistances> samples) {
  require(!samples.empty(), "per-joint report: no samples");
  std::array<double, kJointCount> sum{};
  std::array<int, kJointCount> n{};
  for (const auto& s : samples)
    for (int j = 0; j < kJointCount; ++j)
      if (s.per_joint[j]) {
        sum[j] += *s.per_joint[j];
        ++n[j];
      }
  std::array<double, kJointCount> out{};
  for (int j = 0; j < kJointCount; ++j)
    out[j] = n[j] ? sum[j] / n[j] : std::numeric_limits<double>::quiet_NaN();
  return out;
}

}  // namespace pedrecon
