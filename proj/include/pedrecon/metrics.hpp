#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "pedrecon/box.hpp"
#include "pedrecon/pointcloud.hpp"
#include "pedrecon/raster.hpp"
#include "pedrecon/skeleton.hpp"

namespace pedrecon {

double intersection_area(const BBox& a, const BBox& b);
double iou(const BBox& a, const BBox& b);

/// Share of the GT box covered by the estimate. With
/// `relative_to_estimate` the estimate's area is the denominator instead.
double crossover(const BBox& gt, const BBox& est, bool relative_to_estimate = false);

struct BoxMatch {
  std::size_t gt = 0;
  std::size_t est = 0;
  double iou = 0.0;
};

struct MatchReport {
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  /// Fractions of the total GT area: matched overlap, estimated area
  /// outside its match, GT area outside its match.
  double tp_area = 0.0;
  double fp_area = 0.0;
  double fn_area = 0.0;
  std::vector<BoxMatch> matches;

  // Raw sums behind the fractions, kept so frames can be merged.
  double gt_area_total = 0.0;
  double est_area_total = 0.0;
  double overlap_area_total = 0.0;
};

/// Pools two reports as if their boxes had been matched together (match
/// lists are concatenated, indices stay frame-local).
MatchReport merge(const MatchReport& a, const MatchReport& b);

/// Greedy one-to-one matching in descending IoU order; only pairs at or
/// above the threshold are matched.
MatchReport match_boxes(std::span<const BBox> gt, std::span<const BBox> est, double iou_threshold = 0.5);

std::vector<BBox> filter_min_size(std::span<const BBox> boxes, double min_w = 7.0, double min_h = 25.0);

/// Grows the box about its centre by `fraction` in each dimension, then
/// clips it to [0, width] x [0, height].
BBox enlarge_bbox(const BBox& box, double fraction, int width, int height);

/// Highest cross-over of an estimate against any GT box, with its index.
struct CrossoverHit {
  std::optional<std::size_t> gt;
  double crossover = 0.0;
};
CrossoverHit best_crossover(std::span<const BBox> gt, const BBox& est, bool relative_to_estimate = false);

/// Person and rider pixels; bike pixels connected to them are added when
/// `merge_adjacent_bikes` is set.
BinaryMask human_mask(const SegmentationMask& segmentation, bool merge_adjacent_bikes = false);

/// Squared Euclidean distance of every pixel to the nearest set pixel
/// (exact, separable lower-envelope transform). Empty masks give +inf.
Raster<double> squared_distance_transform(const BinaryMask& mask);

struct JointDistances {
  std::array<std::optional<double>, kJointCount> per_joint{};
  double mean = 0.0;
};

/// Mean per joint distance to segmentation, in pixels.
JointDistances mpjds(const Skeleton2D& s2d, const BinaryMask& mask);
/// Same, reusing a precomputed squared distance transform of the mask.
JointDistances mpjds(const Skeleton2D& s2d, const Raster<double>& squared_distances);

double mpjds_normalized(double mpjds_mean, const BBox& gt_box);
double mpjds_normalized(const Skeleton2D& s2d, const BinaryMask& mask, const BBox& gt_box);

/// Per-joint mean over samples, in topology order; joints never observed are NaN.
std::array<double, kJointCount> per_joint_report(std::span<const JointDistances> samples);

}  // namespace pedrecon
