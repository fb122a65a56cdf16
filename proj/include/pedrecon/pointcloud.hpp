#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "pedrecon/box.hpp"
#include "pedrecon/geometry.hpp"
#include "pedrecon/semantic.hpp"

namespace pedrecon {

struct LabeledPoint {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  SemanticClass label = SemanticClass::road;
  int frame_id = 0;
};

using PointCloud = std::vector<LabeledPoint>;

struct VoxelIndex {
  std::int64_t x = 0;
  std::int64_t y = 0;
  std::int64_t z = 0;

  friend auto operator<=>(const VoxelIndex&, const VoxelIndex&) = default;
};

struct VoxelCell {
  std::uint32_t count = 0;
  std::array<std::uint32_t, kClassCount> histogram{};
  SemanticClass majority = SemanticClass::road;

  friend bool operator==(const VoxelCell&, const VoxelCell&) = default;
};

struct VoxelGrid {
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  double resolution = 0.25;
  std::map<VoxelIndex, VoxelCell> cells;

  std::size_t size() const { return cells.size(); }
  Eigen::Vector3d center(const VoxelIndex& index) const;
};

inline constexpr double kDefaultVoxelResolution = 0.25;

struct Box3D {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  /// length (along yaw), width, height in metres.
  Eigen::Vector3d dimensions{4.5, 1.8, 1.5};
  double yaw = 0.0;
};

struct BackprojectOptions {
  int stride = 1;
  bool exclude_dynamic = false;
  int frame_id = 0;
  double min_disparity = kMinDisparity;
};

/// One world-frame point per valid-disparity pixel on the stride grid.
PointCloud backproject_frame(const DisparityMap& disparity, const SegmentationMask& segmentation,
                             const CameraIntrinsics& intr, const RigidPose& pose, const BackprojectOptions& options = {});

PointCloud aggregate_cloud(std::span<const PointCloud> frames);

/// Bins points into a sparse grid anchored at the resolution-aligned floor
/// of the cloud's minimum corner. Dynamic points are dropped before binning
/// when requested; labels are decided by majority vote with the lowest
/// class id winning ties.
VoxelGrid voxelize(const PointCloud& cloud, double resolution = kDefaultVoxelResolution, bool drop_dynamic = false);

/// Streaming voxelize: feed frame clouds one at a time. finish() gives the
/// same grid as voxelize() on their concatenation.
class VoxelAccumulator {
 public:
  explicit VoxelAccumulator(double resolution = kDefaultVoxelResolution, bool drop_dynamic = false);

  void add(const PointCloud& cloud);
  VoxelGrid finish() const;

 private:
  double resolution_;
  bool drop_dynamic_;
  // Keyed by floor(p / resolution).
  std::map<VoxelIndex, VoxelCell> cells_;
};

/// Majority class of a histogram, lowest id on ties.
SemanticClass majority_class(const std::array<std::uint32_t, kClassCount>& histogram);

struct CarBoxResult {
  std::vector<Box3D> boxes;
  /// For each entry of `boxes`, the input box it came from.
  std::vector<std::size_t> source;
  /// Input boxes without a single car-labelled valid pixel.
  std::vector<std::size_t> skipped;
  std::vector<double> mean_disparity;
};

/// One fixed-size 3D box per 2D car box, placed at the mean disparity of the
/// car pixels inside it. Boxes covering several cars collapse onto one.
CarBoxResult car_boxes_3d(std::span<const BBox> boxes, const DisparityMap& disparity,
                          const SegmentationMask& segmentation, const CameraIntrinsics& intr, const RigidPose& pose,
                          const Eigen::Vector3d& dimensions = Eigen::Vector3d(4.5, 1.8, 1.5));

}  // namespace pedrecon
