#include "pedrecon/pointcloud.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pedrecon {
namespace {

constexpr std::array<std::string_view, kClassCount> kClassNames{
    "road", "sidewalk", "building", "wall", "fence", "pole", "sign",
    "vegetation", "static", "person", "rider", "car", "bike"};

}  // namespace

std::string_view class_name(SemanticClass c) { return kClassNames.at(static_cast<std::size_t>(c)); }

std::optional<SemanticClass> class_from_name(std::string_view name) {
  for (int i = 0; i < kClassCount; ++i)
    if (kClassNames[static_cast<std::size_t>(i)] == name) return static_cast<SemanticClass>(i);
  return std::nullopt;
}

std::optional<SemanticClass> class_from_id(int id) {
  if (id < 0 || id >= kClassCount) return std::nullopt;
  return static_cast<SemanticClass>(id);
}

Eigen::Vector3d VoxelGrid::center(const VoxelIndex& index) const {
  return origin + resolution * Eigen::Vector3d(static_cast<double>(index.x) + 0.5, static_cast<double>(index.y) + 0.5,
                                               static_cast<double>(index.z) + 0.5);
}

PointCloud backproject_frame(const DisparityMap& disparity, const SegmentationMask& segmentation,
                             const CameraIntrinsics& intr, const RigidPose& pose, const BackprojectOptions& options) {
  require(disparity.same_shape(segmentation), "backprojection: disparity and segmentation sizes differ");
  require(options.stride >= 1, "backprojection: stride must be at least 1");

  PointCloud cloud;
  for (int v = 0; v < disparity.height(); v += options.stride) {
    for (int u = 0; u < disparity.width(); u += options.stride) {
      const double d = disparity(u, v);
      if (!(d > options.min_disparity)) continue;
      const auto label = class_from_id(segmentation(u, v));
      require(label.has_value(), "backprojection: unknown class id " + std::to_string(segmentation(u, v)));
      if (options.exclude_dynamic && is_dynamic(*label)) continue;
      const Eigen::Vector3d p = disparity_to_point<double>(u, v, d, intr, options.min_disparity);
      cloud.push_back({pose * p, *label, options.frame_id});
    }
  }
  return cloud;
}

PointCloud aggregate_cloud(std::span<const PointCloud> frames) {
  std::size_t total = 0;
  for (const auto& f : frames) total += f.size();
  PointCloud out;
  out.reserve(total);
  for (const auto& f : frames) out.insert(out.end(), f.begin(), f.end());
  return out;
}

SemanticClass majority_class(const std::array<std::uint32_t, kClassCount>& histogram) {
  // max_element keeps the first maximum, i.e. the lowest class id.
  return static_cast<SemanticClass>(std::max_element(histogram.begin(), histogram.end()) - histogram.begin());
}

VoxelAccumulator::VoxelAccumulator(double resolution, bool drop_dynamic)
    : resolution_(resolution), drop_dynamic_(drop_dynamic) {
  require(resolution > 0.0, "voxel resolution must be positive");
}

void VoxelAccumulator::add(const PointCloud& cloud) {
  for (const auto& p : cloud) {
    if (drop_dynamic_ && is_dynamic(p.label)) continue;
    const Eigen::Vector3d cell = (p.position / resolution_).array().floor();
    VoxelCell& c = cells_[{static_cast<std::int64_t>(cell.x()), static_cast<std::int64_t>(cell.y()),
                           static_cast<std::int64_t>(cell.z())}];
    ++c.count;
    ++c.histogram[static_cast<std::size_t>(p.label)];
  }
}

VoxelGrid VoxelAccumulator::finish() const {
  VoxelGrid grid;
  grid.resolution = resolution_;
  if (cells_.empty()) return grid;
  // floor is monotone, so the smallest cell index is floor(min / resolution).
  VoxelIndex lo = cells_.begin()->first;
  for (const auto& [index, cell] : cells_) {
    lo.y = std::min(lo.y, index.y);
    lo.z = std::min(lo.z, index.z);
  }
  grid.origin = Eigen::Vector3d(static_cast<double>(lo.x), static_cast<double>(lo.y), static_cast<double>(lo.z)) *
                resolution_;
  for (const auto& [index, cell] : cells_) {
    VoxelCell& c = grid.cells[{index.x - lo.x, index.y - lo.y, index.z - lo.z}];
    c = cell;
    c.majority = majority_class(c.histogram);
  }
  return grid;
}

VoxelGrid voxelize(const PointCloud& cloud, double resolution, bool drop_dynamic) {
  VoxelAccumulator acc(resolution, drop_dynamic);
  acc.add(cloud);
  return acc.finish();
}

CarBoxResult car_boxes_3d(std::span<const BBox> boxes, const DisparityMap& disparity,
                          const SegmentationMask& segmentation, const CameraIntrinsics& intr, const RigidPose& pose,
                          const Eigen::Vector3d& dimensions) {
  require(disparity.same_shape(segmentation), "car boxes: disparity and segmentation sizes differ");
  require((dimensions.array() > 0.0).all(), "car boxes: dimensions must be positive");

  CarBoxResult out;
  const double yaw = rig_heading(pose);
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const BBox& b = boxes[i];
    const int u0 = std::max(0, static_cast<int>(std::floor(b.x)));
    const int v0 = std::max(0, static_cast<int>(std::floor(b.y)));
    const int u1 = std::min(disparity.width(), static_cast<int>(std::ceil(b.right())));
    const int v1 = std::min(disparity.height(), static_cast<int>(std::ceil(b.bottom())));
    double sum = 0.0;
    std::size_t n = 0;
    for (int v = v0; v < v1; ++v)
      for (int u = u0; u < u1; ++u) {
        const double d = disparity(u, v);
        if (segmentation(u, v) == class_id(SemanticClass::car) && d > kMinDisparity) {
          sum += d;
          ++n;
        }
      }
    if (n == 0) {
      out.skipped.push_back(i);
      continue;
    }
    const double mean = sum / static_cast<double>(n);
    // Pixel centres of a box covering columns x .. x+w-1.
    const Eigen::Vector3d c = disparity_to_point(b.x + 0.5 * (b.w - 1.0), b.y + 0.5 * (b.h - 1.0), mean, intr);
    out.boxes.push_back({pose * c, dimensions, yaw});
    out.source.push_back(i);
    out.mean_disparity.push_back(mean);
  }
  return out;
}

}  // namespace pedrecon
