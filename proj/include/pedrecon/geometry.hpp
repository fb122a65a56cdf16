#pragma once

#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/LU>

#include "pedrecon/raster.hpp"
#include "pedrecon/skeleton.hpp"

namespace pedrecon {

struct CameraIntrinsics {
  double fx = 1000.0;
  double fy = 1000.0;
  double cx = 512.0;
  double cy = 256.0;
  double baseline = 0.2;
  int width = 1024;
  int height = 512;

  void validate() const;
  /// Depth of a pixel with disparity d.
  double depth(double d) const { return fx * baseline / d; }
  double disparity(double depth) const { return fx * baseline / depth; }

  friend bool operator==(const CameraIntrinsics&, const CameraIntrinsics&) = default;
};

/// Rigid transform p -> rotation * p + translation. Rig poses map camera
/// coordinates (x right, y down, z forward) into the world frame
/// (x east, y north, z up).
template <typename Scalar>
struct BasicRigidPose {
  using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;
  using Vector3 = Eigen::Matrix<Scalar, 3, 1>;

  Matrix3 rotation = Matrix3::Identity();
  Vector3 translation = Vector3::Zero();

  Vector3 operator*(const Vector3& p) const { return rotation * p + translation; }

  BasicRigidPose operator*(const BasicRigidPose& other) const {
    return {rotation * other.rotation, rotation * other.translation + translation};
  }

  BasicRigidPose inverse() const {
    const Matrix3 rt = rotation.transpose();
    return {rt, -(rt * translation)};
  }

  template <typename Derived>
  auto apply(const Eigen::MatrixBase<Derived>& points) const {
    return (rotation * points).colwise() + translation;
  }

  bool is_valid(Scalar tolerance = Scalar(1e-9)) const {
    return (rotation.transpose() * rotation - Matrix3::Identity()).cwiseAbs().maxCoeff() <= tolerance &&
           std::abs(rotation.determinant() - Scalar(1)) <= tolerance;
  }
};

using RigidPose = BasicRigidPose<double>;

/// Level rig at world position (x, y, z) looking along `heading`, measured
/// counter-clockwise from east.
RigidPose planar_rig_pose(double x, double y, double z, double heading);

/// Heading of the rig's optical axis projected on the ground plane.
double rig_heading(const RigidPose& pose);

struct OdometrySample {
  double timestamp = 0.0;
  double speed = 0.0;
  double yaw_rate = 0.0;
};

struct GpsSample {
  double timestamp = 0.0;
  double latitude = 0.0;
  double longitude = 0.0;
};

enum class TrajectorySource { odometry, gps };

struct TimedPose {
  double timestamp = 0.0;
  RigidPose pose;
};

struct Trajectory {
  TrajectorySource source = TrajectorySource::odometry;
  std::vector<TimedPose> poses;

  std::size_t size() const { return poses.size(); }
  const RigidPose& operator[](std::size_t i) const { return poses[i].pose; }
};

inline constexpr double kEarthRadius = 6371000.0;
inline constexpr double kDefaultFrameRate = 17.0;

/// Planar unicycle dead reckoning. Pose i sits at samples[i].timestamp; the
/// speed and yaw rate of sample i-1 are held over (t[i-1], t[i]] and
/// integrated with the exact circular-arc update. Height stays at the
/// initial pose's.
Trajectory integrate_odometry(std::span<const OdometrySample> samples, const RigidPose& initial);

/// Equirectangular east/north offsets of `sample` about `reference`.
Eigen::Vector2d gps_to_local(const GpsSample& sample, const GpsSample& reference);
GpsSample local_to_gps(const Eigen::Vector2d& east_north, double timestamp, const GpsSample& reference);

/// Rig trajectory from GPS fixes. Heading comes from the finite difference
/// to the previous fix; the first frame copies the second and coincident
/// fixes hold the previous heading (0 when nothing has moved yet).
Trajectory gps_to_trajectory(std::span<const GpsSample> samples, const GpsSample& reference, double height = 0.0);

/// Camera-frame point of pixel (u, v) with disparity d.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 1> disparity_to_point(Scalar u, Scalar v, Scalar d, const CameraIntrinsics& intr,
                                               Scalar min_disparity = Scalar(kMinDisparity)) {
  if (!(d > min_disparity)) fail(ErrorKind::invalid_input, "invalid disparity " + std::to_string(static_cast<double>(d)));
  const Scalar z = Scalar(intr.fx * intr.baseline) / d;
  return {(u - Scalar(intr.cx)) * z / Scalar(intr.fx), (v - Scalar(intr.cy)) * z / Scalar(intr.fy), z};
}

/// Inverse of disparity_to_point: (u, v, d) for a camera-frame point in front of the rig.
Eigen::Vector3d project_point(const Eigen::Vector3d& camera_point, const CameraIntrinsics& intr);

/// Median of the valid disparities in a window x window patch centred on
/// the pixel nearest (u, v).
double sample_joint_disparity(const DisparityMap& map, double u, double v, int window = 5,
                              double min_disparity = kMinDisparity);

/// Backprojects every valid 2D joint into the world. Joints outside the
/// image or without a valid disparity come back invalid.
Skeleton3D triangulate_skeleton(const Skeleton2D& s2d, const DisparityMap& map, const CameraIntrinsics& intr,
                                const RigidPose& pose, int window = 5);

/// Projects a world-frame skeleton into the image of a rig at `pose`.
Skeleton2D project_skeleton(const Skeleton3D& s3d, const CameraIntrinsics& intr, const RigidPose& pose);

}  // namespace pedrecon
