#include "pedrecon/geometry.hpp"

#include <algorithm>
#include <numbers>
#include <string>

namespace pedrecon {

void CameraIntrinsics::validate() const {
  require(fx > 0.0 && fy > 0.0, "focal lengths must be positive");
  require(baseline > 0.0, "stereo baseline must be positive");
  require(width > 0 && height > 0, "image size must be positive");
  require(cx >= 0.0 && cx < width && cy >= 0.0 && cy < height, "principal point must lie inside the image");
}

RigidPose planar_rig_pose(double x, double y, double z, double heading) {
  const double c = std::cos(heading);
  const double s = std::sin(heading);
  RigidPose pose;
  // Columns: camera right, down and forward expressed in world axes.
  pose.rotation << s, 0.0, c,
                  -c, 0.0, s,
                 0.0, -1.0, 0.0;
  pose.translation = {x, y, z};
  return pose;
}

double rig_heading(const RigidPose& pose) {
  const Eigen::Vector3d forward = pose.rotation.col(2);
  return std::atan2(forward.y(), forward.x());
}

Trajectory integrate_odometry(std::span<const OdometrySample> samples, const RigidPose& initial) {
  require(!samples.empty(), "odometry: empty sample sequence");
  for (std::size_t i = 1; i < samples.size(); ++i)
    require(samples[i].timestamp > samples[i - 1].timestamp,
            "odometry: timestamps not strictly increasing at sample " + std::to_string(i));
  for (const auto& s : samples) require(s.speed >= 0.0, "odometry: negative speed");

  Trajectory out;
  out.source = TrajectorySource::odometry;
  out.poses.reserve(samples.size());
  out.poses.push_back({samples.front().timestamp, initial});

  const double heading0 = rig_heading(initial);
  double x = initial.translation.x();
  double y = initial.translation.y();
  double heading = heading0;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    const auto& held = samples[i - 1];
    const double dt = samples[i].timestamp - held.timestamp;
    const double turn = held.yaw_rate * dt;
    if (held.yaw_rate == 0.0) {
      x += held.speed * dt * std::cos(heading);
      y += held.speed * dt * std::sin(heading);
    } else {
      const double radius = held.speed / held.yaw_rate;
      x += radius * (std::sin(heading + turn) - std::sin(heading));
      y -= radius * (std::cos(heading + turn) - std::cos(heading));
    }
    heading += turn;

    RigidPose pose;
    pose.rotation = Eigen::AngleAxisd(heading - heading0, Eigen::Vector3d::UnitZ()).toRotationMatrix() *
                    initial.rotation;
    pose.translation = {x, y, initial.translation.z()};
    out.poses.push_back({samples[i].timestamp, pose});
  }
  return out;
}

Eigen::Vector2d gps_to_local(const GpsSample& sample, const GpsSample& reference) {
  constexpr double deg = std::numbers::pi / 180.0;
  return {kEarthRadius * (sample.longitude - reference.longitude) * deg * std::cos(reference.latitude * deg),
          kEarthRadius * (sample.latitude - reference.latitude) * deg};
}

GpsSample local_to_gps(const Eigen::Vector2d& east_north, double timestamp, const GpsSample& reference) {
  constexpr double deg = std::numbers::pi / 180.0;
  return {timestamp, reference.latitude + east_north.y() / kEarthRadius / deg,
          reference.longitude + east_north.x() / (kEarthRadius * std::cos(reference.latitude * deg)) / deg};
}

Trajectory gps_to_trajectory(std::span<const GpsSample> samples, const GpsSample& reference, double height) {
  require(samples.size() >= 2, "gps: at least 2 samples are required");
  for (const auto& s : samples)
    require(std::abs(s.latitude) <= 90.0 && std::abs(s.longitude) <= 180.0, "gps: latitude/longitude out of range");
  for (std::size_t i = 1; i < samples.size(); ++i)
    require(samples[i].timestamp > samples[i - 1].timestamp,
            "gps: timestamps not strictly increasing at sample " + std::to_string(i));

  std::vector<Eigen::Vector2d> xy;
  xy.reserve(samples.size());
  for (const auto& s : samples) xy.push_back(gps_to_local(s, reference));

  std::vector<double> heading(samples.size(), 0.0);
  double held = 0.0;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    const Eigen::Vector2d step = xy[i] - xy[i - 1];
    if (step.x() != 0.0 || step.y() != 0.0) held = std::atan2(step.y(), step.x());
    heading[i] = held;
  }
  heading[0] = heading[1];

  Trajectory out;
  out.source = TrajectorySource::gps;
  out.poses.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i)
    out.poses.push_back({samples[i].timestamp, planar_rig_pose(xy[i].x(), xy[i].y(), height, heading[i])});
  return out;
}

Eigen::Vector3d project_point(const Eigen::Vector3d& p, const CameraIntrinsics& intr) {
  require(p.z() > 0.0, "cannot project a point behind the camera");
  return {intr.fx * p.x() / p.z() + intr.cx, intr.fy * p.y() / p.z() + intr.cy, intr.disparity(p.z())};
}

double sample_joint_disparity(const DisparityMap& map, double u, double v, int window, double min_disparity) {
  require(window > 0 && window % 2 == 1, "disparity window must be a positive odd size");
  const int cu = static_cast<int>(std::lround(u));
  const int cv = static_cast<int>(std::lround(v));
  require(map.contains(cu, cv), "joint lies outside the disparity map");

  const int half = window / 2;
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(window * window));
  for (int dv = -half; dv <= half; ++dv)
    for (int du = -half; du <= half; ++du)
      if (map.contains(cu + du, cv + dv)) {
        const double d = map(cu + du, cv + dv);
        if (d > min_disparity) values.push_back(d);
      }
  if (values.empty()) fail(ErrorKind::invalid_input, "no valid disparity around joint");

  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

Skeleton3D triangulate_skeleton(const Skeleton2D& s2d, const DisparityMap& map, const CameraIntrinsics& intr,
                                const RigidPose& pose, int window) {
  require(s2d.valid_count() >= 1, "triangulation: no valid 2D joint");
  Skeleton3D out;
  for (int j = 0; j < kJointCount; ++j) {
    const auto& joint = s2d.joints[j];
    if (!joint.valid) continue;
    const long cu = std::lround(joint.u);
    const long cv = std::lround(joint.v);
    if (!map.contains(static_cast<int>(cu), static_cast<int>(cv))) continue;
    try {
      const double d = sample_joint_disparity(map, joint.u, joint.v, window);
      out.positions.col(j) = pose * disparity_to_point(joint.u, joint.v, d, intr);
      out.valid[j] = true;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::invalid_input) throw;
    }
  }
  if (out.valid_count() == 0) fail(ErrorKind::invalid_input, "triangulation: no joint has a valid disparity");
  return out;
}

Skeleton2D project_skeleton(const Skeleton3D& s3d, const CameraIntrinsics& intr, const RigidPose& pose) {
  const RigidPose world_to_camera = pose.inverse();
  Skeleton2D out;
  for (int j = 0; j < kJointCount; ++j) {
    if (!s3d.valid[j]) continue;
    const Eigen::Vector3d p = world_to_camera * Eigen::Vector3d(s3d.positions.col(j));
    if (p.z() <= 0.0) continue;
    const Eigen::Vector3d uvd = project_point(p, intr);
    out.joints[j] = {uvd.x(), uvd.y(), 1.0, uvd.x() >= 0.0 && uvd.y() >= 0.0 && uvd.x() < intr.width && uvd.y() < intr.height};
  }
  return out;
}

}  // namespace pedrecon
