#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pedrecon/geometry.hpp"
#include "pedrecon/synth.hpp"

using namespace pedrecon;
using Eigen::Vector3d;

namespace {

std::vector<OdometrySample> constant_drive(int n, double dt, double v, double w) {
  std::vector<OdometrySample> s;
  for (int i = 0; i < n; ++i) s.push_back({i * dt, v, w});
  return s;
}

}  // namespace

TEST_CASE("intrinsics validation") {
  CameraIntrinsics intr;
  CHECK_NOTHROW(intr.validate());
  intr.baseline = 0.0;
  CHECK_THROWS_AS(intr.validate(), Error);
  intr = {};
  intr.cx = intr.width;
  CHECK_THROWS_AS(intr.validate(), Error);
}

TEST_CASE("planar rig pose looks along its heading") {
  for (double heading : {0.0, 0.7, -2.4, std::numbers::pi}) {
    const RigidPose p = planar_rig_pose(1.0, 2.0, 1.5, heading);
    CHECK(p.is_valid());
    const Vector3d forward = p.rotation * Vector3d::UnitZ();
    CHECK(forward.x() == doctest::Approx(std::cos(heading)));
    CHECK(forward.y() == doctest::Approx(std::sin(heading)));
    CHECK(forward.z() == doctest::Approx(0.0));
    // image "down" points to the ground
    CHECK((p.rotation * Vector3d::UnitY()).z() == doctest::Approx(-1.0));
    CHECK(rig_heading(p) == doctest::Approx(std::remainder(heading, 2 * std::numbers::pi)));
  }
}

TEST_CASE("rigid pose inverse and composition") {
  const RigidPose a = planar_rig_pose(3.0, -1.0, 2.0, 0.4);
  const RigidPose b = planar_rig_pose(-2.0, 5.0, 0.5, -1.1);
  const RigidPose id = a * a.inverse();
  CHECK((id.rotation - Eigen::Matrix3d::Identity()).norm() < 1e-12);
  CHECK(id.translation.norm() < 1e-12);
  const Vector3d p(0.3, -0.2, 7.0);
  CHECK(((a * b) * p - a * (b * p)).norm() < 1e-12);
}

TEST_CASE("odometry: zero motion keeps the initial pose") {
  const RigidPose initial = planar_rig_pose(4.0, 2.0, 1.5, 0.3);
  const Trajectory t = integrate_odometry(constant_drive(10, 0.1, 0.0, 0.0), initial);
  REQUIRE(t.size() == 10);
  for (const auto& tp : t.poses) {
    CHECK((tp.pose.translation - initial.translation).norm() == 0.0);
    CHECK((tp.pose.rotation - initial.rotation).norm() < 1e-15);
  }
}

TEST_CASE("odometry: 17 m/s at 17 Hz moves one metre per frame") {
  const Trajectory t = integrate_odometry(constant_drive(31, 1.0 / 17.0, 17.0, 0.0), planar_rig_pose(0, 0, 1.5, 0));
  REQUIRE(t.size() == 31);
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(t[i].translation.x() == doctest::Approx(static_cast<double>(i)).epsilon(1e-12));
    CHECK(t[i].translation.y() == 0.0);
    CHECK(t[i].translation.z() == 1.5);
    CHECK(rig_heading(t[i]) == doctest::Approx(0.0));
  }
  CHECK(t[30].translation.x() == doctest::Approx(30.0).epsilon(1e-12));
}

TEST_CASE("odometry: straight drive is a pure translation along the heading") {
  const double heading = 0.9;
  const Trajectory t = integrate_odometry(constant_drive(20, 0.05, 3.0, 0.0), planar_rig_pose(1, 1, 0, heading));
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double s = 3.0 * 0.05 * static_cast<double>(i);
    CHECK((t[i].translation - Vector3d(1 + s * std::cos(heading), 1 + s * std::sin(heading), 0)).norm() < 1e-12);
  }
}

TEST_CASE("odometry: constant turn stays on the arc circle") {
  const double v = 8.0, w = 0.35, heading = 0.2;
  const Trajectory t = integrate_odometry(constant_drive(200, 0.05, v, w), planar_rig_pose(0, 0, 0, heading));
  const double r = v / w;
  // centre sits to the left of the initial heading
  const Eigen::Vector2d centre(-r * std::sin(heading), r * std::cos(heading));
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(std::abs((t[i].translation.head<2>() - centre).norm() - r) < 1e-9);
    CHECK(std::abs(std::remainder(rig_heading(t[i]) - (heading + w * 0.05 * static_cast<double>(i)), 2 * std::numbers::pi)) <
          1e-9);
  }
}

TEST_CASE("odometry: invalid sequences") {
  CHECK_THROWS_AS(integrate_odometry({}, RigidPose{}), Error);
  const std::vector<OdometrySample> back{{0.0, 1.0, 0.0}, {0.0, 1.0, 0.0}};
  CHECK_THROWS_AS(integrate_odometry(back, RigidPose{}), Error);
}

TEST_CASE("gps: equirectangular projection") {
  const GpsSample ref{0.0, 50.0, 8.0};
  const Eigen::Vector2d north = gps_to_local({0.0, 50.0 + 1e-5, 8.0}, ref);
  CHECK(north.x() == 0.0);
  CHECK(north.y() == doctest::Approx(6371000.0 * 1e-5 * std::numbers::pi / 180.0).epsilon(1e-9));
  CHECK(north.y() == doctest::Approx(1.112).epsilon(1e-3));
  const Eigen::Vector2d east = gps_to_local({0.0, 50.0, 8.0 + 1e-5}, ref);
  CHECK(east.x() == doctest::Approx(north.y() * std::cos(50.0 * std::numbers::pi / 180.0)));

  const GpsSample back = local_to_gps({12.5, -30.25}, 3.0, ref);
  CHECK((gps_to_local(back, ref) - Eigen::Vector2d(12.5, -30.25)).norm() < 1e-9);
}

TEST_CASE("gps: heading rules") {
  const GpsSample ref{0.0, 50.0, 8.0};
  std::vector<GpsSample> still(4, ref);
  for (int i = 0; i < 4; ++i) still[i].timestamp = i;
  const Trajectory t = gps_to_trajectory(still, ref);
  for (const auto& tp : t.poses) {
    CHECK(tp.pose.translation.head<2>().norm() == 0.0);
    CHECK(rig_heading(tp.pose) == doctest::Approx(0.0));
  }

  const std::vector<GpsSample> north{{0.0, 50.0, 8.0}, {1.0, 50.0001, 8.0}};
  const Trajectory n = gps_to_trajectory(north, ref);
  CHECK(rig_heading(n[0]) == doctest::Approx(std::numbers::pi / 2));
  CHECK(rig_heading(n[1]) == doctest::Approx(std::numbers::pi / 2));

  // a stop holds the previous heading
  const std::vector<GpsSample> stop{{0.0, 50.0, 8.0}, {1.0, 50.0, 8.0001}, {2.0, 50.0, 8.0001}};
  const Trajectory s = gps_to_trajectory(stop, ref);
  CHECK(rig_heading(s[2]) == doctest::Approx(0.0));

  CHECK_THROWS_AS(gps_to_trajectory(std::vector<GpsSample>{ref}, ref), Error);
}

TEST_CASE("gps track of a straight drive matches odometry") {
  const GpsSample ref{0.0, 49.87, 8.65};
  const double heading = 0.6;
  const Trajectory odo = integrate_odometry(constant_drive(30, 1.0 / 17.0, 12.0, 0.0), planar_rig_pose(0, 0, 1.5, heading));
  std::vector<GpsSample> fixes;
  for (const auto& tp : odo.poses) fixes.push_back(local_to_gps(tp.pose.translation.head<2>(), tp.timestamp, ref));
  const Trajectory g = gps_to_trajectory(fixes, ref, 1.5);
  REQUIRE(g.size() == odo.size());
  CHECK(g.source == TrajectorySource::gps);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK((g[i].translation - odo[i].translation).norm() < 1e-6);
    CHECK((g[i].rotation - odo[i].rotation).norm() < 1e-6);
  }
}

TEST_CASE("disparity to point") {
  const CameraIntrinsics intr;
  CHECK((disparity_to_point(intr.cx, intr.cy, 10.0, intr) - Vector3d(0, 0, 20)).norm() < 1e-12);
  CHECK((disparity_to_point(intr.cx + 100, intr.cy, 20.0, intr) - Vector3d(1, 0, 10)).norm() < 1e-12);
  CHECK_THROWS_AS(disparity_to_point(10.0, 10.0, 0.0, intr), Error);
  CHECK_THROWS_AS(disparity_to_point(10.0, 10.0, kMinDisparity, intr), Error);

  double previous = std::numeric_limits<double>::infinity();
  for (double d = 0.3; d < 100.0; d *= 1.7) {
    const double z = disparity_to_point(100.0, 50.0, d, intr).z();
    CHECK(z < previous);
    previous = z;
  }
}

TEST_CASE("projection inverts backprojection") {
  const CameraIntrinsics intr;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> x(-10, 10), z(1, 200);
  for (int i = 0; i < 500; ++i) {
    const Vector3d p(x(rng), x(rng) * 0.3, z(rng));
    const Vector3d uvd = project_point(p, intr);
    CHECK((disparity_to_point(uvd.x(), uvd.y(), uvd.z(), intr) - p).norm() < 1e-9);
  }
}

TEST_CASE("joint disparity sampling") {
  DisparityMap map(20, 20, 0.0);
  for (int v = 0; v < 20; ++v)
    for (int u = 0; u < 20; ++u) map(u, v) = 8.0;
  CHECK(sample_joint_disparity(map, 10, 10) == 8.0);

  DisparityMap sparse(20, 20, 0.0);
  sparse(8, 8) = 4.0;
  sparse(9, 10) = 4.0;
  sparse(12, 12) = 4.0;
  sparse(10, 11) = 100.0;
  CHECK(sample_joint_disparity(sparse, 10.2, 9.7) == 4.0);

  DisparityMap pair(20, 20, 0.0);
  pair(10, 10) = 3.0;
  pair(11, 10) = 5.0;
  CHECK(sample_joint_disparity(pair, 10, 10) == 4.0);

  // values at or below the floor do not count
  pair(9, 10) = 0.2;
  CHECK(sample_joint_disparity(pair, 10, 10) == 4.0);

  CHECK_THROWS_AS(sample_joint_disparity(DisparityMap(20, 20, 0.0), 10, 10), Error);
  CHECK_THROWS_AS(sample_joint_disparity(map, 10, 10, 4), Error);
}

TEST_CASE("triangulation round trip on an analytic disparity map") {
  const CameraIntrinsics intr;
  const RigidPose pose = planar_rig_pose(2.0, -1.0, 1.5, 0.25);
  Skeleton3D gt = synth::gait_pose(1.1, 0.4, 2.0);
  gt.positions.colwise() += Vector3d(14.0, 2.5, 0.95);
  const Skeleton2D s2d = project_skeleton(gt, intr, pose);
  const DisparityMap map = synth::render_joint_disparity(std::span(&gt, 1), intr, pose);
  const Skeleton3D back = triangulate_skeleton(s2d, map, intr, pose);
  REQUIRE(back.fully_valid());
  CHECK((back.positions - gt.positions).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("triangulation: background depth stretches the limb") {
  const CameraIntrinsics intr;
  const RigidPose pose = planar_rig_pose(0, 0, 1.5, 0);
  Skeleton3D gt = synth::gait_pose(0.0, 0.0, std::numbers::pi / 2);
  gt.positions.colwise() += Vector3d(10.0, 0.0, 0.95);
  const Skeleton2D s2d = project_skeleton(gt, intr, pose);
  DisparityMap map = synth::render_joint_disparity(std::span(&gt, 1), intr, pose);

  // the wrist window sees a wall three times farther away
  const auto& wrist = s2d.joints[l_wrist];
  const double wall = intr.disparity(3.0 * (gt.joint(l_wrist) - pose.translation).x());
  for (int dv = -2; dv <= 2; ++dv)
    for (int du = -2; du <= 2; ++du) map(static_cast<int>(std::lround(wrist.u)) + du, static_cast<int>(std::lround(wrist.v)) + dv) = wall;
  const Skeleton3D back = triangulate_skeleton(s2d, map, intr, pose);
  const double depth_true = (gt.joint(l_wrist) - pose.translation).x();
  const double depth_seen = (back.joint(l_wrist) - pose.translation).x();
  CHECK(depth_seen == doctest::Approx(3.0 * depth_true).epsilon(1e-9));
  const double forearm = (back.joint(l_wrist) - back.joint(l_elbow)).norm();
  CHECK(forearm > 10.0 * (gt.joint(l_wrist) - gt.joint(l_elbow)).norm());
  CHECK((back.joint(r_wrist) - gt.joint(r_wrist)).norm() < 1e-6);
}

TEST_CASE("triangulation: joints without depth are invalid") {
  const CameraIntrinsics intr;
  const RigidPose pose = planar_rig_pose(0, 0, 1.5, 0);
  Skeleton3D gt = synth::gait_pose(0.5, 0.3, 1.0);
  gt.positions.colwise() += Vector3d(9.0, 1.0, 0.95);
  Skeleton2D s2d = project_skeleton(gt, intr, pose);
  DisparityMap map = synth::render_joint_disparity(std::span(&gt, 1), intr, pose);
  const auto& head_px = s2d.joints[head];
  for (int dv = -2; dv <= 2; ++dv)
    for (int du = -2; du <= 2; ++du) map(static_cast<int>(std::lround(head_px.u)) + du, static_cast<int>(std::lround(head_px.v)) + dv) = 0.0;
  s2d.joints[r_ankle].u = -50.0;

  const Skeleton3D back = triangulate_skeleton(s2d, map, intr, pose);
  CHECK_FALSE(back.valid[head]);
  CHECK_FALSE(back.valid[r_ankle]);
  CHECK(back.valid_count() == kJointCount - 2);
  for (int j = 0; j < kJointCount; ++j)
    if (back.valid[j]) CHECK((back.joint(j) - gt.joint(j)).norm() < 1e-6);

  CHECK_THROWS_AS(triangulate_skeleton(s2d, DisparityMap(intr.width, intr.height, 0.0), intr, pose), Error);
}
