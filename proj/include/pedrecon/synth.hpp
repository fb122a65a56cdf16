#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "pedrecon/box.hpp"
#include "pedrecon/geometry.hpp"
#include "pedrecon/pointcloud.hpp"
#include "pedrecon/skeleton.hpp"

namespace pedrecon::synth {

// Reference body proportions for a 1.75 m adult, in metres.
struct BodyProportions {
  double hip = 0.11;  // pelvis to each hip joint
  double thigh = 0.44;
  double shin = 0.43;
  double lower_spine = 0.24;
  double upper_spine = 0.24;
  double neck = 0.10;
  double head = 0.14;
  double shoulder = 0.17;
  double upper_arm = 0.28;
  double forearm = 0.26;
  double ankle_height = 0.06;
  double crown = 0.08;  // head joint to top of skull
  double stature = 1.75;

  std::array<double, kLimbCount> limb_lengths() const;
  double backbone() const { return lower_spine + upper_spine; }
};

/// Root-centred walking pose. `phase` runs over [0, 2*pi) per stride,
/// `amplitude` is the thigh swing in radians (0 = standing), `heading` the
/// walking direction counter-clockwise from +x with z up. Limb lengths are
/// the reference proportions scaled by stature / 1.75.
Skeleton3D gait_pose(double phase, double amplitude, double heading, double stature = 1.75);

/// Pelvis height that puts the lowest ankle at its rest height.
double pelvis_height(const Skeleton3D& root_centred, double stature);

/// Limb ratio table of the reference proportions.
ReferenceLibrary reference_ratios();

/// Procedural library: 8 headings x 24 gait phases plus 8 standing poses.
ReferenceLibrary generate_reference_library();

/// `count` poses with uniformly drawn phase, amplitude and heading.
ReferenceLibrary random_reference_library(std::size_t count, std::uint64_t seed);

struct SceneBox {
  Eigen::AlignedBox3d box;
  SemanticClass label = SemanticClass::building;
};

struct PedestrianSpec {
  Eigen::Vector2d start = Eigen::Vector2d::Zero();
  double heading = 0.0;
  double speed = 1.3;
  double gait_amplitude = 0.4;
  double stature = 1.75;
  double phase = 0.0;
  SemanticClass label = SemanticClass::person;
};

struct DetectorNoise {
  double box_jitter = 0.0;      // px, per coordinate
  double box_dropout = 0.0;     // probability a GT box is missed
  double spurious_rate = 0.0;   // expected spurious small boxes per GT box
  double joint_jitter = 0.0;    // px
  double joint_dropout = 0.0;
};

struct SceneConfig {
  std::uint64_t seed = 0;
  int frame_count = 30;
  double frame_rate = kDefaultFrameRate;
  CameraIntrinsics camera{};
  double camera_height = 1.5;
  /// (speed m/s, yaw rate rad/s) per frame; the last entry is held.
  std::vector<Eigen::Vector2d> vehicle_profile{Eigen::Vector2d(10.0, 0.0)};
  bool ground_plane = true;
  double road_half_width = 5.0;
  std::vector<SceneBox> boxes;
  std::vector<PedestrianSpec> pedestrians;
  double gps_noise_sigma = 0.0;
  GpsSample gps_reference{0.0, 49.8728, 8.6512};
  DetectorNoise noise{};
  bool quantize = false;

  void validate() const;

  /// Street scene: road along +x, parked cars, buildings and trees on both
  /// sides, and `pedestrians` walkers on the sidewalks ahead of the rig.
  static SceneConfig street(std::uint64_t seed, int pedestrians = 5, int cars = 6);
};

struct RenderedFrame {
  DisparityMap disparity;
  SegmentationMask segmentation;
  /// -1 for background, pedestrian index, or pedestrians.size() + box index.
  Raster<std::int32_t> instance;
};

/// World skeleton of pedestrian `index` at time `t` (seconds).
Skeleton3D pedestrian_skeleton(const SceneConfig& config, std::size_t index, double t);

/// Ray casts every pixel against the ground plane, scene boxes and capsule
/// pedestrians; disparity is fx*B/Z of the nearest hit, 0 on a miss.
RenderedFrame render_frame(const SceneConfig& config, const RigidPose& pose, double t = 0.0);

/// Disparity map holding the exact disparity of every visible joint in a
/// window around its projection; each pixel belongs to the nearest joint.
DisparityMap render_joint_disparity(std::span<const Skeleton3D> skeletons, const CameraIntrinsics& intr,
                                    const RigidPose& pose, int window = 5);

/// Tight bounds of each instance's pixels, indexed like the instance ids.
std::vector<std::optional<BBox>> instance_boxes(const Raster<std::int32_t>& instance, int instance_count);

struct FrameData {
  double timestamp = 0.0;
  RigidPose pose;
  DisparityMap disparity;
  SegmentationMask segmentation;
  std::vector<BBox> gt_boxes;
  /// Pedestrian index of each GT box, -1 for cars.
  std::vector<int> gt_box_pedestrian;
  std::vector<Skeleton3D> skeletons3d;
  std::vector<Skeleton2D> skeletons2d;
  OdometrySample odometry;
  GpsSample gps;
};

struct SceneBundle {
  SceneConfig config;
  Trajectory trajectory;
  std::vector<FrameData> frames;
};

SceneBundle generate_scene(const SceneConfig& config);

/// Adds independent N(0, sigma^2) east/north noise to every pose and
/// converts back to latitude/longitude about `reference`.
std::vector<GpsSample> perturb_gps(const Trajectory& trajectory, double sigma, std::uint64_t seed,
                                   const GpsSample& reference);

/// Detector emulation: jittered, partially dropped GT boxes plus spurious
/// boxes smaller than 7x25 px.
std::vector<BBox> noisy_detections(std::span<const BBox> gt, const DetectorNoise& noise, const CameraIntrinsics& intr,
                                   std::uint64_t seed);

Skeleton2D noisy_joints(const Skeleton2D& gt, const DetectorNoise& noise, std::uint64_t seed);

/// Independent stream seed for (master seed, stream index).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

}  // namespace pedrecon::synth
