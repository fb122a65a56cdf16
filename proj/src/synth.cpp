#include "pedrecon/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace pedrecon::synth {
namespace {

using Eigen::Vector3d;
constexpr double kPi = std::numbers::pi;
constexpr double kNoHit = std::numeric_limits<double>::infinity();

struct Capsule {
  Vector3d a;
  Vector3d b;
  double radius;
};

struct PedestrianGeometry {
  std::vector<Capsule> capsules;
  Vector3d centre;
  double bound;  // bounding-sphere radius
};

// Capsule radii per limb as fractions of a 1.75 m body.
constexpr std::array<double, kLimbCount> kLimbRadius{0.09, 0.09, 0.07,  0.07,  0.06,  0.06,  0.14,  0.14,
                                                     0.05, 0.05, 0.06,  0.06,  0.045, 0.045, 0.04,  0.04};
constexpr double kHeadRadius = 0.08;

PedestrianGeometry body_geometry(const Skeleton3D& s, double stature) {
  const double k = stature / BodyProportions{}.stature;
  PedestrianGeometry g;
  for (int l = 0; l < kLimbCount; ++l)
    g.capsules.push_back({s.joint(kLimbs[l].parent), s.joint(kLimbs[l].child), kLimbRadius[l] * k});
  g.capsules.push_back({s.joint(head), s.joint(head), kHeadRadius * k});
  g.centre = s.positions.rowwise().mean();
  g.bound = 0.0;
  for (const auto& c : g.capsules)
    g.bound = std::max({g.bound, (c.a - g.centre).norm() + c.radius, (c.b - g.centre).norm() + c.radius});
  return g;
}

// Distance along a unit ray to a capsule, kNoHit on a miss.
double hit_capsule(const Vector3d& ro, const Vector3d& rd, const Capsule& c) {
  const Vector3d ba = c.b - c.a;
  const Vector3d oa = ro - c.a;
  const double baba = ba.dot(ba);
  const double r2 = c.radius * c.radius;
  if (baba > 1e-18) {
    const double bard = ba.dot(rd);
    const double baoa = ba.dot(oa);
    const double rdoa = rd.dot(oa);
    const double oaoa = oa.dot(oa);
    const double qa = baba - bard * bard;
    const double qb = baba * rdoa - baoa * bard;
    const double qc = baba * oaoa - baoa * baoa - r2 * baba;
    if (qa > 1e-18) {
      const double h = qb * qb - qa * qc;
      if (h < 0.0) return kNoHit;
      const double t = (-qb - std::sqrt(h)) / qa;
      const double y = baoa + t * bard;
      if (y > 0.0 && y < baba) return t > 0.0 ? t : kNoHit;
      const Vector3d oc = y <= 0.0 ? oa : Vector3d(ro - c.b);
      const double sb = rd.dot(oc);
      const double sh = sb * sb - (oc.dot(oc) - r2);
      if (sh <= 0.0) return kNoHit;
      const double ts = -sb - std::sqrt(sh);
      return ts > 0.0 ? ts : kNoHit;
    }
  }
  // Sphere at a (degenerate segment or ray parallel to the axis: nearest cap).
  double best = kNoHit;
  for (const Vector3d& centre : {c.a, c.b}) {
    const Vector3d oc = ro - centre;
    const double sb = rd.dot(oc);
    const double sh = sb * sb - (oc.dot(oc) - r2);
    if (sh <= 0.0) continue;
    const double ts = -sb - std::sqrt(sh);
    if (ts > 0.0) best = std::min(best, ts);
  }
  return best;
}

bool hits_sphere(const Vector3d& ro, const Vector3d& rd, const Vector3d& centre, double radius, double limit) {
  const Vector3d oc = ro - centre;
  const double sb = rd.dot(oc);
  const double sh = sb * sb - (oc.dot(oc) - radius * radius);
  if (sh < 0.0) return false;
  const double far = -sb + std::sqrt(sh);
  const double near = -sb - std::sqrt(sh);
  return far > 0.0 && near < limit;
}

// Ray parameter of the entry point into an axis-aligned box (slab test).
double hit_box(const Vector3d& ro, const Vector3d& inv, const Eigen::AlignedBox3d& box) {
  double t0 = 0.0;
  double t1 = kNoHit;
  for (int i = 0; i < 3; ++i) {
    double a = (box.min()(i) - ro(i)) * inv(i);
    double b = (box.max()(i) - ro(i)) * inv(i);
    if (std::isnan(a) || std::isnan(b)) {
      // Ray parallel to this slab and starting on its plane.
      if (ro(i) < box.min()(i) || ro(i) > box.max()(i)) return kNoHit;
      continue;
    }
    if (a > b) std::swap(a, b);
    t0 = std::max(t0, a);
    t1 = std::min(t1, b);
    if (t0 > t1) return kNoHit;
  }
  return t0 > 0.0 ? t0 : kNoHit;
}

double uniform(std::mt19937_64& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::array<double, kLimbCount> BodyProportions::limb_lengths() const {
  return {hip,  hip,  thigh,    thigh,    shin,      shin,      lower_spine, upper_spine,
          neck, head, shoulder, shoulder, upper_arm, upper_arm, forearm,     forearm};
}

Skeleton3D gait_pose(double phase, double amplitude, double heading, double stature) {
  const BodyProportions b;
  const double k = stature / b.stature;
  const Vector3d f(std::cos(heading), std::sin(heading), 0.0);
  const Vector3d l(-std::sin(heading), std::cos(heading), 0.0);
  const Vector3d z = Vector3d::UnitZ();
  // Unit direction tilted `angle` from straight down towards the front.
  auto swing = [&](double angle) -> Vector3d { return std::sin(angle) * f - std::cos(angle) * z; };
  auto tilt = [&](double angle) -> Vector3d { return std::sin(angle) * f + std::cos(angle) * z; };

  const double s = std::sin(phase);
  const double c = std::cos(phase);
  const double lean = 0.12 * amplitude;
  const Vector3d torso = tilt(lean);

  JointMatrix p = JointMatrix::Zero();
  p.col(l_hip) = k * b.hip * l;
  p.col(r_hip) = -k * b.hip * l;
  const double thigh_l = amplitude * s;
  const double thigh_r = -thigh_l;
  const double bend_l = 0.6 * amplitude * (1.0 + c);
  const double bend_r = 0.6 * amplitude * (1.0 - c);
  p.col(l_knee) = p.col(l_hip) + k * b.thigh * swing(thigh_l);
  p.col(r_knee) = p.col(r_hip) + k * b.thigh * swing(thigh_r);
  p.col(l_ankle) = p.col(l_knee) + k * b.shin * swing(thigh_l - bend_l);
  p.col(r_ankle) = p.col(r_knee) + k * b.shin * swing(thigh_r - bend_r);

  p.col(spine) = k * b.lower_spine * torso;
  p.col(thorax) = p.col(spine) + k * b.upper_spine * torso;
  p.col(neck) = p.col(thorax) + k * b.neck * torso;
  p.col(head) = p.col(neck) + k * b.head * tilt(lean + 0.15 * amplitude * std::sin(2.0 * phase));

  p.col(l_shoulder) = p.col(thorax) + k * b.shoulder * l;
  p.col(r_shoulder) = p.col(thorax) - k * b.shoulder * l;
  const double arm_l = -0.8 * amplitude * s;
  const double arm_r = -arm_l;
  p.col(l_elbow) = p.col(l_shoulder) + k * b.upper_arm * swing(arm_l);
  p.col(r_elbow) = p.col(r_shoulder) + k * b.upper_arm * swing(arm_r);
  p.col(l_wrist) = p.col(l_elbow) + k * b.forearm * swing(arm_l + 0.25 + 0.25 * amplitude * (1.0 - s));
  p.col(r_wrist) = p.col(r_elbow) + k * b.forearm * swing(arm_r + 0.25 + 0.25 * amplitude * (1.0 + s));
  return Skeleton3D::from_positions(p);
}

double pelvis_height(const Skeleton3D& root_centred, double stature) {
  const double k = stature / BodyProportions{}.stature;
  const double lowest = std::min(root_centred.positions(2, l_ankle), root_centred.positions(2, r_ankle));
  return -lowest + k * BodyProportions{}.ankle_height;
}

ReferenceLibrary reference_ratios() {
  const BodyProportions b;
  ReferenceLibrary lib;
  const auto lengths = b.limb_lengths();
  for (int l = 0; l < kLimbCount; ++l) lib.limb_ratios[l] = lengths[l] / b.backbone();
  lib.hip_ratio = 2.0 * b.hip / b.backbone();
  lib.stature_ratio = b.stature / b.backbone();
  return lib;
}

ReferenceLibrary generate_reference_library() {
  ReferenceLibrary lib = reference_ratios();
  for (int h = 0; h < 8; ++h) {
    const double heading = h * kPi / 4.0;
    lib.poses.push_back(gait_pose(0.0, 0.0, heading));
    for (int k = 0; k < 24; ++k) lib.poses.push_back(gait_pose((k + 0.5) * 2.0 * kPi / 24.0, 0.45, heading));
  }
  return lib;
}

ReferenceLibrary random_reference_library(std::size_t count, std::uint64_t seed) {
  ReferenceLibrary lib = reference_ratios();
  std::mt19937_64 rng(seed);
  lib.poses.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double phase = uniform(rng, 0.0, 2.0 * kPi);
    const double amplitude = uniform(rng, 0.0, 0.6);
    const double heading = uniform(rng, -kPi, kPi);
    lib.poses.push_back(gait_pose(phase, amplitude, heading));
  }
  return lib;
}

void SceneConfig::validate() const {
  camera.validate();
  require(frame_count >= 1, "scene: frame_count must be at least 1");
  require(frame_rate > 0.0, "scene: frame_rate must be positive");
  require(camera_height > 0.0, "scene: camera height must be positive");
  require(!vehicle_profile.empty(), "scene: empty vehicle profile");
  for (const auto& v : vehicle_profile) require(v.x() >= 0.0, "scene: vehicle speed must be non-negative");
  require(gps_noise_sigma >= 0.0, "scene: GPS noise must be non-negative");
  for (const auto& p : pedestrians) {
    require(p.stature >= 1.0 && p.stature <= 2.2, "scene: pedestrian height must lie in [1.0, 2.2] m");
    require(p.speed >= 0.0, "scene: pedestrian speed must be non-negative");
    require(p.label == SemanticClass::person || p.label == SemanticClass::rider,
            "scene: pedestrians must be labelled person or rider");
  }
  for (const auto& b : boxes) require((b.box.sizes().array() > 0.0).all(), "scene: empty box primitive");
  const auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  require(noise.box_jitter >= 0.0 && noise.joint_jitter >= 0.0, "scene: jitter must be non-negative");
  require(in_unit(noise.box_dropout) && in_unit(noise.joint_dropout) && in_unit(noise.spurious_rate),
          "scene: noise probabilities must lie in [0, 1]");
}

SceneConfig SceneConfig::street(std::uint64_t seed, int pedestrians, int cars) {
  SceneConfig cfg;
  cfg.seed = seed;
  std::mt19937_64 rng(derive_seed(seed, 0));

  for (int side : {-1, 1}) {
    // Building fronts.
    for (double x = -20.0; x < 140.0;) {
      const double width = uniform(rng, 10.0, 25.0);
      const double depth = uniform(rng, 8.0, 15.0);
      const double height = uniform(rng, 6.0, 18.0);
      const double y0 = side * 10.0;
      const double y1 = side * (10.0 + depth);
      cfg.boxes.push_back({Eigen::AlignedBox3d(Vector3d(x, std::min(y0, y1), 0.0),
                                               Vector3d(x + width - 1.0, std::max(y0, y1), height)),
                           SemanticClass::building});
      x += width;
    }
    // Trees and poles between the sidewalk and the buildings.
    for (int i = 0; i < 5; ++i) {
      const double x = uniform(rng, 0.0, 100.0);
      cfg.boxes.push_back({Eigen::AlignedBox3d(Vector3d(x, side * 8.6 - 0.4, 0.0),
                                               Vector3d(x + 0.8, side * 8.6 + 0.4, uniform(rng, 3.0, 5.0))),
                           SemanticClass::vegetation});
    }
    const double px = uniform(rng, 5.0, 60.0);
    cfg.boxes.push_back({Eigen::AlignedBox3d(Vector3d(px, side * 5.3 - 0.1, 0.0), Vector3d(px + 0.2, side * 5.3 + 0.1, 4.0)),
                         SemanticClass::pole});
  }
  for (int i = 0; i < cars; ++i) {
    const int side = i % 2 == 0 ? -1 : 1;
    const double x = 58.0 + 9.0 * (i / 2) + uniform(rng, 0.0, 3.0);
    const double y = side * (cfg.road_half_width - 1.1);
    cfg.boxes.push_back({Eigen::AlignedBox3d(Vector3d(x, y - 0.9, 0.0), Vector3d(x + 4.5, y + 0.9, 1.5)),
                         SemanticClass::car});
  }
  for (int i = 0; i < pedestrians; ++i) {
    PedestrianSpec p;
    const int side = i % 2 == 0 ? 1 : -1;
    p.start = {uniform(rng, 30.0, 55.0), side * uniform(rng, 5.8, 7.4)};
    p.heading = (uniform(rng, 0.0, 1.0) < 0.5 ? 0.0 : kPi) + uniform(rng, -0.15, 0.15);
    p.speed = uniform(rng, 1.0, 1.6);
    p.gait_amplitude = uniform(rng, 0.3, 0.5);
    p.stature = uniform(rng, 1.55, 1.95);
    p.phase = uniform(rng, 0.0, 2.0 * kPi);
    p.label = i % 5 == 4 ? SemanticClass::rider : SemanticClass::person;
    cfg.pedestrians.push_back(p);
  }
  return cfg;
}

Skeleton3D pedestrian_skeleton(const SceneConfig& config, std::size_t index, double t) {
  const PedestrianSpec& p = config.pedestrians.at(index);
  // Cadence scales with walking speed: about one stride per second at 1.3 m/s.
  const double phase = p.phase + 2.0 * kPi * t * p.speed / 1.3;
  Skeleton3D s = gait_pose(phase, p.gait_amplitude, p.heading, p.stature);
  const Vector3d base(p.start.x() + p.speed * t * std::cos(p.heading), p.start.y() + p.speed * t * std::sin(p.heading),
                      pelvis_height(s, p.stature));
  s.positions.colwise() += base;
  return s;
}

RenderedFrame render_frame(const SceneConfig& config, const RigidPose& pose, double t) {
  const CameraIntrinsics& cam = config.camera;
  RenderedFrame out{DisparityMap(cam.width, cam.height, 0.0),
                    SegmentationMask(cam.width, cam.height, class_id(SemanticClass::static_object)),
                    Raster<std::int32_t>(cam.width, cam.height, -1)};

  std::vector<PedestrianGeometry> bodies;
  for (std::size_t i = 0; i < config.pedestrians.size(); ++i)
    bodies.push_back(body_geometry(pedestrian_skeleton(config, i, t), config.pedestrians[i].stature));

  const Vector3d origin = pose.translation;
  const auto person_count = static_cast<std::int32_t>(config.pedestrians.size());
  for (int v = 0; v < cam.height; ++v) {
    for (int u = 0; u < cam.width; ++u) {
      // Camera-frame direction with unit z, so the ray parameter is depth.
      const Vector3d dir = pose.rotation * Vector3d((u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, 1.0);
      double best = kNoHit;
      SemanticClass label = SemanticClass::static_object;
      std::int32_t instance = -1;

      if (config.ground_plane && dir.z() < 0.0 && origin.z() > 0.0) {
        best = -origin.z() / dir.z();
        const double y = origin.y() + best * dir.y();
        label = std::abs(y) <= config.road_half_width ? SemanticClass::road : SemanticClass::sidewalk;
      }
      const Vector3d inv = dir.cwiseInverse();
      for (std::size_t b = 0; b < config.boxes.size(); ++b) {
        const double hit = hit_box(origin, inv, config.boxes[b].box);
        if (hit < best) {
          best = hit;
          label = config.boxes[b].label;
          instance = person_count + static_cast<std::int32_t>(b);
        }
      }
      const double norm = dir.norm();
      const Vector3d unit = dir / norm;
      for (std::size_t p = 0; p < bodies.size(); ++p) {
        if (!hits_sphere(origin, unit, bodies[p].centre, bodies[p].bound, best * norm)) continue;
        for (const auto& capsule : bodies[p].capsules) {
          const double hit = hit_capsule(origin, unit, capsule) / norm;
          if (hit < best) {
            best = hit;
            label = config.pedestrians[p].label;
            instance = static_cast<std::int32_t>(p);
          }
        }
      }
      if (best < kNoHit) {
        out.disparity(u, v) = cam.disparity(best);
        out.instance(u, v) = instance;
      }
      out.segmentation(u, v) = static_cast<std::uint8_t>(label);
    }
  }
  if (config.quantize) out.disparity = quantize(out.disparity);
  return out;
}

DisparityMap render_joint_disparity(std::span<const Skeleton3D> skeletons, const CameraIntrinsics& intr,
                                    const RigidPose& pose, int window) {
  require(window > 0 && window % 2 == 1, "joint disparity window must be a positive odd size");
  DisparityMap map(intr.width, intr.height, 0.0);
  Raster<double> owner(intr.width, intr.height, kNoHit);
  const RigidPose to_camera = pose.inverse();
  const int half = window / 2;
  for (const auto& s : skeletons) {
    for (int j = 0; j < kJointCount; ++j) {
      if (!s.valid[j]) continue;
      const Vector3d pc = to_camera * Vector3d(s.positions.col(j));
      if (pc.z() <= 0.0) continue;
      const Vector3d uvd = project_point(pc, intr);
      const int cu = static_cast<int>(std::lround(uvd.x()));
      const int cv = static_cast<int>(std::lround(uvd.y()));
      for (int dv = -half; dv <= half; ++dv)
        for (int du = -half; du <= half; ++du) {
          const int pu = cu + du;
          const int pv = cv + dv;
          if (!map.contains(pu, pv)) continue;
          const double d2 = (pu - uvd.x()) * (pu - uvd.x()) + (pv - uvd.y()) * (pv - uvd.y());
          if (d2 < owner(pu, pv) || (d2 == owner(pu, pv) && uvd.z() > map(pu, pv))) {
            owner(pu, pv) = d2;
            map(pu, pv) = uvd.z();
          }
        }
    }
  }
  return map;
}

std::vector<std::optional<BBox>> instance_boxes(const Raster<std::int32_t>& instance, int instance_count) {
  std::vector<std::array<int, 4>> bounds(static_cast<std::size_t>(instance_count),
                                         {std::numeric_limits<int>::max(), std::numeric_limits<int>::max(), -1, -1});
  for (int v = 0; v < instance.height(); ++v)
    for (int u = 0; u < instance.width(); ++u) {
      const int id = instance(u, v);
      if (id < 0 || id >= instance_count) continue;
      auto& b = bounds[static_cast<std::size_t>(id)];
      b = {std::min(b[0], u), std::min(b[1], v), std::max(b[2], u), std::max(b[3], v)};
    }
  std::vector<std::optional<BBox>> out(bounds.size());
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    const auto& b = bounds[i];
    if (b[2] < 0) continue;
    BBox box;
    box.x = b[0];
    box.y = b[1];
    box.w = b[2] - b[0] + 1;
    box.h = b[3] - b[1] + 1;
    out[i] = box;
  }
  return out;
}

SceneBundle generate_scene(const SceneConfig& config) {
  config.validate();
  SceneBundle bundle;
  bundle.config = config;

  std::vector<OdometrySample> odometry;
  for (int i = 0; i < config.frame_count; ++i) {
    const auto& v = config.vehicle_profile[std::min<std::size_t>(static_cast<std::size_t>(i), config.vehicle_profile.size() - 1)];
    odometry.push_back({i / config.frame_rate, v.x(), v.y()});
  }
  bundle.trajectory = integrate_odometry(odometry, planar_rig_pose(0.0, 0.0, config.camera_height, 0.0));
  const auto gps = perturb_gps(bundle.trajectory, config.gps_noise_sigma, derive_seed(config.seed, 1u << 20),
                               config.gps_reference);

  const int people = static_cast<int>(config.pedestrians.size());
  const int instances = people + static_cast<int>(config.boxes.size());
  for (int i = 0; i < config.frame_count; ++i) {
    FrameData frame;
    frame.timestamp = odometry[static_cast<std::size_t>(i)].timestamp;
    frame.pose = bundle.trajectory[static_cast<std::size_t>(i)];
    frame.odometry = odometry[static_cast<std::size_t>(i)];
    frame.gps = gps[static_cast<std::size_t>(i)];
    RenderedFrame r = render_frame(config, frame.pose, frame.timestamp);

    const auto boxes = instance_boxes(r.instance, instances);
    for (int k = 0; k < instances; ++k) {
      if (!boxes[static_cast<std::size_t>(k)]) continue;
      BBox box = *boxes[static_cast<std::size_t>(k)];
      if (k < people) {
        box.label = config.pedestrians[static_cast<std::size_t>(k)].label;
        frame.gt_boxes.push_back(box);
        frame.gt_box_pedestrian.push_back(k);
      } else if (config.boxes[static_cast<std::size_t>(k - people)].label == SemanticClass::car) {
        box.label = SemanticClass::car;
        frame.gt_boxes.push_back(box);
        frame.gt_box_pedestrian.push_back(-1);
      }
    }
    for (int p = 0; p < people; ++p) {
      frame.skeletons3d.push_back(pedestrian_skeleton(config, static_cast<std::size_t>(p), frame.timestamp));
      frame.skeletons2d.push_back(project_skeleton(frame.skeletons3d.back(), config.camera, frame.pose));
    }
    frame.disparity = std::move(r.disparity);
    frame.segmentation = std::move(r.segmentation);
    bundle.frames.push_back(std::move(frame));
  }
  return bundle;
}

std::vector<GpsSample> perturb_gps(const Trajectory& trajectory, double sigma, std::uint64_t seed,
                                   const GpsSample& reference) {
  require(sigma >= 0.0, "GPS noise sigma must be non-negative");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<GpsSample> out;
  out.reserve(trajectory.size());
  for (const auto& tp : trajectory.poses) {
    Eigen::Vector2d xy = tp.pose.translation.head<2>();
    const double dx = noise(rng);
    const double dy = noise(rng);
    xy += sigma * Eigen::Vector2d(dx, dy);
    out.push_back(local_to_gps(xy, tp.timestamp, reference));
  }
  return out;
}

std::vector<BBox> noisy_detections(std::span<const BBox> gt, const DetectorNoise& noise, const CameraIntrinsics& intr,
                                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> jitter(0.0, 1.0);
  std::vector<BBox> out;
  for (const auto& g : gt) {
    const bool dropped = uniform(rng, 0.0, 1.0) < noise.box_dropout;
    BBox b = g;
    b.x += noise.box_jitter * jitter(rng);
    b.y += noise.box_jitter * jitter(rng);
    b.w = std::max(1.0, b.w + noise.box_jitter * jitter(rng));
    b.h = std::max(1.0, b.h + noise.box_jitter * jitter(rng));
    b.score = uniform(rng, 0.6, 1.0);
    if (!dropped) out.push_back(b);
    if (uniform(rng, 0.0, 1.0) < noise.spurious_rate) {
      BBox s;
      s.w = uniform(rng, 2.0, 6.5);
      s.h = uniform(rng, 6.0, 24.0);
      s.x = uniform(rng, 0.0, intr.width - s.w);
      s.y = uniform(rng, 0.0, intr.height - s.h);
      s.label = g.label;
      s.score = uniform(rng, 0.3, 0.6);
      out.push_back(s);
    }
  }
  return out;
}

Skeleton2D noisy_joints(const Skeleton2D& gt, const DetectorNoise& noise, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> jitter(0.0, 1.0);
  Skeleton2D out = gt;
  for (auto& j : out.joints) {
    const double du = jitter(rng);
    const double dv = jitter(rng);
    const bool dropped = uniform(rng, 0.0, 1.0) < noise.joint_dropout;
    if (!j.valid) continue;
    j.u += noise.joint_jitter * du;
    j.v += noise.joint_jitter * dv;
    j.confidence = dropped ? 0.0 : uniform(rng, 0.5, 1.0);
    j.valid = !dropped;
  }
  return out;
}

}  // namespace pedrecon::synth
