#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "pedrecon/alignment.hpp"

namespace pedrecon {

inline constexpr int kJointCount = 17;
inline constexpr int kLimbCount = 16;

enum Joint : int {
  pelvis,
  l_hip,
  r_hip,
  l_knee,
  r_knee,
  l_ankle,
  r_ankle,
  spine,
  thorax,
  neck,
  head,
  l_shoulder,
  r_shoulder,
  l_elbow,
  r_elbow,
  l_wrist,
  r_wrist,
};

struct Limb {
  Joint parent;
  Joint child;
};

// Parent-before-child order, so a forward sweep is a traversal from the root.
inline constexpr std::array<Limb, kLimbCount> kLimbs{{
    {pelvis, l_hip},         {pelvis, r_hip},         {l_hip, l_knee},     {r_hip, r_knee},
    {l_knee, l_ankle},       {r_knee, r_ankle},       {pelvis, spine},     {spine, thorax},
    {thorax, neck},          {neck, head},            {thorax, l_shoulder}, {thorax, r_shoulder},
    {l_shoulder, l_elbow},   {r_shoulder, r_elbow},   {l_elbow, l_wrist},  {r_elbow, r_wrist},
}};

std::string_view joint_name(int joint);
std::string_view limb_name(int limb);
/// -1 for the root.
int parent_of(int joint);
/// Limb whose child is `joint`, -1 for the root.
int limb_ending_at(int joint);

struct Joint2D {
  double u = 0.0;
  double v = 0.0;
  double confidence = 0.0;
  bool valid = false;
};

struct Skeleton2D {
  std::array<Joint2D, kJointCount> joints{};

  int valid_count() const;
};

using JointMatrix = Eigen::Matrix<double, 3, kJointCount>;

struct Skeleton3D {
  JointMatrix positions = JointMatrix::Zero();
  std::array<bool, kJointCount> valid{};

  Eigen::Vector3d joint(int j) const { return positions.col(j); }
  int valid_count() const;
  bool fully_valid() const { return valid_count() == kJointCount; }

  static Skeleton3D from_positions(const JointMatrix& positions);
};

/// Per-limb length, nullopt where either endpoint is invalid.
using LimbLengths = std::array<std::optional<double>, kLimbCount>;

LimbLengths limb_lengths(const Skeleton3D& s);
double hip_length(const Skeleton3D& s);
double backbone_length(const Skeleton3D& s);

/// Canonical plausible poses plus the standard limb proportions.
///
/// Ratios are limb length over backbone length; `hip_ratio` and
/// `stature_ratio` put the hip width and body height on the same scale so
/// any anchor can be converted into per-limb bounds.
struct ReferenceLibrary {
  std::vector<Skeleton3D> poses;
  std::array<double, kLimbCount> limb_ratios{};
  double hip_ratio = 0.0;
  double stature_ratio = 0.0;

  void validate() const;
};

enum class Anchor { hip, backbone, stature };

struct ThresholdOptions {
  Anchor anchor = Anchor::hip;
  double slack = 1.5;
  /// Person height in metres, only read for Anchor::stature.
  double stature = 0.0;
  double min_anchor = 1e-3;
};

struct ThresholdResult {
  Skeleton3D skeleton;
  std::vector<int> clamped_limbs;
};

double anchor_length(const Skeleton3D& s, const ThresholdOptions& options);

/// Largest admissible length of every limb for the given observation.
std::array<double, kLimbCount> limb_bounds(const ReferenceLibrary& lib, double anchor, const ThresholdOptions& options);

/// Clamps over-long limbs top-down from the pelvis. A clamped child moves
/// along its limb to the bound and drags its whole subtree with it.
ThresholdResult threshold_limbs(const Skeleton3D& s, const ReferenceLibrary& lib, const ThresholdOptions& options = {});

struct NearestPose {
  std::size_t index = 0;
  double cost = 0.0;
};

/// Default truncation radius for a library entry: half its backbone.
double default_truncation(const Skeleton3D& entry);

/// Pelvis-centred cost between an observation and a library entry. Valid
/// joints cost min(d^2, tau^2), invalid ones tau^2.
double truncated_cost(const Skeleton3D& query, const Skeleton3D& entry, double tau);

/// Exhaustive search with early abandoning; ties go to the lowest index.
/// Without `tau` each entry uses default_truncation(entry).
NearestPose truncated_nn(const Skeleton3D& query, const ReferenceLibrary& lib, std::optional<double> tau = std::nullopt);

struct ScaleMode {
  enum Kind { free, hip_ratio, backbone_ratio, fixed };
  Kind kind = free;
  double value = 1.0;

  static ScaleMode fixed_at(double s) { return {fixed, s}; }
};

struct Alignment {
  double scale = 1.0;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  /// Sum of squared distances over the joints used for the fit (m^2).
  double residual = 0.0;

  Skeleton3D apply(const Skeleton3D& s) const;
};

/// Aligns `src` onto `dst` over joints valid in both.
Alignment procrustes(const Skeleton3D& src, const Skeleton3D& dst, ScaleMode mode = {});

/// Same, restricted to the joints flagged in `use`.
Alignment procrustes(const Skeleton3D& src, const Skeleton3D& dst, const std::array<bool, kJointCount>& use,
                     ScaleMode mode = {});

struct CorrectionOptions {
  ThresholdOptions threshold{};
  std::optional<double> tau{};
  ScaleMode scale_mode{};
};

struct CorrectedPose {
  Skeleton3D skeleton;
  std::size_t nn_index = 0;
  double nn_cost = 0.0;
  Alignment alignment;
  std::vector<int> clamped_limbs;
  /// Joints that took part in the final alignment.
  std::array<bool, kJointCount> inliers{};
};

/// threshold_limbs -> truncated_nn -> procrustes of the chosen entry onto
/// the thresholded observation. The returned skeleton is the aligned
/// library entry, so it is always plausible.
CorrectedPose correct_pose(const Skeleton3D& s, const ReferenceLibrary& lib, const CorrectionOptions& options = {});

}  // namespace pedrecon
