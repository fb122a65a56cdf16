#include "pedrecon/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace pedrecon {
namespace {

constexpr std::array<std::string_view, kJointCount> kJointNames{
    "pelvis", "l_hip",  "r_hip", "l_knee", "r_knee",     "l_ankle",    "r_ankle", "spine",   "thorax",
    "neck",   "head",   "l_shoulder", "r_shoulder", "l_elbow", "r_elbow", "l_wrist", "r_wrist"};

constexpr std::array<std::string_view, kLimbCount> kLimbNames{
    "pelvis-l_hip",   "pelvis-r_hip",      "l_hip-l_knee",      "r_hip-r_knee",
    "l_knee-l_ankle", "r_knee-r_ankle",    "pelvis-spine",      "spine-thorax",
    "thorax-neck",    "neck-head",         "thorax-l_shoulder", "thorax-r_shoulder",
    "l_shoulder-l_elbow", "r_shoulder-r_elbow", "l_elbow-l_wrist", "r_elbow-r_wrist"};

// Joints below (and including) each joint, in traversal order.
std::array<std::vector<int>, kJointCount> build_subtrees() {
  std::array<std::vector<int>, kJointCount> subtree;
  for (int j = 0; j < kJointCount; ++j) subtree[j].push_back(j);
  // Limbs are parent-first; walking them backwards lets every child's
  // subtree be complete before it is appended to its parent.
  for (int l = kLimbCount - 1; l >= 0; --l) {
    const auto& child = subtree[kLimbs[l].child];
    auto& parent = subtree[kLimbs[l].parent];
    parent.insert(parent.end(), child.begin(), child.end());
  }
  return subtree;
}

const std::array<std::vector<int>, kJointCount>& subtrees() {
  static const auto table = build_subtrees();
  return table;
}

double distance(const Skeleton3D& s, int a, int b) { return (s.positions.col(a) - s.positions.col(b)).norm(); }

std::array<bool, kJointCount> shared_valid(const Skeleton3D& a, const Skeleton3D& b) {
  std::array<bool, kJointCount> out{};
  for (int j = 0; j < kJointCount; ++j) out[j] = a.valid[j] && b.valid[j];
  return out;
}

int count(const std::array<bool, kJointCount>& flags) { return static_cast<int>(std::count(flags.begin(), flags.end(), true)); }

}  // namespace

std::string_view joint_name(int joint) { return kJointNames.at(static_cast<std::size_t>(joint)); }
std::string_view limb_name(int limb) { return kLimbNames.at(static_cast<std::size_t>(limb)); }

int parent_of(int joint) {
  const int limb = limb_ending_at(joint);
  return limb < 0 ? -1 : kLimbs[limb].parent;
}

int limb_ending_at(int joint) {
  for (int l = 0; l < kLimbCount; ++l)
    if (kLimbs[l].child == joint) return l;
  return -1;
}

int Skeleton2D::valid_count() const {
  return static_cast<int>(std::count_if(joints.begin(), joints.end(), [](const Joint2D& j) { return j.valid; }));
}

int Skeleton3D::valid_count() const { return count(valid); }

Skeleton3D Skeleton3D::from_positions(const JointMatrix& positions) {
  Skeleton3D s;
  s.positions = positions;
  s.valid.fill(true);
  return s;
}

LimbLengths limb_lengths(const Skeleton3D& s) {
  LimbLengths out{};
  for (int l = 0; l < kLimbCount; ++l) {
    const auto [p, c] = kLimbs[l];
    if (s.valid[p] && s.valid[c]) out[l] = distance(s, p, c);
  }
  return out;
}

double hip_length(const Skeleton3D& s) {
  return s.valid[l_hip] && s.valid[r_hip] ? distance(s, l_hip, r_hip) : 0.0;
}

double backbone_length(const Skeleton3D& s) {
  return s.valid[pelvis] && s.valid[thorax] ? distance(s, pelvis, thorax) : 0.0;
}

void ReferenceLibrary::validate() const {
  require(!poses.empty(), "reference library is empty");
  for (std::size_t i = 0; i < poses.size(); ++i)
    require(poses[i].fully_valid(), "reference library pose " + std::to_string(i) + " has invalid joints");
  for (double r : limb_ratios) require(r > 0.0, "reference library limb ratios must be positive");
  require(hip_ratio > 0.0 && stature_ratio > 0.0, "reference library anchor ratios must be positive");
}

double anchor_length(const Skeleton3D& s, const ThresholdOptions& options) {
  switch (options.anchor) {
    case Anchor::hip: return hip_length(s);
    case Anchor::backbone: return backbone_length(s);
    case Anchor::stature: return options.stature;
  }
  return 0.0;
}

std::array<double, kLimbCount> limb_bounds(const ReferenceLibrary& lib, double anchor, const ThresholdOptions& options) {
  // Ratios are stored against the backbone; rescale to the chosen anchor.
  double per_backbone = 1.0;
  if (options.anchor == Anchor::hip) per_backbone = lib.hip_ratio;
  if (options.anchor == Anchor::stature) per_backbone = lib.stature_ratio;
  std::array<double, kLimbCount> bounds{};
  for (int l = 0; l < kLimbCount; ++l) bounds[l] = options.slack * lib.limb_ratios[l] / per_backbone * anchor;
  return bounds;
}

ThresholdResult threshold_limbs(const Skeleton3D& s, const ReferenceLibrary& lib, const ThresholdOptions& options) {
  require(options.slack > 0.0, "limb slack must be positive");
  const double anchor = anchor_length(s, options);
  if (!(anchor > options.min_anchor))
    fail(ErrorKind::degenerate, "degenerate anchor length " + std::to_string(anchor) + " m");

  const auto bounds = limb_bounds(lib, anchor, options);
  ThresholdResult out{s, {}};
  auto& p = out.skeleton.positions;
  for (int l = 0; l < kLimbCount; ++l) {
    const auto [parent, child] = kLimbs[l];
    if (!s.valid[parent] || !s.valid[child]) continue;
    const Eigen::Vector3d limb = p.col(child) - p.col(parent);
    const double length = limb.norm();
    if (length <= bounds[l]) continue;
    const Eigen::Vector3d shift = limb * (bounds[l] / length) - limb;
    for (int j : subtrees()[child]) p.col(j) += shift;
    out.clamped_limbs.push_back(l);
  }
  return out;
}

double default_truncation(const Skeleton3D& entry) { return 0.5 * backbone_length(entry); }

double truncated_cost(const Skeleton3D& query, const Skeleton3D& entry, double tau) {
  require(query.valid[pelvis] && entry.valid[pelvis], "truncated cost needs a valid pelvis");
  const double cap = tau * tau;
  const Eigen::Vector3d offset = entry.joint(pelvis) - query.joint(pelvis);
  double cost = 0.0;
  for (int j = 0; j < kJointCount; ++j) {
    if (!query.valid[j]) {
      cost += cap;
      continue;
    }
    cost += std::min((query.positions.col(j) + offset - entry.positions.col(j)).squaredNorm(), cap);
  }
  return cost;
}

NearestPose truncated_nn(const Skeleton3D& query, const ReferenceLibrary& lib, std::optional<double> tau) {
  require(!lib.poses.empty(), "truncated nearest neighbour: empty library");
  require(query.valid_count() >= 1, "truncated nearest neighbour: query has no valid joint");
  require(query.valid[pelvis], "truncated nearest neighbour: query pelvis must be valid");
  if (tau) require(*tau > 0.0, "truncation radius must be positive");

  NearestPose best{0, std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < lib.poses.size(); ++i) {
    const auto& entry = lib.poses[i];
    const double t = tau ? *tau : default_truncation(entry);
    const double cap = t * t;
    const Eigen::Vector3d offset = entry.joint(pelvis) - query.joint(pelvis);
    double cost = 0.0;
    // Terms are non-negative, so a partial sum at or above the incumbent
    // can never win (equal totals lose to the lower index).
    for (int j = 0; j < kJointCount && cost < best.cost; ++j) {
      cost += query.valid[j] ? std::min((query.positions.col(j) + offset - entry.positions.col(j)).squaredNorm(), cap)
                             : cap;
    }
    if (cost < best.cost) best = {i, cost};
  }
  return best;
}

Skeleton3D Alignment::apply(const Skeleton3D& s) const {
  Skeleton3D out = s;
  out.positions = ((scale * rotation) * s.positions).colwise() + translation;
  return out;
}

Alignment procrustes(const Skeleton3D& src, const Skeleton3D& dst, ScaleMode mode) {
  return procrustes(src, dst, shared_valid(src, dst), mode);
}

Alignment procrustes(const Skeleton3D& src, const Skeleton3D& dst, const std::array<bool, kJointCount>& use,
                     ScaleMode mode) {
  std::vector<int> joints;
  for (int j = 0; j < kJointCount; ++j)
    if (use[j] && src.valid[j] && dst.valid[j]) joints.push_back(j);
  require(joints.size() >= 3, "procrustes: fewer than 3 valid correspondences (" + std::to_string(joints.size()) + ")");

  Eigen::Matrix3Xd from(3, joints.size());
  Eigen::Matrix3Xd to(3, joints.size());
  for (std::size_t k = 0; k < joints.size(); ++k) {
    from.col(static_cast<Eigen::Index>(k)) = src.positions.col(joints[k]);
    to.col(static_cast<Eigen::Index>(k)) = dst.positions.col(joints[k]);
  }

  std::optional<double> fixed;
  auto anchor_ratio = [&](double (*measure)(const Skeleton3D&), const char* what) {
    const double a = measure(src);
    const double b = measure(dst);
    if (!(a > 0.0) || !(b > 0.0)) fail(ErrorKind::degenerate, std::string("procrustes: degenerate ") + what + " length");
    return b / a;
  };
  switch (mode.kind) {
    case ScaleMode::free: break;
    case ScaleMode::hip_ratio: fixed = anchor_ratio(hip_length, "hip"); break;
    case ScaleMode::backbone_ratio: fixed = anchor_ratio(backbone_length, "backbone"); break;
    case ScaleMode::fixed: fixed = mode.value; break;
  }

  const auto sim = similarity_align(from, to, fixed);
  Alignment out;
  out.scale = sim.scale;
  out.rotation = sim.rotation;
  out.translation = sim.translation;
  out.residual = (sim.apply(from) - to).colwise().squaredNorm().sum();
  return out;
}

namespace {

// Inlier gate from the lower quartile of the residuals, so up to three
// quarters of the joints may be outliers. Never wider than the truncation
// radius, never tighter than a relative floor.
std::array<bool, kJointCount> select_inliers(const std::array<double, kJointCount>& residual,
                                             const std::array<bool, kJointCount>& usable, double tau) {
  std::vector<double> values;
  for (int j = 0; j < kJointCount; ++j)
    if (usable[j]) values.push_back(residual[j]);
  std::array<bool, kJointCount> in{};
  if (values.empty()) return in;
  std::sort(values.begin(), values.end());
  const double quartile = values[(values.size() - 1) / 4];
  const double gate = std::min(tau, std::max(4.0 * quartile, 1e-6 * tau));
  for (int j = 0; j < kJointCount; ++j) in[j] = usable[j] && residual[j] <= gate;
  return in;
}

}  // namespace

CorrectedPose correct_pose(const Skeleton3D& s, const ReferenceLibrary& lib, const CorrectionOptions& options) {
  require(s.valid_count() >= 3,
          "pose correction: fewer than 3 valid correspondences (" + std::to_string(s.valid_count()) + ")");
  auto thresholded = threshold_limbs(s, lib, options.threshold);
  const Skeleton3D& observed = thresholded.skeleton;

  // Joints moved by clamping no longer carry their measured position, so the
  // search charges them the cap and the fit leaves them out.
  std::array<bool, kJointCount> trusted = observed.valid;
  for (int l : thresholded.clamped_limbs)
    for (int j : subtrees()[kLimbs[l].child]) trusted[j] = false;
  Skeleton3D query = observed;
  query.valid = trusted;
  const NearestPose nn = truncated_nn(query, lib, options.tau);
  const Skeleton3D& entry = lib.poses[nn.index];
  const double tau = options.tau ? *options.tau : default_truncation(entry);

  // Residuals in the pelvis-centred frame used by the search.
  std::array<double, kJointCount> residual{};
  const Eigen::Vector3d offset = observed.joint(pelvis) - entry.joint(pelvis);
  for (int j = 0; j < kJointCount; ++j)
    if (observed.valid[j]) residual[j] = (entry.positions.col(j) + offset - observed.positions.col(j)).norm();

  const std::array<bool, kJointCount>& usable = count(trusted) >= 3 ? trusted : observed.valid;
  auto inliers = select_inliers(residual, usable, tau);
  Alignment alignment;
  bool fitted = false;
  if (count(inliers) >= 3) {
    try {
      alignment = procrustes(entry, observed, inliers, options.scale_mode);
      fitted = true;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::degenerate) throw;
    }
  }
  if (!fitted) {
    inliers = observed.valid;
    alignment = procrustes(entry, observed, inliers, options.scale_mode);
  } else {
    // Re-gate against the fitted residuals until the inlier set settles.
    for (int iter = 0; iter < 10; ++iter) {
      const Skeleton3D aligned = alignment.apply(entry);
      for (int j = 0; j < kJointCount; ++j)
        if (observed.valid[j]) residual[j] = (aligned.positions.col(j) - observed.positions.col(j)).norm();
      const auto next = select_inliers(residual, usable, tau);
      if (next == inliers || count(next) < 3) break;
      try {
        alignment = procrustes(entry, observed, next, options.scale_mode);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::degenerate) throw;
        break;
      }
      inliers = next;
    }
  }

  CorrectedPose out;
  out.skeleton = alignment.apply(entry);
  out.nn_index = nn.index;
  out.nn_cost = nn.cost;
  out.alignment = alignment;
  out.clamped_limbs = std::move(thresholded.clamped_limbs);
  out.inliers = inliers;
  return out;
}

}  // namespace pedrecon
