#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>

#include "pedrecon/io.hpp"
#include "pedrecon/metrics.hpp"
#include "pedrecon/skeleton.hpp"
#include "pedrecon/synth.hpp"

namespace pedrecon {

/// Detection, joint-distance and size-filter evaluation of one detector against GT.
struct EvaluationReport {
  std::string model = "estimate";
  MatchReport matches;
  // Joint distances over estimates kept by the cross-over filter.
  std::optional<double> mpjds;
  std::optional<double> mpjds_norm;
  std::size_t pedestrians = 0;
  std::size_t bikers = 0;
  std::optional<double> crossover_pedestrians;
  std::optional<double> crossover_bikers;
  // Before / after the minimum-size filter.
  std::size_t tp_before = 0;
  std::size_t fp_before = 0;
  std::size_t tp_after = 0;
  std::size_t fp_after = 0;
  std::array<double, kJointCount> per_joint{};
  bool has_per_joint = false;
  io::KeyValues metadata;
};

struct EvaluationOptions {
  double iou_threshold = 0.5;
  double crossover_threshold = 0.5;
  double min_w = 7.0;
  double min_h = 25.0;
  bool crossover_relative_to_estimate = false;
  bool merge_adjacent_bikes = true;
};

/// Pedestrian classes taking part in box evaluation.
bool is_human(SemanticClass c);

/// Evaluates per frame and pools the results. `masks` and `joints` are
/// optional (empty maps skip the MPJDS columns). Joint person ids index the
/// frame's estimated boxes in file order.
EvaluationReport evaluate(const std::map<int, std::vector<BBox>>& gt, const std::map<int, std::vector<BBox>>& est,
                          const std::map<int, SegmentationMask>& masks,
                          const std::map<std::pair<int, int>, Skeleton2D>& joints, const EvaluationOptions& options = {});

std::string format_report(const EvaluationReport& report);

struct PipelineConfig {
  std::filesystem::path out_dir;
  // Inputs. With `synth` the inputs are generated into out_dir/input first.
  bool synth = false;
  synth::SceneConfig scene;
  std::filesystem::path calib, odometry, gps, disparity_dir, seg_dir, joints, library, gt_boxes, est_boxes, masks_dir;
  std::string trajectory_source = "odometry";
  double rig_height = 0.0;
  /// Local frame origin for GPS input; the first fix when unset.
  std::optional<GpsSample> gps_reference;
  // Reconstruction.
  double resolution = kDefaultVoxelResolution;
  bool drop_dynamic = true;
  bool exclude_dynamic = false;
  int stride = 1;
  // Pose correction.
  CorrectionOptions correction{};
  int window = 5;
  // Evaluation.
  EvaluationOptions evaluation{};
};

/// Scene keys shared by `synth --config` and synthetic pipelines.
synth::SceneConfig scene_config_from(const io::KeyValues& kv, std::uint64_t seed, const std::string& origin);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

/// Writes a scene bundle in the on-disk formats (calibration, odometry, GPS,
/// disparity and segmentation frames, GT / noisy boxes and joints, library).
void write_bundle(const synth::SceneBundle& bundle, const std::filesystem::path& dir);

struct PipelineResult {
  Trajectory trajectory;
  VoxelGrid voxels;
  std::vector<io::PoseRecord> poses;
  std::optional<EvaluationReport> report;
};

/// trajectory -> backprojection -> voxelisation -> triangulation ->
/// correction -> evaluation. Stage failures are rethrown with the stage name.
PipelineResult run_pipeline(const PipelineConfig& config);

Anchor parse_anchor(const std::string& text);
ScaleMode parse_scale_mode(const std::string& text);

}  // namespace pedrecon
