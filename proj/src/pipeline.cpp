#include "pedrecon/pipeline.hpp"

#include <cmath>
#include <set>

namespace pedrecon {
namespace {

namespace fs = std::filesystem;

// Runs one stage, prefixing any failure with its name.
template <typename F>
auto stage(const char* name, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    fail(e.kind(), std::string(name) + ": " + e.what());
  } catch (const fs::filesystem_error& e) {
    fail(ErrorKind::io, std::string(name) + ": " + e.what());
  }
}

std::string optional_number(const std::optional<double>& v) { return v ? io::format_number(*v) : "nan"; }

int get_int_or(const io::KeyValues& kv, const std::string& key, int fallback, const std::string& origin) {
  const double v = io::get_number_or(kv, key, fallback, origin);
  if (v != std::floor(v) || std::abs(v) > 1e9) fail(ErrorKind::format, origin + ": key '" + key + "' must be an integer");
  return static_cast<int>(v);
}

const std::set<std::string> kSceneKeys{
    "frames",      "frame_rate",   "pedestrians",   "cars",          "speed",        "yaw_rate",
    "gps_sigma",   "box_jitter",   "box_dropout",   "spurious_rate", "joint_jitter", "joint_dropout",
    "quantize",    "camera_height", "fx",           "fy",            "cx",           "cy",
    "baseline",    "width",        "height",
};

const std::set<std::string> kPipelineKeys{
    "out_dir",   "synth",      "seed",          "calib",         "odometry",      "gps",          "disparity_dir",
    "seg_dir",   "joints",     "library",       "gt_boxes",      "est_boxes",     "masks_dir",    "trajectory_source",
    "rig_height", "gps_reference_lat", "gps_reference_lon", "resolution", "drop_dynamic", "exclude_dynamic",
    "stride",    "window",     "anchor",        "beta",          "tau",           "scale_mode",   "stature",
    "iou",       "crossover",  "min_w",         "min_h",         "crossover_denominator", "merge_bikes",
};

std::vector<BBox> humans(const std::vector<BBox>& boxes) {
  std::vector<BBox> out;
  for (const auto& b : boxes)
    if (is_human(b.label)) out.push_back(b);
  return out;
}

}  // namespace

bool is_human(SemanticClass c) { return c == SemanticClass::person || c == SemanticClass::rider; }

EvaluationReport evaluate(const std::map<int, std::vector<BBox>>& gt, const std::map<int, std::vector<BBox>>& est,
                          const std::map<int, SegmentationMask>& masks,
                          const std::map<std::pair<int, int>, Skeleton2D>& joints, const EvaluationOptions& options) {
  std::set<int> frames;
  for (const auto& [f, boxes] : gt) frames.insert(f);
  for (const auto& [f, boxes] : est) frames.insert(f);

  EvaluationReport report;
  std::vector<JointDistances> samples;
  double norm_sum = 0.0;
  double crossover_sum[2] = {0.0, 0.0};
  static const std::vector<BBox> none;

  for (int f : frames) {
    const auto gt_it = gt.find(f);
    const auto est_it = est.find(f);
    const std::vector<BBox> gt_h = humans(gt_it == gt.end() ? none : gt_it->second);
    const std::vector<BBox>& est_all = est_it == est.end() ? none : est_it->second;
    const std::vector<BBox> est_h = humans(est_all);

    const MatchReport r = match_boxes(gt_h, est_h, options.iou_threshold);
    report.matches = merge(report.matches, r);
    const MatchReport filtered =
        match_boxes(gt_h, filter_min_size(est_h, options.min_w, options.min_h), options.iou_threshold);
    report.tp_after += filtered.true_positives;
    report.fp_after += filtered.false_positives;

    std::optional<Raster<double>> distances;
    bool no_humans = false;
    for (std::size_t i = 0; i < est_all.size(); ++i) {
      const BBox& box = est_all[i];
      if (!is_human(box.label)) continue;
      const CrossoverHit hit = best_crossover(gt_h, box, options.crossover_relative_to_estimate);
      if (!hit.gt || hit.crossover < options.crossover_threshold) continue;
      const bool biker = box.label == SemanticClass::rider;
      ++(biker ? report.bikers : report.pedestrians);
      crossover_sum[biker ? 1 : 0] += hit.crossover;

      const auto skeleton = joints.find({f, static_cast<int>(i)});
      const auto mask = masks.find(f);
      if (skeleton == joints.end() || mask == masks.end() || skeleton->second.valid_count() == 0 || no_humans)
        continue;
      if (!distances) {
        const BinaryMask human = human_mask(mask->second, options.merge_adjacent_bikes);
        // no human pixel means no distance to measure
        no_humans = std::find(human.values().begin(), human.values().end(), 1) == human.values().end();
        if (no_humans) continue;
        distances = squared_distance_transform(human);
      }
      samples.push_back(mpjds(skeleton->second, *distances));
      norm_sum += mpjds_normalized(samples.back().mean, gt_h[*hit.gt]);
    }
  }
  report.tp_before = report.matches.true_positives;
  report.fp_before = report.matches.false_positives;
  if (report.pedestrians > 0) report.crossover_pedestrians = crossover_sum[0] / static_cast<double>(report.pedestrians);
  if (report.bikers > 0) report.crossover_bikers = crossover_sum[1] / static_cast<double>(report.bikers);
  if (!samples.empty()) {
    double sum = 0.0;
    for (const auto& s : samples) sum += s.mean;
    report.mpjds = sum / static_cast<double>(samples.size());
    report.mpjds_norm = norm_sum / static_cast<double>(samples.size());
    report.per_joint = per_joint_report(samples);
    report.has_per_joint = true;
  }
  report.metadata["mpjds_norm"] = "mean distance / gt box height";
  report.metadata["crossover_denominator"] = options.crossover_relative_to_estimate ? "estimate area" : "gt area";
  report.metadata["iou_threshold"] = io::format_number(options.iou_threshold);
  report.metadata["crossover_threshold"] = io::format_number(options.crossover_threshold);
  report.metadata["min_size"] = io::format_number(options.min_w) + "x" + io::format_number(options.min_h);
  report.metadata["mpjds_samples"] = std::to_string(samples.size());
  return report;
}

std::string format_report(const EvaluationReport& r) {
  const auto& m = r.matches;
  std::string out;
  out += "[detection]\nmodel,tp,fp,fn,tp_area,fp_area,fn_area\n";
  out += r.model + "," + std::to_string(m.true_positives) + "," + std::to_string(m.false_positives) + "," +
         std::to_string(m.false_negatives) + "," + io::format_number(m.tp_area) + "," + io::format_number(m.fp_area) +
         "," + io::format_number(m.fn_area) + "\n";
  out += "\n[pose_distance]\nmodel,mpjds,mpjds_norm,pedestrians,bikers,crossover_pedestrians,crossover_bikers\n";
  out += r.model + "," + optional_number(r.mpjds) + "," + optional_number(r.mpjds_norm) + "," +
         std::to_string(r.pedestrians) + "," + std::to_string(r.bikers) + "," +
         optional_number(r.crossover_pedestrians) + "," + optional_number(r.crossover_bikers) + "\n";
  out += "\n[size_filter]\nmodel,tp_before,fp_before,tp_after,fp_after\n";
  out += r.model + "," + std::to_string(r.tp_before) + "," + std::to_string(r.fp_before) + "," +
         std::to_string(r.tp_after) + "," + std::to_string(r.fp_after) + "\n";
  out += "\n[per_joint]\njoint,jds\n";
  for (int j = 0; j < kJointCount; ++j)
    out += std::string(joint_name(j)) + "," +
           (r.has_per_joint ? io::format_number(r.per_joint[static_cast<std::size_t>(j)]) : std::string("nan")) + "\n";
  out += "\n[meta]\nkey,value\n";
  for (const auto& [k, v] : r.metadata) out += k + "," + v + "\n";
  return out;
}

Anchor parse_anchor(const std::string& text) {
  if (text == "hip") return Anchor::hip;
  if (text == "backbone") return Anchor::backbone;
  if (text == "stature") return Anchor::stature;
  fail(ErrorKind::invalid_input, "unknown anchor '" + text + "' (hip, backbone or stature)");
}

ScaleMode parse_scale_mode(const std::string& text) {
  if (text == "free") return {ScaleMode::free, 1.0};
  if (text == "hip") return {ScaleMode::hip_ratio, 1.0};
  if (text == "backbone") return {ScaleMode::backbone_ratio, 1.0};
  if (text.starts_with("fixed:")) {
    const std::string value = text.substr(6);
    char* end = nullptr;
    const double s = std::strtod(value.c_str(), &end);
    if (!value.empty() && *end == '\0' && s > 0.0) return ScaleMode::fixed_at(s);
  }
  fail(ErrorKind::invalid_input, "unknown scale mode '" + text + "' (free, hip, backbone or fixed:<s>)");
}

synth::SceneConfig scene_config_from(const io::KeyValues& kv, std::uint64_t seed, const std::string& origin) {
  synth::SceneConfig c =
      synth::SceneConfig::street(seed, get_int_or(kv, "pedestrians", 5, origin), get_int_or(kv, "cars", 6, origin));
  c.frame_count = get_int_or(kv, "frames", c.frame_count, origin);
  c.frame_rate = io::get_number_or(kv, "frame_rate", c.frame_rate, origin);
  c.vehicle_profile = {Eigen::Vector2d(io::get_number_or(kv, "speed", c.vehicle_profile.front().x(), origin),
                                       io::get_number_or(kv, "yaw_rate", c.vehicle_profile.front().y(), origin))};
  c.gps_noise_sigma = io::get_number_or(kv, "gps_sigma", c.gps_noise_sigma, origin);
  c.noise.box_jitter = io::get_number_or(kv, "box_jitter", 0.0, origin);
  c.noise.box_dropout = io::get_number_or(kv, "box_dropout", 0.0, origin);
  c.noise.spurious_rate = io::get_number_or(kv, "spurious_rate", 0.0, origin);
  c.noise.joint_jitter = io::get_number_or(kv, "joint_jitter", 0.0, origin);
  c.noise.joint_dropout = io::get_number_or(kv, "joint_dropout", 0.0, origin);
  c.quantize = io::get_flag_or(kv, "quantize", c.quantize, origin);
  c.camera_height = io::get_number_or(kv, "camera_height", c.camera_height, origin);
  c.camera.fx = io::get_number_or(kv, "fx", c.camera.fx, origin);
  c.camera.fy = io::get_number_or(kv, "fy", c.camera.fy, origin);
  c.camera.cx = io::get_number_or(kv, "cx", c.camera.cx, origin);
  c.camera.cy = io::get_number_or(kv, "cy", c.camera.cy, origin);
  c.camera.baseline = io::get_number_or(kv, "baseline", c.camera.baseline, origin);
  c.camera.width = get_int_or(kv, "width", c.camera.width, origin);
  c.camera.height = get_int_or(kv, "height", c.camera.height, origin);
  try {
    c.validate();
  } catch (const Error& e) {
    fail(ErrorKind::invalid_input, origin + ": " + e.what());
  }
  return c;
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  const io::KeyValues kv = io::read_key_values(path);
  const std::string origin = path.string();
  for (const auto& [key, value] : kv)
    if (!kPipelineKeys.contains(key) && !kSceneKeys.contains(key))
      fail(ErrorKind::format, origin + ": unknown key '" + key + "'");

  const fs::path base = path.parent_path();
  auto resolve = [&](const std::string& key) -> fs::path {
    const auto it = kv.find(key);
    if (it == kv.end()) return {};
    const fs::path p(it->second);
    return p.is_absolute() ? p : base / p;
  };

  PipelineConfig c;
  c.out_dir = resolve("out_dir");
  if (c.out_dir.empty()) fail(ErrorKind::format, origin + ": missing key 'out_dir'");
  c.synth = io::get_flag_or(kv, "synth", false, origin);
  const double seed = io::get_number_or(kv, "seed", 0.0, origin);
  if (seed < 0.0 || seed != std::floor(seed)) fail(ErrorKind::format, origin + ": seed must be a non-negative integer");
  if (c.synth) {
    c.scene = scene_config_from(kv, static_cast<std::uint64_t>(seed), origin);
    c.rig_height = c.scene.camera_height;
  } else {
    for (const auto& key : kSceneKeys)
      if (kv.contains(key)) fail(ErrorKind::format, origin + ": key '" + key + "' needs synth = true");
  }
  c.calib = resolve("calib");
  c.odometry = resolve("odometry");
  c.gps = resolve("gps");
  c.disparity_dir = resolve("disparity_dir");
  c.seg_dir = resolve("seg_dir");
  c.joints = resolve("joints");
  c.library = resolve("library");
  c.gt_boxes = resolve("gt_boxes");
  c.est_boxes = resolve("est_boxes");
  c.masks_dir = resolve("masks_dir");

  c.trajectory_source = io::get_string_or(kv, "trajectory_source", c.trajectory_source);
  if (c.trajectory_source != "odometry" && c.trajectory_source != "gps")
    fail(ErrorKind::format, origin + ": trajectory_source must be odometry or gps");
  c.rig_height = io::get_number_or(kv, "rig_height", c.rig_height, origin);
  if (kv.contains("gps_reference_lat") || kv.contains("gps_reference_lon"))
    c.gps_reference = GpsSample{0.0, io::get_number(kv, "gps_reference_lat", origin),
                                io::get_number(kv, "gps_reference_lon", origin)};

  c.resolution = io::get_number_or(kv, "resolution", c.resolution, origin);
  c.drop_dynamic = io::get_flag_or(kv, "drop_dynamic", c.drop_dynamic, origin);
  c.exclude_dynamic = io::get_flag_or(kv, "exclude_dynamic", c.exclude_dynamic, origin);
  c.stride = get_int_or(kv, "stride", c.stride, origin);
  c.window = get_int_or(kv, "window", c.window, origin);

  c.correction.threshold.anchor = parse_anchor(io::get_string_or(kv, "anchor", "hip"));
  c.correction.threshold.slack = io::get_number_or(kv, "beta", c.correction.threshold.slack, origin);
  c.correction.threshold.stature = io::get_number_or(kv, "stature", c.correction.threshold.stature, origin);
  if (kv.contains("tau")) c.correction.tau = io::get_number(kv, "tau", origin);
  c.correction.scale_mode = parse_scale_mode(io::get_string_or(kv, "scale_mode", "free"));

  auto& e = c.evaluation;
  e.iou_threshold = io::get_number_or(kv, "iou", e.iou_threshold, origin);
  e.crossover_threshold = io::get_number_or(kv, "crossover", e.crossover_threshold, origin);
  e.min_w = io::get_number_or(kv, "min_w", e.min_w, origin);
  e.min_h = io::get_number_or(kv, "min_h", e.min_h, origin);
  const std::string denominator = io::get_string_or(kv, "crossover_denominator", "gt");
  if (denominator != "gt" && denominator != "estimate")
    fail(ErrorKind::format, origin + ": crossover_denominator must be gt or estimate");
  e.crossover_relative_to_estimate = denominator == "estimate";
  e.merge_adjacent_bikes = io::get_flag_or(kv, "merge_bikes", e.merge_adjacent_bikes, origin);
  return c;
}

void write_bundle(const synth::SceneBundle& bundle, const fs::path& dir) {
  const auto& config = bundle.config;
  io::save_calibration(dir / "calib.txt", config.camera);
  io::save_trajectory(dir / "trajectory_gt.txt", bundle.trajectory);
  io::save_library(dir / "library.txt", synth::generate_reference_library());

  std::vector<OdometrySample> odometry;
  std::vector<GpsSample> gps;
  std::vector<io::DetectionRecord> gt_boxes, detections;
  std::vector<io::JointRecord> gt_joints, joints;
  std::vector<io::PoseRecord> gt_poses;

  synth::DetectorNoise kept = config.noise;
  kept.spurious_rate = 0.0;
  synth::DetectorNoise spurious = config.noise;
  spurious.box_dropout = 1.0;

  for (std::size_t i = 0; i < bundle.frames.size(); ++i) {
    const auto& frame = bundle.frames[i];
    const int id = static_cast<int>(i);
    odometry.push_back(frame.odometry);
    gps.push_back(frame.gps);
    io::save_disparity(dir / "disparity" / io::frame_file_name("disparity", id), frame.disparity);
    io::save_segmentation(dir / "segmentation" / io::frame_file_name("segmentation", id), frame.segmentation);

    const std::uint64_t frame_seed = synth::derive_seed(config.seed, (1u << 21) + i);
    std::vector<BBox> est;
    for (std::size_t k = 0; k < frame.gt_boxes.size(); ++k) {
      const BBox& box = frame.gt_boxes[k];
      const int pedestrian = frame.gt_box_pedestrian[k];
      gt_boxes.push_back({id, box});
      if (pedestrian >= 0) {
        const auto& s2d = frame.skeletons2d[static_cast<std::size_t>(pedestrian)];
        for (const auto& r : io::joint_records(id, static_cast<int>(k), s2d)) gt_joints.push_back(r);
        gt_poses.push_back({id, static_cast<int>(k), frame.skeletons3d[static_cast<std::size_t>(pedestrian)]});
      }
      const auto noisy = synth::noisy_detections(std::span(&box, 1), kept, config.camera, synth::derive_seed(frame_seed, 2 * k));
      if (noisy.empty()) continue;
      if (pedestrian >= 0) {
        const auto s2d = synth::noisy_joints(frame.skeletons2d[static_cast<std::size_t>(pedestrian)], config.noise,
                                             synth::derive_seed(frame_seed, 2 * k + 1));
        for (const auto& r : io::joint_records(id, static_cast<int>(est.size()), s2d)) joints.push_back(r);
      }
      est.push_back(noisy.front());
    }
    for (const auto& b : synth::noisy_detections(frame.gt_boxes, spurious, config.camera, frame_seed)) est.push_back(b);
    for (const auto& b : est) detections.push_back({id, b});
  }
  io::save_odometry(dir / "odometry.txt", odometry);
  io::save_gps(dir / "gps.txt", gps);
  io::save_detections(dir / "gt_boxes.txt", gt_boxes);
  io::save_detections(dir / "detections.txt", detections);
  io::save_joints(dir / "gt_joints.txt", gt_joints);
  io::save_joints(dir / "joints.txt", joints);
  io::save_poses(dir / "gt_poses.txt", gt_poses);
  io::write_text(dir / "gps_reference.txt", "gps_reference_lat = " + io::format_number(config.gps_reference.latitude) +
                                                "\ngps_reference_lon = " +
                                                io::format_number(config.gps_reference.longitude) + "\n");
}

PipelineResult run_pipeline(const PipelineConfig& config) {
  PipelineConfig c = config;
  PipelineResult result;

  if (c.synth) {
    stage("synth", [&] {
      const fs::path input = c.out_dir / "input";
      write_bundle(synth::generate_scene(c.scene), input);
      c.calib = input / "calib.txt";
      c.odometry = input / "odometry.txt";
      c.gps = input / "gps.txt";
      c.disparity_dir = input / "disparity";
      c.seg_dir = input / "segmentation";
      if (c.joints.empty()) c.joints = input / "joints.txt";
      if (c.library.empty()) c.library = input / "library.txt";
      if (c.gt_boxes.empty()) c.gt_boxes = input / "gt_boxes.txt";
      if (c.est_boxes.empty()) c.est_boxes = input / "detections.txt";
      if (c.masks_dir.empty()) c.masks_dir = c.seg_dir;
      if (!c.gps_reference) c.gps_reference = c.scene.gps_reference;
      return 0;
    });
  }

  const CameraIntrinsics intr = stage("calibration", [&] {
    if (c.calib.empty()) fail(ErrorKind::invalid_input, "no calibration file configured");
    return io::load_calibration(c.calib);
  });

  result.trajectory = stage("trajectory", [&] {
    if (c.trajectory_source == "gps") {
      if (c.gps.empty()) fail(ErrorKind::invalid_input, "no GPS file configured");
      const auto samples = io::load_gps(c.gps);
      if (samples.empty()) fail(ErrorKind::invalid_input, "GPS file is empty");
      return gps_to_trajectory(samples, c.gps_reference.value_or(samples.front()), c.rig_height);
    }
    if (c.odometry.empty()) fail(ErrorKind::invalid_input, "no odometry file configured");
    return integrate_odometry(io::load_odometry(c.odometry), planar_rig_pose(0.0, 0.0, c.rig_height, 0.0));
  });
  const Trajectory& trajectory = result.trajectory;
  auto pose_of = [&](int frame) -> const RigidPose& {
    if (frame < 0 || static_cast<std::size_t>(frame) >= trajectory.size())
      fail(ErrorKind::invalid_input, "frame " + std::to_string(frame) + " has no trajectory pose");
    return trajectory[static_cast<std::size_t>(frame)];
  };
  auto load_frame_disparity = [&](const fs::path& path) {
    DisparityMap map = io::load_disparity(path);
    io::check_dimensions(map.width(), map.height(), intr, path);
    return map;
  };

  std::vector<io::DetectionRecord> detections;
  if (!c.est_boxes.empty()) detections = stage("detections", [&] { return io::load_detections(c.est_boxes); });
  const auto est_by_frame = io::group_by_frame(detections);

  std::size_t skipped_cars = 0;
  if (!c.disparity_dir.empty() && !c.seg_dir.empty()) {
    stage("reconstruct", [&] {
      const auto disparity_files = io::list_frames(c.disparity_dir);
      const auto seg_files = io::list_frames(c.seg_dir);
      VoxelAccumulator voxels(c.resolution, c.drop_dynamic);
      std::vector<std::pair<int, Box3D>> cars;
      for (const auto& [frame, path] : disparity_files) {
        const auto seg_path = seg_files.find(frame);
        if (seg_path == seg_files.end())
          fail(ErrorKind::invalid_input, "frame " + std::to_string(frame) + " has no segmentation");
        const DisparityMap disparity = load_frame_disparity(path);
        const SegmentationMask segmentation = io::load_segmentation(seg_path->second);
        io::check_dimensions(segmentation.width(), segmentation.height(), intr, seg_path->second);
        const RigidPose& pose = pose_of(frame);
        voxels.add(backproject_frame(disparity, segmentation, intr, pose,
                                     {c.stride, c.exclude_dynamic, frame, kMinDisparity}));

        const auto est = est_by_frame.find(frame);
        if (est == est_by_frame.end()) continue;
        std::vector<BBox> car_boxes;
        for (const auto& b : est->second)
          if (b.label == SemanticClass::car) car_boxes.push_back(b);
        const CarBoxResult boxes = car_boxes_3d(car_boxes, disparity, segmentation, intr, pose);
        skipped_cars += boxes.skipped.size();
        for (const auto& b : boxes.boxes) cars.emplace_back(frame, b);
      }
      result.voxels = voxels.finish();
      io::save_voxel_grid(c.out_dir / "voxels.txt", result.voxels);
      io::save_car_boxes(c.out_dir / "car_boxes.txt", cars);
      return 0;
    });
  }

  std::size_t skipped_poses = 0;
  std::map<std::pair<int, int>, Skeleton2D> skeletons;
  if (!c.joints.empty()) skeletons = stage("joints", [&] { return io::group_skeletons(io::load_joints(c.joints)); });
  if (!skeletons.empty() && !c.disparity_dir.empty()) {
    stage("pose", [&] {
      const ReferenceLibrary library =
          c.library.empty() ? synth::generate_reference_library() : io::load_library(c.library);
      const auto disparity_files = io::list_frames(c.disparity_dir);
      int loaded = -1;
      DisparityMap disparity;
      for (const auto& [key, s2d] : skeletons) {
        const int frame = key.first;
        if (frame != loaded) {
          const auto path = disparity_files.find(frame);
          if (path == disparity_files.end())
            fail(ErrorKind::invalid_input, "frame " + std::to_string(frame) + " has no disparity map");
          disparity = load_frame_disparity(path->second);
          loaded = frame;
        }
        // Skeletons without enough depth support cannot be corrected.
        try {
          const Skeleton3D observed = triangulate_skeleton(s2d, disparity, intr, pose_of(frame), c.window);
          result.poses.push_back({frame, key.second, correct_pose(observed, library, c.correction).skeleton});
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::invalid_input && e.kind() != ErrorKind::degenerate) throw;
          ++skipped_poses;
        }
      }
      io::save_poses(c.out_dir / "poses.txt", result.poses);
      return 0;
    });
  }

  if (!c.gt_boxes.empty() && !c.est_boxes.empty()) {
    result.report = stage("evaluate", [&] {
      const auto gt = io::group_by_frame(io::load_detections(c.gt_boxes));
      std::map<int, SegmentationMask> masks;
      if (!c.masks_dir.empty())
        for (const auto& [frame, path] : io::list_frames(c.masks_dir))
          if (est_by_frame.contains(frame)) masks.emplace(frame, io::load_segmentation(path));
      EvaluationReport report = evaluate(gt, est_by_frame, masks, skeletons, c.evaluation);
      report.metadata["skipped_poses"] = std::to_string(skipped_poses);
      report.metadata["skipped_car_boxes"] = std::to_string(skipped_cars);
      report.metadata["trajectory_source"] = c.trajectory_source;
      io::write_text(c.out_dir / "report.csv", format_report(report));
      return report;
    });
  }

  stage("output", [&] {
    io::save_trajectory(c.out_dir / "trajectory.txt", trajectory);
    return 0;
  });
  return result;
}

}  // namespace pedrecon
