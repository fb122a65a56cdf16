// Command-line front end. Exit codes: 0 success, 2 usage, 3 io, 4 format,
// 5 invalid input, 6 degenerate, 1 anything else.

#include <iostream>

#include <CLI11.hpp>

#include "pedrecon/io.hpp"
#include "pedrecon/pipeline.hpp"

namespace fs = std::filesystem;
using namespace pedrecon;

namespace {

GpsSample parse_reference(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) fail(ErrorKind::invalid_input, "--gps-reference expects lat,lon");
  try {
    return {0.0, std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1))};
  } catch (const std::exception&) {
    fail(ErrorKind::invalid_input, "--gps-reference expects lat,lon");
  }
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-")
    std::cout << text;
  else
    io::write_text(out, text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Articulated pedestrian reconstruction from stereo sequences"};
  app.require_subcommand(1);

  // trajectory
  auto* traj = app.add_subcommand("trajectory", "Integrate odometry or convert GPS fixes into rig poses");
  std::string odometry, gps, traj_out, gps_reference;
  double rig_height = 0.0;
  auto* odometry_opt = traj->add_option("--odometry", odometry, "Odometry samples (t speed yaw_rate)");
  auto* gps_opt = traj->add_option("--gps", gps, "GPS fixes (t lat lon)");
  odometry_opt->excludes(gps_opt);
  traj->add_option("--out", traj_out, "Output trajectory")->required();
  traj->add_option("--rig-height", rig_height, "Camera height above ground (m)");
  traj->add_option("--gps-reference", gps_reference, "Local origin as lat,lon (default: first fix)");

  // reconstruct
  auto* rec = app.add_subcommand("reconstruct", "Backproject frames and build a semantic voxel grid");
  std::string calib, disparity_dir, seg_dir, trajectory_path, rec_out, cloud_out;
  double resolution = kDefaultVoxelResolution;
  bool drop_dynamic = false, exclude_dynamic = false;
  int stride = 1;
  rec->add_option("--calib", calib, "Calibration file")->required();
  rec->add_option("--disparity-dir", disparity_dir, "Directory of 16-bit disparity PGMs")->required();
  rec->add_option("--seg-dir", seg_dir, "Directory of segmentation PGMs")->required();
  rec->add_option("--trajectory", trajectory_path, "Rig trajectory")->required();
  rec->add_option("--resolution", resolution, "Voxel edge length (m)");
  rec->add_flag("--drop-dynamic", drop_dynamic, "Drop person/rider/car/bike points before voxelising");
  rec->add_flag("--exclude-dynamic", exclude_dynamic, "Skip dynamic pixels during backprojection");
  rec->add_option("--stride", stride, "Pixel stride");
  rec->add_option("--out", rec_out, "Output voxel grid")->required();
  rec->add_option("--cloud-out", cloud_out, "Also write the aggregated point cloud");

  // pose
  auto* pose = app.add_subcommand("pose", "Triangulate 2D joints and correct implausible skeletons");
  std::string pose_calib, pose_disparity, joints_path, library_path, pose_trajectory, pose_out;
  std::string anchor = "hip", scale_mode = "free";
  double beta = 1.5, stature = 0.0;
  std::optional<double> tau;
  int window = 5;
  pose->add_option("--calib", pose_calib, "Calibration file")->required();
  pose->add_option("--disparity-dir", pose_disparity, "Directory of 16-bit disparity PGMs")->required();
  pose->add_option("--joints", joints_path, "2D joints (frame person joint u v conf)")->required();
  pose->add_option("--library", library_path, "Reference pose library (default: procedural)");
  pose->add_option("--trajectory", pose_trajectory, "Rig trajectory (default: camera frame)");
  pose->add_option("--anchor", anchor, "hip, backbone or stature");
  pose->add_option("--beta", beta, "Limb length slack");
  pose->add_option("--stature", stature, "Person height for the stature anchor (m)");
  pose->add_option("--tau", tau, "Truncation radius (m)");
  pose->add_option("--scale-mode", scale_mode, "free, hip, backbone or fixed:<s>");
  pose->add_option("--window", window, "Disparity sampling window (px)");
  pose->add_option("--out", pose_out, "Output poses")->required();

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Detection and pose metrics against ground truth");
  std::string gt_boxes, est_boxes, masks_dir, eval_joints, eval_out, denominator = "gt";
  EvaluationOptions options;
  bool no_merge_bikes = false;
  eval->add_option("--gt-boxes", gt_boxes, "Ground-truth boxes")->required();
  eval->add_option("--est-boxes", est_boxes, "Estimated boxes")->required();
  eval->add_option("--masks", masks_dir, "Directory of segmentation PGMs");
  eval->add_option("--joints", eval_joints, "Estimated 2D joints, person = estimated box index");
  eval->add_option("--iou", options.iou_threshold, "IoU threshold");
  eval->add_option("--crossover", options.crossover_threshold, "Cross-over threshold");
  eval->add_option("--min-w", options.min_w, "Minimum box width (px)");
  eval->add_option("--min-h", options.min_h, "Minimum box height (px)");
  eval->add_option("--crossover-denominator", denominator, "gt or estimate")->check(CLI::IsMember({"gt", "estimate"}));
  eval->add_flag("--no-merge-bikes", no_merge_bikes, "Keep bike pixels out of the human mask");
  eval->add_option("--out", eval_out, "Report file (default: stdout)");

  // synth
  auto* syn = app.add_subcommand("synth", "Generate a synthetic street bundle");
  std::string synth_config, synth_out;
  std::uint64_t seed = 0;
  syn->add_option("--config", synth_config, "Scene keys (key = value)");
  syn->add_option("--seed", seed, "Master seed");
  syn->add_option("--out-dir", synth_out, "Output directory")->required();

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "Run every stage from a config file");
  std::string pipeline_config;
  pipe->add_option("--config", pipeline_config, "Pipeline config (key = value)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*traj) {
      Trajectory t;
      if (!odometry.empty()) {
        t = integrate_odometry(io::load_odometry(odometry), planar_rig_pose(0.0, 0.0, rig_height, 0.0));
      } else if (!gps.empty()) {
        const auto samples = io::load_gps(gps);
        if (samples.empty()) fail(ErrorKind::invalid_input, gps + ": no GPS fixes");
        t = gps_to_trajectory(samples, gps_reference.empty() ? samples.front() : parse_reference(gps_reference),
                              rig_height);
      } else {
        std::cerr << "trajectory: one of --odometry or --gps is required\n";
        return 2;
      }
      io::save_trajectory(traj_out, t);
    } else if (*rec) {
      const CameraIntrinsics intr = io::load_calibration(calib);
      const Trajectory t = io::load_trajectory(trajectory_path);
      const auto disparity_files = io::list_frames(disparity_dir);
      const auto seg_files = io::list_frames(seg_dir);
      VoxelAccumulator voxels(resolution, drop_dynamic);
      PointCloud cloud;
      for (const auto& [frame, path] : disparity_files) {
        const auto seg = seg_files.find(frame);
        if (seg == seg_files.end()) fail(ErrorKind::invalid_input, "frame " + std::to_string(frame) + " has no segmentation");
        if (frame < 0 || static_cast<std::size_t>(frame) >= t.size())
          fail(ErrorKind::invalid_input, "frame " + std::to_string(frame) + " has no trajectory pose");
        const DisparityMap d = io::load_disparity(path);
        io::check_dimensions(d.width(), d.height(), intr, path);
        const SegmentationMask s = io::load_segmentation(seg->second);
        io::check_dimensions(s.width(), s.height(), intr, seg->second);
        const PointCloud points =
            backproject_frame(d, s, intr, t[static_cast<std::size_t>(frame)], {stride, exclude_dynamic, frame, kMinDisparity});
        voxels.add(points);
        if (!cloud_out.empty()) cloud.insert(cloud.end(), points.begin(), points.end());
      }
      io::save_voxel_grid(rec_out, voxels.finish());
      if (!cloud_out.empty()) io::save_point_cloud(cloud_out, cloud);
    } else if (*pose) {
      const CameraIntrinsics intr = io::load_calibration(pose_calib);
      const ReferenceLibrary library =
          library_path.empty() ? synth::generate_reference_library() : io::load_library(library_path);
      std::optional<Trajectory> t;
      if (!pose_trajectory.empty()) t = io::load_trajectory(pose_trajectory);
      CorrectionOptions correction;
      correction.threshold.anchor = parse_anchor(anchor);
      correction.threshold.slack = beta;
      correction.threshold.stature = stature;
      correction.tau = tau;
      correction.scale_mode = parse_scale_mode(scale_mode);
      const auto disparity_files = io::list_frames(pose_disparity);

      std::vector<io::PoseRecord> poses;
      int loaded = -1;
      DisparityMap d;
      for (const auto& [key, s2d] : io::group_skeletons(io::load_joints(joints_path))) {
        const int frame = key.first;
        if (frame != loaded) {
          const auto path = disparity_files.find(frame);
          if (path == disparity_files.end())
            fail(ErrorKind::invalid_input, "frame " + std::to_string(frame) + " has no disparity map");
          d = io::load_disparity(path->second);
          io::check_dimensions(d.width(), d.height(), intr, path->second);
          loaded = frame;
        }
        RigidPose rig;
        if (t) {
          if (frame < 0 || static_cast<std::size_t>(frame) >= t->size())
            fail(ErrorKind::invalid_input, "frame " + std::to_string(frame) + " has no trajectory pose");
          rig = (*t)[static_cast<std::size_t>(frame)];
        }
        try {
          const Skeleton3D observed = triangulate_skeleton(s2d, d, intr, rig, window);
          poses.push_back({frame, key.second, correct_pose(observed, library, correction).skeleton});
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::invalid_input && e.kind() != ErrorKind::degenerate) throw;
          std::cerr << "frame " << frame << " person " << key.second << ": skipped (" << e.what() << ")\n";
        }
      }
      io::save_poses(pose_out, poses);
    } else if (*eval) {
      options.crossover_relative_to_estimate = denominator == "estimate";
      options.merge_adjacent_bikes = !no_merge_bikes;
      const auto gt = io::group_by_frame(io::load_detections(gt_boxes));
      const auto est = io::group_by_frame(io::load_detections(est_boxes));
      std::map<int, SegmentationMask> masks;
      if (!masks_dir.empty())
        for (const auto& [frame, path] : io::list_frames(masks_dir))
          if (est.contains(frame)) masks.emplace(frame, io::load_segmentation(path));
      std::map<std::pair<int, int>, Skeleton2D> joints;
      if (!eval_joints.empty()) joints = io::group_skeletons(io::load_joints(eval_joints));
      emit(format_report(evaluate(gt, est, masks, joints, options)), eval_out);
    } else if (*syn) {
      io::KeyValues kv;
      if (!synth_config.empty()) kv = io::read_key_values(synth_config);
      write_bundle(synth::generate_scene(scene_config_from(kv, seed, synth_config.empty() ? "--config" : synth_config)),
                   synth_out);
    } else if (*pipe) {
      run_pipeline(load_pipeline_config(pipeline_config));
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::io);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
