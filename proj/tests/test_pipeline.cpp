#include <doctest.h>

#include <functional>
#include <sstream>
#include <sys/wait.h>

#include "pedrecon/pipeline.hpp"
#include "scratch_dir.hpp"

using namespace pedrecon;
namespace fs = std::filesystem;

namespace {

// Small and fast: 4 frames on a 512x256 camera.
const char* kSmallScene =
    "synth = true\nseed = 3\nframes = 4\npedestrians = 3\ncars = 2\n"
    "width = 512\nheight = 256\nfx = 500\nfy = 500\ncx = 256\ncy = 128\n";

fs::path write_config(const ScratchDir& dir, const std::string& name, const std::string& text) {
  const fs::path path = dir / name;
  io::write_text(path, text);
  return path;
}

std::string error_of(const std::function<void()>& f, ErrorKind expected) {
  try {
    f();
  } catch (const Error& e) {
    CHECK(e.kind() == expected);
    return e.what();
  }
  FAIL("no error raised");
  return {};
}

std::map<std::string, std::vector<std::string>> sections(const std::string& report) {
  std::map<std::string, std::vector<std::string>> out;
  std::istringstream in(report);
  std::string current;
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    if (line.front() == '[') {
      current = line;
      CHECK_FALSE(out.contains(current));
      out[current];
    } else {
      REQUIRE_FALSE(current.empty());
      out[current].push_back(line);
    }
  }
  return out;
}

void check_schema(const std::string& report) {
  const auto s = sections(report);
  const std::vector<std::pair<std::string, std::string>> expected{
      {"[detection]", "model,tp,fp,fn,tp_area,fp_area,fn_area"},
      {"[pose_distance]", "model,mpjds,mpjds_norm,pedestrians,bikers,crossover_pedestrians,crossover_bikers"},
      {"[size_filter]", "model,tp_before,fp_before,tp_after,fp_after"},
      {"[per_joint]", "joint,jds"},
      {"[meta]", "key,value"},
  };
  CHECK(s.size() == expected.size());
  for (const auto& [name, header] : expected) {
    REQUIRE(s.contains(name));
    const auto& rows = s.at(name);
    REQUIRE(!rows.empty());
    CHECK(rows.front() == header);
    const auto columns = std::count(header.begin(), header.end(), ',');
    for (const auto& row : rows) CHECK(std::count(row.begin(), row.end(), ',') == columns);
  }
  CHECK(s.at("[detection]").size() == 2);
  CHECK(s.at("[pose_distance]").size() == 2);
  CHECK(s.at("[size_filter]").size() == 2);
  const auto& joints = s.at("[per_joint]");
  REQUIRE(joints.size() == 1 + kJointCount);
  for (int j = 0; j < kJointCount; ++j) CHECK(joints[static_cast<std::size_t>(j + 1)].starts_with(std::string(joint_name(j)) + ","));
}

std::map<std::string, std::string> read_tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = io::read_text(e.path());
  return out;
}

int run_cli(const std::string& args) {
  const std::string command = std::string(PEDRECON_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

BBox box(double x, double y, double w, double h, SemanticClass c = SemanticClass::person) { return {x, y, w, h, c, 1.0}; }

}  // namespace

TEST_CASE("evaluate: only human boxes count") {
  const std::map<int, std::vector<BBox>> gt{
      {0, {box(10, 10, 20, 60), box(100, 10, 20, 60, SemanticClass::rider), box(200, 50, 80, 40, SemanticClass::car)}},
      {1, {box(40, 10, 20, 60)}}};

  const EvaluationReport same = evaluate(gt, gt, {}, {});
  CHECK(same.matches.true_positives == 3);
  CHECK(same.matches.false_positives == 0);
  CHECK(same.matches.false_negatives == 0);
  CHECK(same.matches.tp_area == 1.0);
  CHECK(same.pedestrians == 2);
  CHECK(same.bikers == 1);
  CHECK(same.crossover_pedestrians == 1.0);
  CHECK_FALSE(same.mpjds);

  const EvaluationReport empty = evaluate(gt, {}, {}, {});
  CHECK(empty.matches.true_positives == 0);
  CHECK(empty.matches.false_positives == 0);
  CHECK(empty.matches.false_negatives == 3);
  CHECK(empty.pedestrians == 0);
  CHECK_FALSE(empty.crossover_pedestrians);

  // a small spurious box is removed by the size filter
  auto noisy = gt;
  noisy[1].push_back(box(300, 300, 5, 10));
  const EvaluationReport r = evaluate(gt, noisy, {}, {});
  CHECK(r.fp_before == 1);
  CHECK(r.fp_after == 0);
  CHECK(r.tp_after == r.tp_before);
}

TEST_CASE("evaluate: joint distances use the estimate's frame mask") {
  const std::map<int, std::vector<BBox>> gt{{0, {box(10, 10, 20, 40)}}, {1, {box(10, 10, 20, 40)}}};
  // frame 0 estimates: a car first, so the person is estimate index 1
  const std::map<int, std::vector<BBox>> est{
      {0, {box(60, 0, 10, 10, SemanticClass::car), box(10, 10, 20, 40)}}, {1, {box(10, 10, 20, 40)}}};
  SegmentationMask seg(64, 64, class_id(SemanticClass::road));
  for (int v = 10; v < 50; ++v) seg(20, v) = class_id(SemanticClass::person);
  SegmentationMask nobody(64, 64, class_id(SemanticClass::road));

  Skeleton2D s;
  for (auto& j : s.joints) j = {23.0, 30.0, 1.0, true};
  const std::map<std::pair<int, int>, Skeleton2D> joints{{{0, 1}, s}, {{1, 0}, s}};

  const EvaluationReport r = evaluate(gt, est, {{0, seg}, {1, nobody}}, joints);
  CHECK(r.pedestrians == 2);
  REQUIRE(r.mpjds);
  CHECK(*r.mpjds == 3.0);
  CHECK(*r.mpjds_norm == 3.0 / 40.0);
  CHECK(r.metadata.at("mpjds_samples") == "1");
  CHECK(r.per_joint[0] == 3.0);
}

TEST_CASE("report schema is fixed") {
  check_schema(format_report(evaluate({}, {}, {}, {})));
  const std::map<int, std::vector<BBox>> gt{{0, {box(10, 10, 20, 60)}}};
  check_schema(format_report(evaluate(gt, gt, {}, {})));
  const std::string text = format_report(evaluate({}, {}, {}, {}));
  CHECK(text.find("estimate,nan,nan,0,0,nan,nan") != std::string::npos);
}

TEST_CASE("config parsing") {
  ScratchDir dir("config");
  const PipelineConfig c = load_pipeline_config(write_config(
      dir, "a.conf",
      std::string(kSmallScene) + "out_dir = out\nanchor = backbone\nscale_mode = fixed:1.2\ncrossover_denominator = "
                                 "estimate\nmerge_bikes = false\n"));
  CHECK(c.out_dir == dir / "out");
  CHECK(c.synth);
  CHECK(c.scene.frame_count == 4);
  CHECK(c.scene.camera.width == 512);
  CHECK(c.correction.threshold.anchor == Anchor::backbone);
  CHECK(c.correction.scale_mode.kind == ScaleMode::fixed);
  CHECK(c.correction.scale_mode.value == 1.2);
  CHECK(c.evaluation.crossover_relative_to_estimate);
  CHECK_FALSE(c.evaluation.merge_adjacent_bikes);

  const PipelineConfig abs = load_pipeline_config(write_config(dir, "b.conf", "out_dir = /tmp/x\ncalib = c.txt\n"));
  CHECK(abs.out_dir == "/tmp/x");
  CHECK(abs.calib == dir / "c.txt");

  CHECK(error_of([&] { load_pipeline_config(write_config(dir, "c.conf", "out_dir = o\ncolour = red\n")); },
                 ErrorKind::format)
            .find("colour") != std::string::npos);
  error_of([&] { load_pipeline_config(write_config(dir, "d.conf", "seed = 1\n")); }, ErrorKind::format);
  error_of([&] { load_pipeline_config(write_config(dir, "e.conf", "out_dir = o\nframes = 3\n")); }, ErrorKind::format);
  error_of([&] { load_pipeline_config(write_config(dir, "f.conf", "out_dir = o\nanchor = knee\n")); },
           ErrorKind::invalid_input);
  error_of([&] { load_pipeline_config(write_config(dir, "g.conf", "out_dir = o\nscale_mode = fixed:-1\n")); },
           ErrorKind::invalid_input);
  error_of([&] { load_pipeline_config(write_config(dir, "h.conf", "out_dir = o\ntrajectory_source = imu\n")); },
           ErrorKind::format);
  error_of([&] { load_pipeline_config(dir / "missing.conf"); }, ErrorKind::io);
  CHECK(parse_scale_mode("hip").kind == ScaleMode::hip_ratio);
}

TEST_CASE("stage errors carry the stage name") {
  ScratchDir dir("stages");
  PipelineConfig c;
  c.out_dir = dir / "out";
  CHECK(error_of([&] { run_pipeline(c); }, ErrorKind::invalid_input).starts_with("calibration: "));

  c.calib = dir / "calib.txt";
  CameraIntrinsics intr;
  intr.width = 8;
  intr.height = 6;
  intr.cx = 4;
  intr.cy = 3;
  io::save_calibration(c.calib, intr);
  c.odometry = dir / "odometry.txt";
  CHECK(error_of([&] { run_pipeline(c); }, ErrorKind::io).starts_with("trajectory: "));

  io::save_odometry(c.odometry, {{0.0, 1.0, 0.0}, {0.1, 1.0, 0.0}});
  c.disparity_dir = dir / "disparity";
  c.seg_dir = dir / "segmentation";
  io::save_disparity(c.disparity_dir / io::frame_file_name("disparity", 0), DisparityMap(4, 4, 1.0));
  io::save_segmentation(c.seg_dir / io::frame_file_name("segmentation", 0), SegmentationMask(8, 6, 0));
  const std::string dims = error_of([&] { run_pipeline(c); }, ErrorKind::format);
  CHECK(dims.starts_with("reconstruct: "));
  CHECK(dims.find("4x4") != std::string::npos);

  io::save_disparity(c.disparity_dir / io::frame_file_name("disparity", 0), DisparityMap(8, 6, 1.0));
  io::save_disparity(c.disparity_dir / io::frame_file_name("disparity", 5), DisparityMap(8, 6, 1.0));
  io::save_segmentation(c.seg_dir / io::frame_file_name("segmentation", 5), SegmentationMask(8, 6, 0));
  CHECK(error_of([&] { run_pipeline(c); }, ErrorKind::invalid_input).starts_with("reconstruct: "));

  fs::remove(c.disparity_dir / io::frame_file_name("disparity", 5));
  c.est_boxes = dir / "det.txt";
  io::write_text(c.est_boxes, "0 person 1 0 0 -1 2\n");
  CHECK(error_of([&] { run_pipeline(c); }, ErrorKind::format).starts_with("detections: "));

  fs::remove(c.est_boxes);
  c.est_boxes.clear();
  const PipelineResult ok = run_pipeline(c);
  CHECK(ok.trajectory.size() == 2);
  CHECK(ok.voxels.size() > 0);
  CHECK(fs::exists(c.out_dir / "voxels.txt"));
  CHECK(fs::exists(c.out_dir / "trajectory.txt"));
  CHECK_FALSE(ok.report);
}

TEST_CASE("synthetic pipeline: GT detections and empty detections") {
  ScratchDir dir("pipeline_gt");
  const std::string base = std::string(kSmallScene) + "out_dir = run\n";

  const PipelineResult gt_run = run_pipeline(load_pipeline_config(write_config(
      dir, "gt.conf", base + "est_boxes = run/input/gt_boxes.txt\njoints = run/input/gt_joints.txt\n")));
  REQUIRE(gt_run.report);
  std::size_t humans = 0;
  for (const auto& r : io::load_detections(dir / "run" / "input" / "gt_boxes.txt")) humans += is_human(r.box.label);
  REQUIRE(humans > 0);
  const auto& m = gt_run.report->matches;
  CHECK(m.true_positives == humans);
  CHECK(m.false_positives == 0);
  CHECK(m.false_negatives == 0);
  CHECK(m.tp_area == doctest::Approx(1.0));
  CHECK(gt_run.report->pedestrians + gt_run.report->bikers == humans);
  REQUIRE(gt_run.report->mpjds);
  CHECK(*gt_run.report->mpjds < 1.0);
  CHECK_FALSE(gt_run.poses.empty());
  check_schema(io::read_text(dir / "run" / "report.csv"));
  CHECK(io::load_poses(dir / "run" / "poses.txt").size() == gt_run.poses.size());
  CHECK(io::load_voxel_grid(dir / "run" / "voxels.txt").size() == gt_run.voxels.size());

  io::write_text(dir / "none.txt", "# frame class score x y w h\n");
  const PipelineResult empty_run = run_pipeline(
      load_pipeline_config(write_config(dir, "empty.conf", base + "est_boxes = none.txt\n")));
  REQUIRE(empty_run.report);
  CHECK(empty_run.report->matches.true_positives == 0);
  CHECK(empty_run.report->matches.false_positives == 0);
  CHECK(empty_run.report->matches.false_negatives == humans);
  check_schema(io::read_text(dir / "run" / "report.csv"));
}

TEST_CASE("synthetic pipeline is deterministic") {
  ScratchDir dir("pipeline_det");
  const std::string noisy = std::string(kSmallScene) +
                            "box_jitter = 2\nbox_dropout = 0.1\nspurious_rate = 0.2\njoint_jitter = 1\ngps_sigma = 1\n";
  run_pipeline(load_pipeline_config(write_config(dir, "a.conf", noisy + "out_dir = a\n")));
  run_pipeline(load_pipeline_config(write_config(dir, "b.conf", noisy + "out_dir = b\n")));
  const auto a = read_tree(dir / "a");
  const auto b = read_tree(dir / "b");
  CHECK(a.size() >= 10);
  CHECK(a == b);

  std::string reseeded = noisy;
  reseeded.replace(reseeded.find("seed = 3"), 8, "seed = 4");
  run_pipeline(load_pipeline_config(write_config(dir, "c.conf", reseeded + "out_dir = c\n")));
  CHECK(read_tree(dir / "c") != a);
}

TEST_CASE("command-line exit codes") {
  ScratchDir dir("cli");
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("") == 2);
  CHECK(run_cli("frobnicate") == 2);
  CHECK(run_cli("pipeline") == 2);
  CHECK(run_cli("trajectory --out x.txt") == 2);
  CHECK(run_cli("pipeline --config " + (dir / "missing.conf").string()) == 3);
  write_config(dir, "bad.conf", "out_dir = o\ncolour = red\n");
  CHECK(run_cli("pipeline --config " + (dir / "bad.conf").string()) == 4);
  write_config(dir, "anchor.conf", "out_dir = o\nanchor = knee\n");
  CHECK(run_cli("pipeline --config " + (dir / "anchor.conf").string()) == 5);

  write_config(dir, "scene.conf", "frames = 2\nwidth = 256\nheight = 128\ncx = 128\ncy = 64\nfx = 250\nfy = 250\n");
  CHECK(run_cli("synth --config " + (dir / "scene.conf").string() + " --seed 5 --out-dir " + (dir / "bundle").string()) ==
        0);
  CHECK(fs::exists(dir / "bundle" / "calib.txt"));
  CHECK(run_cli("trajectory --odometry " + (dir / "bundle" / "odometry.txt").string() + " --out " +
                (dir / "t.txt").string()) == 0);
  CHECK(io::load_trajectory(dir / "t.txt").size() == 2);
  CHECK(run_cli("evaluate --gt-boxes " + (dir / "bundle" / "gt_boxes.txt").string() + " --est-boxes " +
                (dir / "bundle" / "gt_boxes.txt").string() + " --out " + (dir / "r.csv").string()) == 0);
  check_schema(io::read_text(dir / "r.csv"));
  CHECK(run_cli("evaluate --gt-boxes " + (dir / "nope.txt").string() + " --est-boxes " +
                (dir / "bundle" / "gt_boxes.txt").string()) == 3);
}
