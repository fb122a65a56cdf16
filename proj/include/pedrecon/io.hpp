#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "pedrecon/geometry.hpp"
#include "pedrecon/metrics.hpp"
#include "pedrecon/pointcloud.hpp"
#include "pedrecon/skeleton.hpp"

namespace pedrecon::io {

namespace fs = std::filesystem;

/// Shortest decimal text that parses back to the same double.
std::string format_number(double value);

/// `key = value` lines; blank lines and `#` comments are skipped.
using KeyValues = std::map<std::string, std::string>;
KeyValues read_key_values(const fs::path& path);
void write_key_values(const fs::path& path, const KeyValues& values);

double get_number(const KeyValues& kv, const std::string& key, const std::string& origin);
double get_number_or(const KeyValues& kv, const std::string& key, double fallback, const std::string& origin);
bool get_flag_or(const KeyValues& kv, const std::string& key, bool fallback, const std::string& origin);
std::string get_string_or(const KeyValues& kv, const std::string& key, const std::string& fallback);

CameraIntrinsics load_calibration(const fs::path& path);
void save_calibration(const fs::path& path, const CameraIntrinsics& intr);

/// 16-bit binary PGM holding raw disparity codes (big-endian).
DisparityMap load_disparity(const fs::path& path);
void save_disparity(const fs::path& path, const DisparityMap& map);
Raster<std::uint16_t> load_disparity_raw(const fs::path& path);
void save_disparity_raw(const fs::path& path, const Raster<std::uint16_t>& raw);

/// 8-bit binary PGM of class ids.
SegmentationMask load_segmentation(const fs::path& path);
void save_segmentation(const fs::path& path, const SegmentationMask& mask);

/// Throws ErrorKind::format unless the raster matches the calibration.
void check_dimensions(int width, int height, const CameraIntrinsics& intr, const fs::path& origin);

/// `*.pgm` files of a directory keyed by the last number in their name.
std::map<int, fs::path> list_frames(const fs::path& dir);
std::string frame_file_name(const std::string& prefix, int frame);

std::vector<OdometrySample> load_odometry(const fs::path& path);
void save_odometry(const fs::path& path, const std::vector<OdometrySample>& samples);
std::vector<GpsSample> load_gps(const fs::path& path);
void save_gps(const fs::path& path, const std::vector<GpsSample>& samples);

Trajectory load_trajectory(const fs::path& path);
void save_trajectory(const fs::path& path, const Trajectory& trajectory);

struct DetectionRecord {
  int frame = 0;
  BBox box;
};
std::vector<DetectionRecord> load_detections(const fs::path& path);
void save_detections(const fs::path& path, const std::vector<DetectionRecord>& records);
/// Detections of one frame, in file order.
std::map<int, std::vector<BBox>> group_by_frame(const std::vector<DetectionRecord>& records);

struct JointRecord {
  int frame = 0;
  int person = 0;
  int joint = 0;
  double u = 0.0;
  double v = 0.0;
  double confidence = 0.0;
};
std::vector<JointRecord> load_joints(const fs::path& path);
void save_joints(const fs::path& path, const std::vector<JointRecord>& records);
/// Skeletons keyed by (frame, person); joints without a record are invalid.
std::map<std::pair<int, int>, Skeleton2D> group_skeletons(const std::vector<JointRecord>& records);
std::vector<JointRecord> joint_records(int frame, int person, const Skeleton2D& s);

ReferenceLibrary load_library(const fs::path& path);
void save_library(const fs::path& path, const ReferenceLibrary& lib);

VoxelGrid load_voxel_grid(const fs::path& path);
void save_voxel_grid(const fs::path& path, const VoxelGrid& grid);

void save_point_cloud(const fs::path& path, const PointCloud& cloud);

struct PoseRecord {
  int frame = 0;
  int person = 0;
  Skeleton3D skeleton;
};
std::vector<PoseRecord> load_poses(const fs::path& path);
void save_poses(const fs::path& path, const std::vector<PoseRecord>& poses);

void save_car_boxes(const fs::path& path, const std::vector<std::pair<int, Box3D>>& boxes);

/// Reads a whole text file; throws ErrorKind::io when it cannot be opened.
std::string read_text(const fs::path& path);
void write_text(const fs::path& path, const std::string& text);

}  // namespace pedrecon::io
