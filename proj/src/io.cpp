#include "pedrecon/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace pedrecon::io {
namespace {

struct Line {
  std::size_t number = 0;
  std::vector<std::string> tokens;
};

std::string where(const fs::path& path, std::size_t line) { return path.string() + ":" + std::to_string(line) + ": "; }

std::vector<std::string> split(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

// Non-blank, non-comment lines.
std::vector<Line> read_records(const fs::path& path) {
  std::istringstream in(read_text(path));
  std::vector<Line> out;
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) {
    ++n;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto tokens = split(line);
    if (!tokens.empty()) out.push_back({n, std::move(tokens)});
  }
  return out;
}

double parse_double(const std::string& token, const fs::path& path, std::size_t line) {
  double value = 0.0;
  const char* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc{} || ptr != end)
    fail(ErrorKind::format, where(path, line) + "expected a number, got '" + token + "'");
  return value;
}

long long parse_int(const std::string& token, const fs::path& path, std::size_t line) {
  long long value = 0;
  const char* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc{} || ptr != end)
    fail(ErrorKind::format, where(path, line) + "expected an integer, got '" + token + "'");
  return value;
}

void expect_fields(const Line& line, std::size_t count, const fs::path& path, const char* layout) {
  if (line.tokens.size() != count)
    fail(ErrorKind::format, where(path, line.number) + "expected " + std::to_string(count) + " fields (" + layout +
                                "), got " + std::to_string(line.tokens.size()));
}

std::string join(std::initializer_list<std::string> fields) {
  std::string out;
  for (const auto& f : fields) {
    if (!out.empty()) out += ' ';
    out += f;
  }
  return out;
}

struct PgmHeader {
  int width = 0;
  int height = 0;
  int maxval = 0;
  std::size_t offset = 0;
};

PgmHeader parse_pgm_header(const std::string& bytes, const fs::path& path) {
  PgmHeader h;
  std::size_t pos = 0;
  auto next_token = [&]() -> std::string {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    return bytes.substr(start, pos - start);
  };
  const std::string magic = next_token();
  if (magic != "P5") fail(ErrorKind::format, path.string() + ": not a binary PGM (magic '" + magic + "')");
  const std::array<std::string, 3> fields{next_token(), next_token(), next_token()};
  try {
    h.width = std::stoi(fields[0]);
    h.height = std::stoi(fields[1]);
    h.maxval = std::stoi(fields[2]);
  } catch (const std::exception&) {
    fail(ErrorKind::format, path.string() + ": malformed PGM header");
  }
  if (h.width <= 0 || h.height <= 0) fail(ErrorKind::format, path.string() + ": malformed PGM dimensions");
  if (pos >= bytes.size()) fail(ErrorKind::format, path.string() + ": PGM header not terminated");
  h.offset = pos + 1;  // single whitespace byte after maxval
  return h;
}

void check_payload(const std::string& bytes, const PgmHeader& h, std::size_t bytes_per_pixel, const fs::path& path) {
  const std::size_t expected = static_cast<std::size_t>(h.width) * static_cast<std::size_t>(h.height) * bytes_per_pixel;
  const std::size_t actual = bytes.size() - h.offset;
  if (actual != expected)
    fail(ErrorKind::format, path.string() + ": raster size mismatch, expected " + std::to_string(expected) +
                                " bytes, got " + std::to_string(actual));
}

std::string pgm_header(int width, int height, int maxval) {
  return "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n" + std::to_string(maxval) + "\n";
}

}  // namespace

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (value == 0.0) return "0";  // also folds -0
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, ptr);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::io, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorKind::io, "failed writing " + path.string());
}

KeyValues read_key_values(const fs::path& path) {
  std::istringstream in(read_text(path));
  KeyValues kv;
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) {
    ++n;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (split(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorKind::format, where(path, n) + "expected 'key = value'");
    auto key = split(line.substr(0, eq));
    auto value = split(line.substr(eq + 1));
    if (key.size() != 1 || value.size() != 1) fail(ErrorKind::format, where(path, n) + "expected 'key = value'");
    if (kv.contains(key[0])) fail(ErrorKind::format, where(path, n) + "duplicate key '" + key[0] + "'");
    kv[key[0]] = value[0];
  }
  return kv;
}

void write_key_values(const fs::path& path, const KeyValues& values) {
  std::string text;
  for (const auto& [k, v] : values) text += k + " = " + v + "\n";
  write_text(path, text);
}

double get_number(const KeyValues& kv, const std::string& key, const std::string& origin) {
  const auto it = kv.find(key);
  if (it == kv.end()) fail(ErrorKind::format, origin + ": missing key '" + key + "'");
  double value = 0.0;
  const char* end = it->second.data() + it->second.size();
  const auto [ptr, ec] = std::from_chars(it->second.data(), end, value);
  if (ec != std::errc{} || ptr != end)
    fail(ErrorKind::format, origin + ": key '" + key + "' is not a number ('" + it->second + "')");
  return value;
}

double get_number_or(const KeyValues& kv, const std::string& key, double fallback, const std::string& origin) {
  return kv.contains(key) ? get_number(kv, key, origin) : fallback;
}

bool get_flag_or(const KeyValues& kv, const std::string& key, bool fallback, const std::string& origin) {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  fail(ErrorKind::format, origin + ": key '" + key + "' must be true or false");
}

std::string get_string_or(const KeyValues& kv, const std::string& key, const std::string& fallback) {
  const auto it = kv.find(key);
  return it == kv.end() ? fallback : it->second;
}

CameraIntrinsics load_calibration(const fs::path& path) {
  const KeyValues kv = read_key_values(path);
  const std::string origin = path.string();
  CameraIntrinsics intr;
  intr.fx = get_number(kv, "fx", origin);
  intr.fy = get_number(kv, "fy", origin);
  intr.cx = get_number(kv, "cx", origin);
  intr.cy = get_number(kv, "cy", origin);
  intr.baseline = get_number(kv, "baseline", origin);
  const double w = get_number(kv, "width", origin);
  const double h = get_number(kv, "height", origin);
  if (w != std::floor(w) || h != std::floor(h)) fail(ErrorKind::format, origin + ": image size must be integral");
  intr.width = static_cast<int>(w);
  intr.height = static_cast<int>(h);
  try {
    intr.validate();
  } catch (const Error& e) {
    fail(ErrorKind::format, origin + ": " + e.what());
  }
  return intr;
}

void save_calibration(const fs::path& path, const CameraIntrinsics& intr) {
  std::string text;
  text += "fx = " + format_number(intr.fx) + "\n";
  text += "fy = " + format_number(intr.fy) + "\n";
  text += "cx = " + format_number(intr.cx) + "\n";
  text += "cy = " + format_number(intr.cy) + "\n";
  text += "baseline = " + format_number(intr.baseline) + "\n";
  text += "width = " + std::to_string(intr.width) + "\n";
  text += "height = " + std::to_string(intr.height) + "\n";
  write_text(path, text);
}

Raster<std::uint16_t> load_disparity_raw(const fs::path& path) {
  const std::string bytes = read_text(path);
  const PgmHeader h = parse_pgm_header(bytes, path);
  if (h.maxval != 65535) fail(ErrorKind::format, path.string() + ": disparity PGM must have maxval 65535");
  check_payload(bytes, h, 2, path);
  Raster<std::uint16_t> raw(h.width, h.height);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + h.offset);
  for (std::size_t i = 0; i < raw.size(); ++i)
    raw.data()[i] = static_cast<std::uint16_t>((p[2 * i] << 8) | p[2 * i + 1]);
  return raw;
}

void save_disparity_raw(const fs::path& path, const Raster<std::uint16_t>& raw) {
  std::string bytes = pgm_header(raw.width(), raw.height(), 65535);
  bytes.reserve(bytes.size() + 2 * raw.size());
  for (std::uint16_t value : raw.values()) {
    bytes.push_back(static_cast<char>(value >> 8));
    bytes.push_back(static_cast<char>(value & 0xff));
  }
  write_text(path, bytes);
}

DisparityMap load_disparity(const fs::path& path) {
  const auto raw = load_disparity_raw(path);
  DisparityMap map(raw.width(), raw.height());
  for (std::size_t i = 0; i < raw.size(); ++i) map.data()[i] = decode_disparity(raw.data()[i]);
  return map;
}

void save_disparity(const fs::path& path, const DisparityMap& map) {
  Raster<std::uint16_t> raw(map.width(), map.height());
  for (std::size_t i = 0; i < map.size(); ++i) raw.data()[i] = encode_disparity(map.data()[i]);
  save_disparity_raw(path, raw);
}

SegmentationMask load_segmentation(const fs::path& path) {
  const std::string bytes = read_text(path);
  const PgmHeader h = parse_pgm_header(bytes, path);
  if (h.maxval != 255) fail(ErrorKind::format, path.string() + ": segmentation PGM must have maxval 255");
  check_payload(bytes, h, 1, path);
  SegmentationMask mask(h.width, h.height);
  std::copy(bytes.begin() + static_cast<std::ptrdiff_t>(h.offset), bytes.end(), mask.data());
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask.data()[i] >= kClassCount)
      fail(ErrorKind::format, path.string() + ": unknown class id " + std::to_string(mask.data()[i]) + " at pixel " +
                                  std::to_string(i));
  return mask;
}

void save_segmentation(const fs::path& path, const SegmentationMask& mask) {
  std::string bytes = pgm_header(mask.width(), mask.height(), 255);
  bytes.append(reinterpret_cast<const char*>(mask.data()), mask.size());
  write_text(path, bytes);
}

void check_dimensions(int width, int height, const CameraIntrinsics& intr, const fs::path& origin) {
  if (width != intr.width || height != intr.height)
    fail(ErrorKind::format, origin.string() + ": raster is " + std::to_string(width) + "x" + std::to_string(height) +
                                " but the calibration says " + std::to_string(intr.width) + "x" +
                                std::to_string(intr.height));
}

std::map<int, fs::path> list_frames(const fs::path& dir) {
  if (!fs::is_directory(dir)) fail(ErrorKind::io, "not a directory: " + dir.string());
  std::map<int, fs::path> frames;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".pgm") continue;
    const std::string stem = entry.path().stem().string();
    auto end = stem.find_last_of("0123456789");
    if (end == std::string::npos) continue;
    auto begin = stem.find_last_not_of("0123456789", end);
    begin = begin == std::string::npos ? 0 : begin + 1;
    const int frame = std::stoi(stem.substr(begin, end - begin + 1));
    if (!frames.emplace(frame, entry.path()).second)
      fail(ErrorKind::format, dir.string() + ": two files for frame " + std::to_string(frame));
  }
  return frames;
}

std::string frame_file_name(const std::string& prefix, int frame) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "_%06d.pgm", frame);
  return prefix + buffer;
}

std::vector<OdometrySample> load_odometry(const fs::path& path) {
  std::vector<OdometrySample> out;
  for (const auto& line : read_records(path)) {
    expect_fields(line, 3, path, "timestamp speed yaw_rate");
    out.push_back({parse_double(line.tokens[0], path, line.number), parse_double(line.tokens[1], path, line.number),
                   parse_double(line.tokens[2], path, line.number)});
  }
  return out;
}

void save_odometry(const fs::path& path, const std::vector<OdometrySample>& samples) {
  std::string text = "# timestamp speed yaw_rate\n";
  for (const auto& s : samples)
    text += join({format_number(s.timestamp), format_number(s.speed), format_number(s.yaw_rate)}) + "\n";
  write_text(path, text);
}

std::vector<GpsSample> load_gps(const fs::path& path) {
  std::vector<GpsSample> out;
  for (const auto& line : read_records(path)) {
    expect_fields(line, 3, path, "timestamp latitude longitude");
    out.push_back({parse_double(line.tokens[0], path, line.number), parse_double(line.tokens[1], path, line.number),
                   parse_double(line.tokens[2], path, line.number)});
  }
  return out;
}

void save_gps(const fs::path& path, const std::vector<GpsSample>& samples) {
  std::string text = "# timestamp latitude longitude\n";
  for (const auto& s : samples)
    text += join({format_number(s.timestamp), format_number(s.latitude), format_number(s.longitude)}) + "\n";
  write_text(path, text);
}

Trajectory load_trajectory(const fs::path& path) {
  const auto lines = read_records(path);
  if (lines.empty() || lines[0].tokens.size() != 2 || lines[0].tokens[0] != "trajectory")
    fail(ErrorKind::format, path.string() + ": missing 'trajectory <source>' header");
  Trajectory t;
  const std::string& source = lines[0].tokens[1];
  if (source == "odometry") {
    t.source = TrajectorySource::odometry;
  } else if (source == "gps") {
    t.source = TrajectorySource::gps;
  } else {
    fail(ErrorKind::format, where(path, lines[0].number) + "unknown trajectory source '" + source + "'");
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& line = lines[i];
    expect_fields(line, 13, path, "timestamp tx ty tz r00 .. r22");
    std::array<double, 13> v{};
    for (std::size_t k = 0; k < 13; ++k) v[k] = parse_double(line.tokens[k], path, line.number);
    TimedPose tp;
    tp.timestamp = v[0];
    tp.pose.translation = {v[1], v[2], v[3]};
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) tp.pose.rotation(r, c) = v[static_cast<std::size_t>(4 + 3 * r + c)];
    if (!tp.pose.is_valid(1e-6)) fail(ErrorKind::format, where(path, line.number) + "rotation is not orthonormal");
    if (!t.poses.empty() && !(tp.timestamp > t.poses.back().timestamp))
      fail(ErrorKind::format, where(path, line.number) + "timestamps must increase strictly");
    t.poses.push_back(tp);
  }
  if (t.poses.empty()) fail(ErrorKind::format, path.string() + ": trajectory has no poses");
  return t;
}

void save_trajectory(const fs::path& path, const Trajectory& trajectory) {
  std::string text = "# timestamp tx ty tz r00 r01 r02 r10 r11 r12 r20 r21 r22\n";
  text += std::string("trajectory ") + (trajectory.source == TrajectorySource::gps ? "gps" : "odometry") + "\n";
  for (const auto& tp : trajectory.poses) {
    text += format_number(tp.timestamp);
    for (int k = 0; k < 3; ++k) text += " " + format_number(tp.pose.translation(k));
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) text += " " + format_number(tp.pose.rotation(r, c));
    text += "\n";
  }
  write_text(path, text);
}

std::vector<DetectionRecord> load_detections(const fs::path& path) {
  std::vector<DetectionRecord> out;
  for (const auto& line : read_records(path)) {
    expect_fields(line, 7, path, "frame class score x y w h");
    DetectionRecord r;
    r.frame = static_cast<int>(parse_int(line.tokens[0], path, line.number));
    const auto label = class_from_name(line.tokens[1]);
    if (!label) fail(ErrorKind::format, where(path, line.number) + "unknown class '" + line.tokens[1] + "'");
    r.box.label = *label;
    r.box.score = parse_double(line.tokens[2], path, line.number);
    r.box.x = parse_double(line.tokens[3], path, line.number);
    r.box.y = parse_double(line.tokens[4], path, line.number);
    r.box.w = parse_double(line.tokens[5], path, line.number);
    r.box.h = parse_double(line.tokens[6], path, line.number);
    if (!(r.box.w > 0.0 && r.box.h > 0.0)) fail(ErrorKind::format, where(path, line.number) + "box has no area");
    out.push_back(r);
  }
  return out;
}

void save_detections(const fs::path& path, const std::vector<DetectionRecord>& records) {
  std::string text = "# frame class score x y w h\n";
  for (const auto& r : records)
    text += join({std::to_string(r.frame), std::string(class_name(r.box.label)), format_number(r.box.score),
                  format_number(r.box.x), format_number(r.box.y), format_number(r.box.w), format_number(r.box.h)}) +
            "\n";
  write_text(path, text);
}

std::map<int, std::vector<BBox>> group_by_frame(const std::vector<DetectionRecord>& records) {
  std::map<int, std::vector<BBox>> out;
  for (const auto& r : records) out[r.frame].push_back(r.box);
  return out;
}

std::vector<JointRecord> load_joints(const fs::path& path) {
  std::vector<JointRecord> out;
  for (const auto& line : read_records(path)) {
    expect_fields(line, 6, path, "frame person joint u v confidence");
    JointRecord r;
    r.frame = static_cast<int>(parse_int(line.tokens[0], path, line.number));
    r.person = static_cast<int>(parse_int(line.tokens[1], path, line.number));
    r.joint = static_cast<int>(parse_int(line.tokens[2], path, line.number));
    if (r.joint < 0 || r.joint >= kJointCount)
      fail(ErrorKind::format, where(path, line.number) + "joint id must lie in [0, 16]");
    r.u = parse_double(line.tokens[3], path, line.number);
    r.v = parse_double(line.tokens[4], path, line.number);
    r.confidence = parse_double(line.tokens[5], path, line.number);
    out.push_back(r);
  }
  return out;
}

void save_joints(const fs::path& path, const std::vector<JointRecord>& records) {
  std::string text = "# frame person joint u v confidence\n";
  for (const auto& r : records)
    text += join({std::to_string(r.frame), std::to_string(r.person), std::to_string(r.joint), format_number(r.u),
                  format_number(r.v), format_number(r.confidence)}) +
            "\n";
  write_text(path, text);
}

std::map<std::pair<int, int>, Skeleton2D> group_skeletons(const std::vector<JointRecord>& records) {
  std::map<std::pair<int, int>, Skeleton2D> out;
  for (const auto& r : records) out[{r.frame, r.person}].joints[static_cast<std::size_t>(r.joint)] = {r.u, r.v, r.confidence, true};
  return out;
}

std::vector<JointRecord> joint_records(int frame, int person, const Skeleton2D& s) {
  std::vector<JointRecord> out;
  for (int j = 0; j < kJointCount; ++j) {
    const auto& joint = s.joints[static_cast<std::size_t>(j)];
    if (joint.valid) out.push_back({frame, person, j, joint.u, joint.v, joint.confidence});
  }
  return out;
}

ReferenceLibrary load_library(const fs::path& path) {
  const auto lines = read_records(path);
  auto header = [&](std::size_t i, const std::string& key, std::size_t fields) -> const Line& {
    if (i >= lines.size() || lines[i].tokens.empty() || lines[i].tokens[0] != key)
      fail(ErrorKind::format, path.string() + ": expected '" + key + "' header line");
    expect_fields(lines[i], fields, path, key.c_str());
    return lines[i];
  };
  const Line& magic = header(0, "pedrecon-library", 2);
  if (magic.tokens[1] != "1") fail(ErrorKind::format, where(path, magic.number) + "unsupported library version");
  const Line& names = header(1, "joints", 1 + kJointCount);
  for (int j = 0; j < kJointCount; ++j)
    if (names.tokens[static_cast<std::size_t>(j + 1)] != joint_name(j))
      fail(ErrorKind::format, where(path, names.number) + "joint " + std::to_string(j) + " must be '" +
                                  std::string(joint_name(j)) + "'");

  ReferenceLibrary lib;
  const Line& ratios = header(2, "ratios", 1 + kLimbCount);
  for (int l = 0; l < kLimbCount; ++l)
    lib.limb_ratios[static_cast<std::size_t>(l)] = parse_double(ratios.tokens[static_cast<std::size_t>(l + 1)], path, ratios.number);
  lib.hip_ratio = parse_double(header(3, "hip_ratio", 2).tokens[1], path, lines[3].number);
  lib.stature_ratio = parse_double(header(4, "stature_ratio", 2).tokens[1], path, lines[4].number);
  const Line& count = header(5, "poses", 2);
  const long long n = parse_int(count.tokens[1], path, count.number);
  if (n < 0 || static_cast<std::size_t>(n) != lines.size() - 6)
    fail(ErrorKind::format, where(path, count.number) + "declares " + count.tokens[1] + " poses, file has " +
                                std::to_string(lines.size() - 6));
  for (std::size_t i = 6; i < lines.size(); ++i) {
    expect_fields(lines[i], 3 * kJointCount, path, "17 x (x y z)");
    JointMatrix p;
    for (int j = 0; j < kJointCount; ++j)
      for (int k = 0; k < 3; ++k)
        p(k, j) = parse_double(lines[i].tokens[static_cast<std::size_t>(3 * j + k)], path, lines[i].number);
    lib.poses.push_back(Skeleton3D::from_positions(p));
  }
  try {
    lib.validate();
  } catch (const Error& e) {
    fail(ErrorKind::format, path.string() + ": " + e.what());
  }
  return lib;
}

void save_library(const fs::path& path, const ReferenceLibrary& lib) {
  std::string text = "pedrecon-library 1\njoints";
  for (int j = 0; j < kJointCount; ++j) text += " " + std::string(joint_name(j));
  text += "\nratios";
  for (double r : lib.limb_ratios) text += " " + format_number(r);
  text += "\nhip_ratio " + format_number(lib.hip_ratio);
  text += "\nstature_ratio " + format_number(lib.stature_ratio);
  text += "\nposes " + std::to_string(lib.poses.size()) + "\n";
  for (const auto& pose : lib.poses) {
    for (int j = 0; j < kJointCount; ++j)
      for (int k = 0; k < 3; ++k) text += (j == 0 && k == 0 ? "" : " ") + format_number(pose.positions(k, j));
    text += "\n";
  }
  write_text(path, text);
}

VoxelGrid load_voxel_grid(const fs::path& path) {
  const auto lines = read_records(path);
  auto header = [&](std::size_t i, const std::string& key, std::size_t fields) -> const Line& {
    if (i >= lines.size() || lines[i].tokens[0] != key)
      fail(ErrorKind::format, path.string() + ": expected '" + key + "' header line");
    expect_fields(lines[i], fields, path, key.c_str());
    return lines[i];
  };
  header(0, "voxelgrid", 1);
  VoxelGrid grid;
  const Line& origin = header(1, "origin", 4);
  for (int k = 0; k < 3; ++k) grid.origin(k) = parse_double(origin.tokens[static_cast<std::size_t>(k + 1)], path, origin.number);
  grid.resolution = parse_double(header(2, "resolution", 2).tokens[1], path, lines[2].number);
  if (!(grid.resolution > 0.0)) fail(ErrorKind::format, where(path, lines[2].number) + "resolution must be positive");
  const Line& count = header(3, "voxels", 2);
  const long long n = parse_int(count.tokens[1], path, count.number);
  if (n < 0 || static_cast<std::size_t>(n) != lines.size() - 4)
    fail(ErrorKind::format, where(path, count.number) + "declares " + count.tokens[1] + " voxels, file has " +
                                std::to_string(lines.size() - 4));
  for (std::size_t i = 4; i < lines.size(); ++i) {
    const Line& line = lines[i];
    expect_fields(line, 5, path, "ix iy iz count class");
    const VoxelIndex index{parse_int(line.tokens[0], path, line.number), parse_int(line.tokens[1], path, line.number),
                           parse_int(line.tokens[2], path, line.number)};
    const long long c = parse_int(line.tokens[3], path, line.number);
    const auto label = class_from_id(static_cast<int>(parse_int(line.tokens[4], path, line.number)));
    if (c < 1 || !label) fail(ErrorKind::format, where(path, line.number) + "invalid voxel count or class");
    VoxelCell cell;
    cell.count = static_cast<std::uint32_t>(c);
    cell.majority = *label;
    // The file keeps only the winning class.
    cell.histogram[static_cast<std::size_t>(*label)] = cell.count;
    grid.cells[index] = cell;
  }
  return grid;
}

void save_voxel_grid(const fs::path& path, const VoxelGrid& grid) {
  std::string text = "voxelgrid\norigin " + join({format_number(grid.origin.x()), format_number(grid.origin.y()),
                                                    format_number(grid.origin.z())}) +
                     "\nresolution " + format_number(grid.resolution) + "\nvoxels " + std::to_string(grid.size()) + "\n";
  for (const auto& [index, cell] : grid.cells)
    text += join({std::to_string(index.x), std::to_string(index.y), std::to_string(index.z), std::to_string(cell.count),
                  std::to_string(class_id(cell.majority))}) +
            "\n";
  write_text(path, text);
}

void save_point_cloud(const fs::path& path, const PointCloud& cloud) {
  std::string text = "# x y z class\n";
  for (const auto& p : cloud)
    text += join({format_number(p.position.x()), format_number(p.position.y()), format_number(p.position.z()),
                  std::to_string(class_id(p.label))}) +
            "\n";
  write_text(path, text);
}

std::vector<PoseRecord> load_poses(const fs::path& path) {
  std::map<std::pair<int, int>, Skeleton3D> grouped;
  for (const auto& line : read_records(path)) {
    expect_fields(line, 7, path, "frame person joint x y z valid");
    const int frame = static_cast<int>(parse_int(line.tokens[0], path, line.number));
    const int person = static_cast<int>(parse_int(line.tokens[1], path, line.number));
    const long long joint = parse_int(line.tokens[2], path, line.number);
    if (joint < 0 || joint >= kJointCount) fail(ErrorKind::format, where(path, line.number) + "joint id must lie in [0, 16]");
    auto& s = grouped[{frame, person}];
    for (int k = 0; k < 3; ++k) s.positions(k, joint) = parse_double(line.tokens[static_cast<std::size_t>(3 + k)], path, line.number);
    s.valid[static_cast<std::size_t>(joint)] = parse_int(line.tokens[6], path, line.number) != 0;
  }
  std::vector<PoseRecord> out;
  for (auto& [key, s] : grouped) out.push_back({key.first, key.second, s});
  return out;
}

void save_poses(const fs::path& path, const std::vector<PoseRecord>& poses) {
  std::string text = "# frame person joint x y z valid\n";
  for (const auto& p : poses)
    for (int j = 0; j < kJointCount; ++j)
      text += join({std::to_string(p.frame), std::to_string(p.person), std::to_string(j),
                    format_number(p.skeleton.positions(0, j)), format_number(p.skeleton.positions(1, j)),
                    format_number(p.skeleton.positions(2, j)), p.skeleton.valid[static_cast<std::size_t>(j)] ? "1" : "0"}) +
              "\n";
  write_text(path, text);
}

void save_car_boxes(const fs::path& path, const std::vector<std::pair<int, Box3D>>& boxes) {
  std::string text = "# frame cx cy cz length width height yaw\n";
  for (const auto& [frame, b] : boxes)
    text += join({std::to_string(frame), format_number(b.center.x()), format_number(b.center.y()),
                  format_number(b.center.z()), format_number(b.dimensions.x()), format_number(b.dimensions.y()),
                  format_number(b.dimensions.z()), format_number(b.yaw)}) +
            "\n";
  write_text(path, text);
}

}  // namespace pedrecon::io
