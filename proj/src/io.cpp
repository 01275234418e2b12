#include "mapeval/io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

namespace mapeval {

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct Tokenized {
  int line_number;
  std::vector<std::string> tokens;
};

// all text formats share the same shape: whitespace-separated tokens,
// '#' starts a comment, blank lines ignored
std::vector<Tokenized> tokenize_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<Tokenized> out;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    Tokenized t{line_number, {}};
    std::string tok;
    while (ss >> tok) t.tokens.push_back(tok);
    if (!t.tokens.empty()) out.push_back(std::move(t));
  }
  return out;
}

double parse_double(const std::string& path, int line, const std::string& tok) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size() || errno == ERANGE) {
    throw ParseError(path, line, "expected a number, got '" + tok + "'");
  }
  return v;
}

std::int64_t parse_int(const std::string& path, int line, const std::string& tok) {
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(tok.c_str(), &end, 10);
  if (end != tok.c_str() + tok.size() || errno == ERANGE) {
    throw ParseError(path, line, "expected an integer, got '" + tok + "'");
  }
  return v;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << content;
  if (!out) throw IoError("write to " + path + " failed");
}

}  // namespace

// --- trajectory ---

Trajectory read_trajectory(const std::string& path) {
  Trajectory traj;
  for (const Tokenized& t : tokenize_file(path)) {
    if (t.tokens.size() != 8) {
      throw ParseError(path, t.line_number,
                       "expected 8 fields (index tx ty tz qx qy qz qw), got " +
                           std::to_string(t.tokens.size()));
    }
    Pose pose;
    pose.index = parse_int(path, t.line_number, t.tokens[0]);
    for (int i = 0; i < 3; ++i) {
      pose.translation[i] = parse_double(path, t.line_number, t.tokens[1 + i]);
    }
    const double qx = parse_double(path, t.line_number, t.tokens[4]);
    const double qy = parse_double(path, t.line_number, t.tokens[5]);
    const double qz = parse_double(path, t.line_number, t.tokens[6]);
    const double qw = parse_double(path, t.line_number, t.tokens[7]);
    pose.rotation = Eigen::Quaterniond(qw, qx, qy, qz);
    traj.poses.push_back(pose);
  }
  traj.validate();
  return traj;
}

void write_trajectory(const std::string& path, const Trajectory& trajectory) {
  std::string out = "# index tx ty tz qx qy qz qw\n";
  for (const Pose& p : trajectory.poses) {
    out += std::to_string(p.index);
    for (int i = 0; i < 3; ++i) out += " " + g17(p.translation[i]);
    out += " " + g17(p.rotation.x()) + " " + g17(p.rotation.y()) + " " + g17(p.rotation.z()) +
           " " + g17(p.rotation.w()) + "\n";
  }
  write_file(path, out);
}

// --- point cloud ---

namespace {

constexpr char kCloudMagic[8] = {'L', 'P', 'C', 'D', '0', '0', '0', '1'};
constexpr std::size_t kRecordSize = 17;

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f32(std::string& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

float get_f32(const unsigned char* p) {
  const std::uint32_t bits = get_u32(p);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

}  // namespace

PointCloud read_cloud(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (data.size() < 12 || std::memcmp(data.data(), kCloudMagic, 8) != 0) {
    throw BadMagic(path + ": not a LPCD0001 cloud file");
  }
  const auto* bytes = reinterpret_cast<const unsigned char*>(data.data());
  const std::uint32_t count = get_u32(bytes + 8);
  if (data.size() != 12 + kRecordSize * count) {
    throw TruncatedFile(path + ": expected " + std::to_string(12 + kRecordSize * count) +
                        " bytes, file has " + std::to_string(data.size()));
  }

  PointCloud cloud;
  cloud.frame = Frame::Body;
  cloud.frame_index = -1;
  cloud.points.resize(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const unsigned char* rec = bytes + 12 + kRecordSize * i;
    LidarPoint& p = cloud.points[i];
    p.position = Eigen::Vector3d(get_f32(rec), get_f32(rec + 4), get_f32(rec + 8));
    p.scan_id = get_u16(rec + 12);
    p.fire_id = get_u16(rec + 14);
    const unsigned char label = rec[16];
    if (label > 2) throw ParseError(path, static_cast<int>(i), "unknown point label");
    p.label = static_cast<Label>(label);
  }
  return cloud;
}

void write_cloud(const std::string& path, const PointCloud& cloud) {
  std::string out;
  out.reserve(12 + kRecordSize * cloud.points.size());
  out.append(kCloudMagic, 8);
  put_u32(out, static_cast<std::uint32_t>(cloud.points.size()));
  for (const LidarPoint& p : cloud.points) {
    put_f32(out, static_cast<float>(p.position.x()));
    put_f32(out, static_cast<float>(p.position.y()));
    put_f32(out, static_cast<float>(p.position.z()));
    put_u16(out, p.scan_id);
    put_u16(out, p.fire_id);
    out.push_back(static_cast<char>(p.label));
  }
  write_file(path, out);
}

// --- evaluation report ---

namespace {

const char* const kConfigKeys[] = {
    "submap_radius_m",        "ghost_search_radius_m",     "on_ray_tolerance_m",
    "grazing_angle_threshold_deg", "ghost_severity_threshold_m", "pole_ratio_threshold",
    "ordinary_ratio_threshold",    "voxel_leaf_m",               "ray_sample_spacing_m",
    "ray_start_offset_m",          "ray_end_margin_m",           "pca_neighborhood_radius_m",
    "pca_min_neighbors"};

double* config_field(EvalConfig& cfg, const std::string& key) {
  if (key == "submap_radius_m") return &cfg.submap_radius_m;
  if (key == "ghost_search_radius_m") return &cfg.ghost_search_radius_m;
  if (key == "on_ray_tolerance_m") return &cfg.on_ray_tolerance_m;
  if (key == "grazing_angle_threshold_deg") return &cfg.grazing_angle_threshold_deg;
  if (key == "ghost_severity_threshold_m") return &cfg.ghost_severity_threshold_m;
  if (key == "pole_ratio_threshold") return &cfg.pole_ratio_threshold;
  if (key == "ordinary_ratio_threshold") return &cfg.ordinary_ratio_threshold;
  if (key == "voxel_leaf_m") return &cfg.voxel_leaf_m;
  if (key == "ray_sample_spacing_m") return &cfg.ray_sample_spacing_m;
  if (key == "ray_start_offset_m") return &cfg.ray_start_offset_m;
  if (key == "ray_end_margin_m") return &cfg.ray_end_margin_m;
  if (key == "pca_neighborhood_radius_m") return &cfg.pca_neighborhood_radius_m;
  return nullptr;
}

std::string config_value(const EvalConfig& cfg, const std::string& key) {
  if (key == "pca_min_neighbors") return std::to_string(cfg.pca_min_neighbors);
  EvalConfig copy = cfg;
  return g17(*config_field(copy, key));
}

bool set_config_value(EvalConfig& cfg, const std::string& key, const std::string& value,
                      const std::string& path, int line) {
  if (key == "pca_min_neighbors") {
    cfg.pca_min_neighbors = static_cast<int>(parse_int(path, line, value));
    return true;
  }
  if (double* field = config_field(cfg, key)) {
    *field = parse_double(path, line, value);
    return true;
  }
  return false;
}

}  // namespace

void write_report(const std::string& path, const EvaluationReport& report,
                  const EvalConfig& cfg) {
  std::string out = "# map relative-accuracy evaluation report\n";
  out += "format mapeval_report 1\n";
  for (const char* key : kConfigKeys) {
    out += std::string("config ") + key + " " + config_value(cfg, key) + "\n";
  }
  out += "evaluated " + std::to_string(report.per_pose.size()) + "\n";
  out += "unevaluated " + std::to_string(report.unevaluated_indices.size());
  for (std::int64_t idx : report.unevaluated_indices) out += " " + std::to_string(idx);
  out += "\n";
  out += "# pose index n_pole n_ordi m_pole m_ordi pole_ratio ordi_ratio bad\n";
  for (const PoseStats& s : report.per_pose) {
    out += "pose " + std::to_string(s.index) + " " + std::to_string(s.n_pole) + " " +
           std::to_string(s.n_ordi) + " " + std::to_string(s.m_pole) + " " +
           std::to_string(s.m_ordi) + " " + g17(s.pole_ratio()) + " " + g17(s.ordi_ratio()) +
           " " + (s.is_bad ? "1" : "0") + "\n";
  }
  out += "bad_poses " + std::to_string(report.bad_pose_indices.size());
  for (std::int64_t idx : report.bad_pose_indices) out += " " + std::to_string(idx);
  out += "\n";
  out += "p_bad " + g17(report.p_bad) + "\n";
  out += "p_acc " + g17(report.p_acc) + "\n";
  write_file(path, out);
}

ParsedReport read_report(const std::string& path) {
  ParsedReport parsed;
  bool format_seen = false;
  for (const Tokenized& t : tokenize_file(path)) {
    const std::string& kind = t.tokens[0];
    auto need = [&](std::size_t n) {
      if (t.tokens.size() < n) {
        throw ParseError(path, t.line_number, "'" + kind + "' record is too short");
      }
    };
    if (kind == "format") {
      need(3);
      if (t.tokens[1] != "mapeval_report" || t.tokens[2] != "1") {
        throw ParseError(path, t.line_number, "unsupported report format");
      }
      format_seen = true;
    } else if (kind == "config") {
      need(3);
      if (!set_config_value(parsed.config, t.tokens[1], t.tokens[2], path, t.line_number)) {
        throw ParseError(path, t.line_number, "unknown config key '" + t.tokens[1] + "'");
      }
    } else if (kind == "evaluated") {
      need(2);
    } else if (kind == "unevaluated") {
      need(2);
      for (std::size_t i = 2; i < t.tokens.size(); ++i) {
        parsed.report.unevaluated_indices.push_back(parse_int(path, t.line_number, t.tokens[i]));
      }
    } else if (kind == "pose") {
      need(9);
      PoseStats s;
      s.index = parse_int(path, t.line_number, t.tokens[1]);
      s.n_pole = parse_int(path, t.line_number, t.tokens[2]);
      s.n_ordi = parse_int(path, t.line_number, t.tokens[3]);
      s.m_pole = parse_int(path, t.line_number, t.tokens[4]);
      s.m_ordi = parse_int(path, t.line_number, t.tokens[5]);
      s.is_bad = parse_int(path, t.line_number, t.tokens[8]) != 0;
      parsed.report.per_pose.push_back(s);
    } else if (kind == "bad_poses") {
      need(2);
      for (std::size_t i = 2; i < t.tokens.size(); ++i) {
        parsed.report.bad_pose_indices.push_back(parse_int(path, t.line_number, t.tokens[i]));
      }
    } else if (kind == "p_bad") {
      need(2);
      parsed.report.p_bad = parse_double(path, t.line_number, t.tokens[1]);
    } else if (kind == "p_acc") {
      need(2);
      parsed.report.p_acc = parse_double(path, t.line_number, t.tokens[1]);
    } else {
      throw ParseError(path, t.line_number, "unknown record '" + kind + "'");
    }
  }
  if (!format_seen) throw ParseError(path, 1, "missing format line");
  return parsed;
}

// --- PLY export ---

void export_ghosts_ply(const std::string& path, const PointCloud& frame_world,
                       const std::vector<Eigen::Vector3d>& ghost_positions) {
  std::string out;
  out += "ply\n";
  out += "format ascii 1.0\n";
  out += "comment evaluated frame points red, detected ghosting points yellow\n";
  out += "element vertex " + std::to_string(frame_world.points.size() + ghost_positions.size()) +
         "\n";
  out += "property float x\nproperty float y\nproperty float z\n";
  out += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out += "end_header\n";
  char buf[96];
  for (const LidarPoint& p : frame_world.points) {
    std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g 255 0 0\n",
                  static_cast<double>(static_cast<float>(p.position.x())),
                  static_cast<double>(static_cast<float>(p.position.y())),
                  static_cast<double>(static_cast<float>(p.position.z())));
    out += buf;
  }
  for (const Eigen::Vector3d& g : ghost_positions) {
    std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g 255 255 0\n",
                  static_cast<double>(static_cast<float>(g.x())),
                  static_cast<double>(static_cast<float>(g.y())),
                  static_cast<double>(static_cast<float>(g.z())));
    out += buf;
  }
  write_file(path, out);
}

// --- scene / path specs ---

Scene read_scene_spec(const std::string& path) {
  Scene scene;
  for (const Tokenized& t : tokenize_file(path)) {
    if (t.tokens[0] == "box") {
      if (t.tokens.size() != 7) {
        throw ParseError(path, t.line_number, "box needs 6 values: x0 y0 z0 x1 y1 z1");
      }
      Box b;
      for (int i = 0; i < 3; ++i) b.min[i] = parse_double(path, t.line_number, t.tokens[1 + i]);
      for (int i = 0; i < 3; ++i) b.max[i] = parse_double(path, t.line_number, t.tokens[4 + i]);
      scene.boxes.push_back(b);
    } else if (t.tokens[0] == "pole") {
      if (t.tokens.size() != 5) {
        throw ParseError(path, t.line_number, "pole needs 4 values: cx cy radius height");
      }
      Pole p;
      p.center_x = parse_double(path, t.line_number, t.tokens[1]);
      p.center_y = parse_double(path, t.line_number, t.tokens[2]);
      p.radius = parse_double(path, t.line_number, t.tokens[3]);
      p.height = parse_double(path, t.line_number, t.tokens[4]);
      scene.poles.push_back(p);
    } else {
      throw ParseError(path, t.line_number, "unknown scene primitive '" + t.tokens[0] + "'");
    }
  }
  scene.validate();
  return scene;
}

PathSpec read_path_spec(const std::string& path) {
  PathSpec spec;
  for (const Tokenized& t : tokenize_file(path)) {
    if (t.tokens[0] == "spacing" && t.tokens.size() == 2) {
      spec.spacing_m = parse_double(path, t.line_number, t.tokens[1]);
    } else if (t.tokens[0] == "closed" && t.tokens.size() == 2) {
      spec.closed = parse_int(path, t.line_number, t.tokens[1]) != 0;
    } else if (t.tokens[0] == "waypoint" && t.tokens.size() == 3) {
      spec.waypoints.emplace_back(parse_double(path, t.line_number, t.tokens[1]),
                                  parse_double(path, t.line_number, t.tokens[2]));
    } else {
      throw ParseError(path, t.line_number, "unknown path record '" + t.tokens[0] + "'");
    }
  }
  if (spec.waypoints.size() < 2) throw SpecError(path + ": path needs at least two waypoints");
  return spec;
}

EvalConfig read_eval_config(const std::string& path) {
  EvalConfig cfg;
  for (const Tokenized& t : tokenize_file(path)) {
    if (t.tokens.size() != 2 ||
        !set_config_value(cfg, t.tokens[0], t.tokens[1], path, t.line_number)) {
      throw ParseError(path, t.line_number, "expected '<config_key> <value>'");
    }
  }
  cfg.validate();
  return cfg;
}

// --- disturbance plan ---

DisturbancePlan read_plan(const std::string& path) {
  DisturbancePlan plan;
  bool format_seen = false;
  for (const Tokenized& t : tokenize_file(path)) {
    if (t.tokens[0] == "format") {
      if (t.tokens.size() != 3 || t.tokens[1] != "mapeval_plan" || t.tokens[2] != "1") {
        throw ParseError(path, t.line_number, "unsupported plan format");
      }
      format_seen = true;
    } else if (t.tokens[0] == "segment") {
      if (t.tokens.size() != 5) {
        throw ParseError(path, t.line_number, "segment needs: start length axis magnitude");
      }
      DisturbanceSegment seg;
      seg.start_arclen_m = parse_double(path, t.line_number, t.tokens[1]);
      seg.length_m = parse_double(path, t.line_number, t.tokens[2]);
      if (t.tokens[3] == "xy") {
        seg.axis = DisturbanceAxis::XY;
      } else if (t.tokens[3] == "z") {
        seg.axis = DisturbanceAxis::Z;
      } else {
        throw ParseError(path, t.line_number, "axis must be 'xy' or 'z'");
      }
      seg.magnitude_m = parse_double(path, t.line_number, t.tokens[4]);
      plan.segments.push_back(seg);
    } else {
      throw ParseError(path, t.line_number, "unknown plan record '" + t.tokens[0] + "'");
    }
  }
  if (!format_seen) throw ParseError(path, 1, "missing format line");
  return plan;
}

void write_plan(const std::string& path, const DisturbancePlan& plan) {
  std::string out = "format mapeval_plan 1\n";
  out += "# segment start_arclen_m length_m axis magnitude_m\n";
  for (const DisturbanceSegment& seg : plan.segments) {
    out += "segment " + g17(seg.start_arclen_m) + " " + g17(seg.length_m) + " " +
           (seg.axis == DisturbanceAxis::XY ? "xy" : "z") + " " + g17(seg.magnitude_m) + "\n";
  }
  write_file(path, out);
}

// --- manifest ---

Manifest read_manifest(const std::string& path) {
  Manifest m;
  bool format_seen = false;
  for (const Tokenized& t : tokenize_file(path)) {
    const std::string& key = t.tokens[0];
    if (key == "format") {
      if (t.tokens.size() != 3 || t.tokens[1] != "mapeval_manifest" || t.tokens[2] != "1") {
        throw ParseError(path, t.line_number, "unsupported manifest format");
      }
      format_seen = true;
    } else if (key == "n_lasers" && t.tokens.size() == 2) {
      m.sensor.n_lasers = static_cast<int>(parse_int(path, t.line_number, t.tokens[1]));
    } else if (key == "angular_resolution_deg" && t.tokens.size() == 2) {
      m.sensor.angular_resolution_deg = parse_double(path, t.line_number, t.tokens[1]);
    } else if (key == "extrinsic_translation" && t.tokens.size() == 4) {
      for (int i = 0; i < 3; ++i) {
        m.sensor.lidar_extrinsic.translation[i] =
            parse_double(path, t.line_number, t.tokens[1 + i]);
      }
    } else if (key == "extrinsic_rotation" && t.tokens.size() == 5) {
      const double qx = parse_double(path, t.line_number, t.tokens[1]);
      const double qy = parse_double(path, t.line_number, t.tokens[2]);
      const double qz = parse_double(path, t.line_number, t.tokens[3]);
      const double qw = parse_double(path, t.line_number, t.tokens[4]);
      m.sensor.lidar_extrinsic.rotation = Eigen::Quaterniond(qw, qx, qy, qz);
    } else if (key == "max_range_m" && t.tokens.size() == 2) {
      m.sim.max_range_m = parse_double(path, t.line_number, t.tokens[1]);
    } else if (key == "range_noise_sigma" && t.tokens.size() == 2) {
      m.sim.range_noise_sigma = parse_double(path, t.line_number, t.tokens[1]);
    } else if (key == "seed" && t.tokens.size() == 2) {
      m.sim.seed = static_cast<std::uint64_t>(parse_int(path, t.line_number, t.tokens[1]));
    } else if (key == "frame_count" && t.tokens.size() == 2) {
      m.frame_count = parse_int(path, t.line_number, t.tokens[1]);
    } else if (key == "trajectory" && t.tokens.size() == 2) {
      m.trajectory_file = t.tokens[1];
    } else if (key == "cloud_pattern" && t.tokens.size() == 2) {
      m.cloud_pattern = t.tokens[1];
    } else {
      throw ParseError(path, t.line_number, "unknown manifest record '" + key + "'");
    }
  }
  if (!format_seen) throw ParseError(path, 1, "missing format line");
  m.sensor.validate();
  return m;
}

void write_manifest(const std::string& path, const Manifest& m) {
  std::string out = "format mapeval_manifest 1\n";
  out += "n_lasers " + std::to_string(m.sensor.n_lasers) + "\n";
  out += "angular_resolution_deg " + g17(m.sensor.angular_resolution_deg) + "\n";
  const Eigen::Vector3d& t = m.sensor.lidar_extrinsic.translation;
  out += "extrinsic_translation " + g17(t.x()) + " " + g17(t.y()) + " " + g17(t.z()) + "\n";
  const Eigen::Quaterniond& q = m.sensor.lidar_extrinsic.rotation;
  out += "extrinsic_rotation " + g17(q.x()) + " " + g17(q.y()) + " " + g17(q.z()) + " " +
         g17(q.w()) + "\n";
  out += "max_range_m " + g17(m.sim.max_range_m) + "\n";
  out += "range_noise_sigma " + g17(m.sim.range_noise_sigma) + "\n";
  out += "seed " + std::to_string(m.sim.seed) + "\n";
  out += "frame_count " + std::to_string(m.frame_count) + "\n";
  out += "trajectory " + m.trajectory_file + "\n";
  out += "cloud_pattern " + m.cloud_pattern + "\n";
  write_file(path, out);
}

std::string cloud_file_name(const std::string& pattern, std::int64_t index) {
  const std::size_t pos = pattern.find("%06d");
  if (pos == std::string::npos) {
    throw IoError("cloud pattern must contain '%06d': " + pattern);
  }
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%06lld", static_cast<long long>(index));
  std::string out = pattern;
  out.replace(pos, 4, buf);
  return out;
}

}  // namespace mapeval
