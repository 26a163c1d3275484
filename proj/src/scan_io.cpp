#include "gcloam/scan_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "gcloam/errors.hpp"

namespace gcloam {

SensorConfig SensorConfig::hdl64() {
  SensorConfig cfg;
  cfg.beam_elevations_deg.resize(64);
  for (int i = 0; i < 32; ++i) cfg.beam_elevations_deg[i] = 2.0 - i / 3.0;
  for (int i = 32; i < 64; ++i) cfg.beam_elevations_deg[i] = -8.83 - (i - 32) * 0.5;
  return cfg;
}

SensorConfig SensorConfig::uniform(int channels, double low_deg, double high_deg) {
  SensorConfig cfg;
  cfg.beam_elevations_deg.resize(channels);
  if (channels == 1) {
    cfg.beam_elevations_deg[0] = low_deg;
    return cfg;
  }
  const double step = (high_deg - low_deg) / (channels - 1);
  for (int i = 0; i < channels; ++i) cfg.beam_elevations_deg[i] = low_deg + i * step;
  return cfg;
}

namespace {

constexpr double kRadToDeg = 180.0 / M_PI;
constexpr double kTwoPi = 2.0 * M_PI;

int nearestBeam(const SensorConfig& cfg, double elevation_deg, double& abs_diff) {
  int best = 0;
  abs_diff = std::abs(elevation_deg - cfg.beam_elevations_deg[0]);
  for (int i = 1; i < cfg.channelCount(); ++i) {
    const double d = std::abs(elevation_deg - cfg.beam_elevations_deg[i]);
    if (d < abs_diff) {
      abs_diff = d;
      best = i;
    }
  }
  return best;
}

// Clockwise angular displacement from the sweep-start azimuth, in [0, 1).
double sweepFraction(double start_azimuth, double azimuth) {
  double delta = start_azimuth - azimuth;
  while (delta < 0) delta += kTwoPi;
  while (delta >= kTwoPi) delta -= kTwoPi;
  return delta / kTwoPi;
}

}  // namespace

Scan decodeKittiScan(const void* data, std::size_t size_bytes, const SensorConfig& cfg) {
  if (cfg.channelCount() == 0) throw Error("sensor config has no beam elevations");
  if (size_bytes % 16 != 0) {
    throw MalformedFile("scan size " + std::to_string(size_bytes) +
                        " is not a multiple of 16 bytes");
  }

  Scan scan;
  scan.channels.resize(cfg.channelCount());
  scan.record_count = size_bytes / 16;

  struct Retained {
    LidarPoint point;
    double azimuth;
  };
  std::vector<Retained> retained;
  retained.reserve(scan.record_count);

  const auto* bytes = static_cast<const std::uint8_t*>(data);
  for (std::size_t rec = 0; rec < scan.record_count; ++rec) {
    float xyzi[4];
    std::memcpy(xyzi, bytes + rec * 16, 16);
    if (!std::isfinite(xyzi[0]) || !std::isfinite(xyzi[1]) || !std::isfinite(xyzi[2]) ||
        !std::isfinite(xyzi[3])) {
      throw MalformedFile("non-finite record at index " + std::to_string(rec));
    }

    LidarPoint pt;
    pt.position = Eigen::Vector3d(xyzi[0], xyzi[1], xyzi[2]);
    pt.intensity = xyzi[3];

    const double range = pt.range();
    if (range < cfg.min_range || range > cfg.max_range) {
      ++scan.dropped_range;
      continue;
    }

    const double elevation = std::atan2(pt.position.z(), pt.position.head<2>().norm()) * kRadToDeg;
    double diff;
    pt.channel = nearestBeam(cfg, elevation, diff);
    if (diff > cfg.elevation_tolerance_deg) {
      ++scan.dropped_unknown_beam;
      continue;
    }

    retained.push_back({pt, std::atan2(pt.position.y(), pt.position.x())});
  }

  if (retained.empty()) return scan;

  const double start_azimuth = retained.front().azimuth;
  for (auto& r : retained) {
    r.point.rel_time = sweepFraction(start_azimuth, r.azimuth);
    scan.channels[r.point.channel].push_back(r.point);
  }
  return scan;
}

Scan readKittiScan(const std::string& path, const SensorConfig& cfg) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open scan file: " + path);
  std::vector<char> buffer((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decodeKittiScan(buffer.data(), buffer.size(), cfg);
}

namespace {

// Shortest round-trip representation; keeps trajectory files byte-stable.
void appendDouble(std::string& out, double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, res.ptr);
}

std::vector<double> parseFields(const std::string& line, int line_number) {
  std::vector<double> fields;
  const char* p = line.data();
  const char* end = line.data() + line.size();
  while (p < end) {
    while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
    if (p >= end) break;
    double value;
    const auto res = std::from_chars(p, end, value);
    if (res.ec != std::errc()) throw ParseError("invalid float field", line_number);
    fields.push_back(value);
    p = res.ptr;
  }
  return fields;
}

}  // namespace

std::string formatTrajectoryLine(const TrajectoryEntry& entry, TrajectoryFormat format) {
  std::string line;
  if (format == TrajectoryFormat::kKitti) {
    const Eigen::Matrix3d R = entry.pose.rotation.toRotationMatrix();
    const Eigen::Vector3d& t = entry.pose.translation;
    for (int row = 0; row < 3; ++row) {
      for (int col = 0; col < 3; ++col) {
        appendDouble(line, R(row, col));
        line += ' ';
      }
      appendDouble(line, t[row]);
      if (row < 2) line += ' ';
    }
  } else {
    appendDouble(line, entry.timestamp);
    line += ' ';
    const Eigen::Vector3d& t = entry.pose.translation;
    const Eigen::Quaterniond& q = entry.pose.rotation;
    for (double v : {t.x(), t.y(), t.z(), q.x(), q.y(), q.z()}) {
      appendDouble(line, v);
      line += ' ';
    }
    appendDouble(line, q.w());
  }
  return line;
}

void writeTrajectory(const Trajectory& traj, TrajectoryFormat format, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open trajectory file for writing: " + path);
  for (const auto& entry : traj.entries) {
    out << formatTrajectoryLine(entry, format) << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

Trajectory readTrajectory(const std::string& path, TrajectoryFormat format) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trajectory file: " + path);

  Trajectory traj;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty() || line[0] == '#') continue;
    const std::vector<double> f = parseFields(line, line_number);
    if (f.empty()) continue;

    TrajectoryEntry entry;
    if (format == TrajectoryFormat::kKitti) {
      if (f.size() != 12) throw ParseError("expected 12 fields, got " + std::to_string(f.size()), line_number);
      Eigen::Matrix3d R;
      R << f[0], f[1], f[2], f[4], f[5], f[6], f[8], f[9], f[10];
      entry.pose = PoseSE3(Eigen::Quaterniond(R), Eigen::Vector3d(f[3], f[7], f[11]));
      entry.timestamp = 0.1 * static_cast<double>(traj.size());  // 10 Hz convention
    } else {
      if (f.size() != 8) throw ParseError("expected 8 fields, got " + std::to_string(f.size()), line_number);
      entry.timestamp = f[0];
      entry.pose = PoseSE3(Eigen::Quaterniond(f[7], f[4], f[5], f[6]), Eigen::Vector3d(f[1], f[2], f[3]));
      if (!traj.empty() && entry.timestamp <= traj.entries.back().timestamp) {
        throw ParseError("timestamps not strictly increasing", line_number);
      }
    }
    traj.entries.push_back(entry);
  }
  return traj;
}

}  // namespace gcloam
