#pragma once

#include <string>

#include "gcloam/scan.hpp"

namespace gcloam {

/// Reads a KITTI velodyne .bin scan: packed little-endian float32 x,y,z,intensity
/// per record. Channels are inferred by nearest beam elevation; points outside
/// the elevation tolerance or the range gates are dropped and counted.
Scan readKittiScan(const std::string& path, const SensorConfig& cfg);

/// Same decoding applied to an in-memory buffer (used by ingestion tests and
/// the python bindings).
Scan decodeKittiScan(const void* data, std::size_t size_bytes, const SensorConfig& cfg);

enum class TrajectoryFormat { kKitti, kTum };

/// kitti: 12 floats per line, row-major upper 3x4 of the homogeneous pose.
/// tum: "timestamp tx ty tz qx qy qz qw" per line.
void writeTrajectory(const Trajectory& traj, TrajectoryFormat format, const std::string& path);
Trajectory readTrajectory(const std::string& path, TrajectoryFormat format);

std::string formatTrajectoryLine(const TrajectoryEntry& entry, TrajectoryFormat format);

}  // namespace gcloam
