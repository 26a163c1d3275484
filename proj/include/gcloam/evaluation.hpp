#pragma once

#include <vector>

#include "gcloam/scan.hpp"

namespace gcloam {

enum class AteAlignment { kNone, kRigid };
enum class Association { kByIndex, kByTimestamp };

struct AteReport {
  double rmse = 0.0;  // meters
  std::vector<double> per_pose_errors;
  PoseSE3 alignment;  // transform applied to the estimate before comparing
  std::size_t matched = 0;
};

/// Best-fit rotation + translation mapping `from` onto `to` (closed-form
/// orthogonal alignment over the point sets, no scale).
PoseSE3 rigidAlign(const std::vector<Eigen::Vector3d>& from,
                   const std::vector<Eigen::Vector3d>& to);

/// RMSE of translational differences after association (by index, or by
/// nearest timestamp within max_time_diff) and optional rigid alignment.
/// Throws NoOverlap when no pose pairs match.
AteReport ateRmse(const Trajectory& estimate, const Trajectory& truth, AteAlignment align,
                  Association assoc = Association::kByIndex, double max_time_diff = 0.02);

}  // namespace gcloam
