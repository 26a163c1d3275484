#include "gcloam/evaluation.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "gcloam/errors.hpp"

namespace gcloam {

PoseSE3 rigidAlign(const std::vector<Eigen::Vector3d>& from,
                   const std::vector<Eigen::Vector3d>& to) {
  const std::size_t n = from.size();
  Eigen::Vector3d mu_from = Eigen::Vector3d::Zero();
  Eigen::Vector3d mu_to = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    mu_from += from[i];
    mu_to += to[i];
  }
  mu_from /= static_cast<double>(n);
  mu_to /= static_cast<double>(n);

  Eigen::Matrix3d H = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    H += (from[i] - mu_from) * (to[i] - mu_to).transpose();
  }

  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  if (H.norm() > 1e-12) {
    const Eigen::JacobiSVD<Eigen::Matrix3d> svd(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d D = Eigen::Matrix3d::Identity();
    if ((svd.matrixV() * svd.matrixU().transpose()).determinant() < 0) D(2, 2) = -1.0;
    R = svd.matrixV() * D * svd.matrixU().transpose();
  }

  return PoseSE3(Eigen::Quaterniond(R), mu_to - R * mu_from);
}

AteReport ateRmse(const Trajectory& estimate, const Trajectory& truth, AteAlignment align,
                  Association assoc, double max_time_diff) {
  std::vector<Eigen::Vector3d> est_pts, truth_pts;

  if (assoc == Association::kByIndex) {
    const std::size_t n = std::min(estimate.size(), truth.size());
    for (std::size_t i = 0; i < n; ++i) {
      est_pts.push_back(estimate.entries[i].pose.translation);
      truth_pts.push_back(truth.entries[i].pose.translation);
    }
  } else {
    for (const auto& e : estimate.entries) {
      double best_dt = max_time_diff;
      const TrajectoryEntry* best = nullptr;
      for (const auto& g : truth.entries) {
        const double dt = std::abs(g.timestamp - e.timestamp);
        if (dt <= best_dt) {
          best_dt = dt;
          best = &g;
        }
      }
      if (best != nullptr) {
        est_pts.push_back(e.pose.translation);
        truth_pts.push_back(best->pose.translation);
      }
    }
  }

  if (est_pts.empty()) throw NoOverlap("no associated pose pairs");

  AteReport report;
  report.matched = est_pts.size();
  if (align == AteAlignment::kRigid) {
    report.alignment = rigidAlign(est_pts, truth_pts);
  }

  double sum_sq = 0.0;
  report.per_pose_errors.reserve(est_pts.size());
  for (std::size_t i = 0; i < est_pts.size(); ++i) {
    const double err = (report.alignment.apply(est_pts[i]) - truth_pts[i]).norm();
    report.per_pose_errors.push_back(err);
    sum_sq += err * err;
  }
  report.rmse = std::sqrt(sum_sq / static_cast<double>(est_pts.size()));
  return report;
}

}  // namespace gcloam
