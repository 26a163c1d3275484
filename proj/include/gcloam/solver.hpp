#pragma once

#include <array>
#include <string>
#include <vector>

#include "gcloam/errors.hpp"
#include "gcloam/se3.hpp"

namespace gcloam {

enum class ResidualKind { kPointToLine, kPointToPlane };

/// One scalar geometric residual: a source point tied to a line (2 anchors)
/// or a plane (3 anchors) in the target frame.
struct ResidualBlock {
  ResidualKind kind = ResidualKind::kPointToLine;
  Eigen::Vector3d source = Eigen::Vector3d::Zero();
  std::array<Eigen::Vector3d, 3> anchors{Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero(),
                                         Eigen::Vector3d::Zero()};
  double weight = 1.0;

  static ResidualBlock line(const Eigen::Vector3d& source, const Eigen::Vector3d& a,
                            const Eigen::Vector3d& b, double weight = 1.0) {
    ResidualBlock blk;
    blk.kind = ResidualKind::kPointToLine;
    blk.source = source;
    blk.anchors = {a, b, Eigen::Vector3d::Zero()};
    blk.weight = weight;
    return blk;
  }

  static ResidualBlock plane(const Eigen::Vector3d& source, const Eigen::Vector3d& a,
                             const Eigen::Vector3d& b, const Eigen::Vector3d& c,
                             double weight = 1.0) {
    ResidualBlock blk;
    blk.kind = ResidualKind::kPointToPlane;
    blk.source = source;
    blk.anchors = {a, b, c};
    blk.weight = weight;
    return blk;
  }
};

constexpr double kMinAnchorSeparation = 1e-6;
constexpr double kMinPlaneNormal = 1e-9;

/// Distance from T*source to the line through anchors[0], anchors[1]. Always >= 0.
double pointToLineResidual(const ResidualBlock& block, const PoseSE3& T);

/// Signed distance from T*source to the plane spanned by the three anchors,
/// along the unit normal (anchors[0]-anchors[1]) x (anchors[0]-anchors[2]).
double pointToPlaneResidual(const ResidualBlock& block, const PoseSE3& T);

/// Returns false instead of throwing when the anchors are degenerate.
bool isDegenerate(const ResidualBlock& block);

/// Residual value and its Jacobian wrt the local step [omega; dt], where the
/// step acts as rotation <- exp(omega) * rotation, translation <- translation + dt.
void evaluateResidual(const ResidualBlock& block, const PoseSE3& T, double& value,
                      Eigen::Matrix<double, 1, 6>& jacobian);

struct SolverOptions {
  int max_iterations = 4;
  double initial_lambda = 1e-4;
  double lambda_up = 10.0;
  double lambda_down = 10.0;
  int max_reject_retries = 10;
  double step_tolerance = 1e-10;
  double relative_cost_tolerance = 1e-8;
  double zero_cost_threshold = 1e-24;
};

enum class StopReason {
  kAlreadyConverged,
  kStepTolerance,
  kCostTolerance,
  kMaxIterations,
  kDampingExhausted,
};

struct SolveReport {
  int iterations = 0;          // accepted steps
  double initial_cost = 0.0;   // sum of weight * residual^2
  double final_cost = 0.0;
  StopReason reason = StopReason::kMaxIterations;
  std::vector<double> cost_history;  // cost after each accepted step
};

std::string stopReasonName(StopReason reason);

/// Levenberg-Marquardt over the weighted squared residuals:
///   step = -(J^T W J + lambda diag(J^T W J))^-1 J^T W f.
/// Throws UnderConstrained for fewer than 6 scalar residuals and
/// SingularNormalEquations when damping retries run out on a singular system.
std::pair<PoseSE3, SolveReport> lmSolve(const std::vector<ResidualBlock>& blocks,
                                        const PoseSE3& initial_pose,
                                        const SolverOptions& opts = {});

}  // namespace gcloam
