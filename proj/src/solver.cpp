#include "gcloam/solver.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace gcloam {

namespace {

// Gradient of the point-to-line distance wrt the transformed point.
Eigen::Vector3d lineGradient(const Eigen::Vector3d& p, const Eigen::Vector3d& a,
                             const Eigen::Vector3d& b) {
  const Eigen::Vector3d w = a - b;
  const Eigen::Vector3d c = (p - a).cross(p - b);
  const double cn = c.norm();
  if (cn < 1e-15) {
    // On the line the distance is 0 and the gradient direction is undefined;
    // any subgradient works for the normal equations.
    return Eigen::Vector3d::Zero();
  }
  return w.cross(c / cn) / w.norm();
}

Eigen::Vector3d planeNormal(const std::array<Eigen::Vector3d, 3>& a) {
  return (a[0] - a[1]).cross(a[0] - a[2]);
}

}  // namespace

bool isDegenerate(const ResidualBlock& block) {
  if (block.kind == ResidualKind::kPointToLine) {
    return (block.anchors[0] - block.anchors[1]).norm() <= kMinAnchorSeparation;
  }
  return planeNormal(block.anchors).norm() <= kMinPlaneNormal;
}

double pointToLineResidual(const ResidualBlock& block, const PoseSE3& T) {
  const Eigen::Vector3d& a = block.anchors[0];
  const Eigen::Vector3d& b = block.anchors[1];
  const double sep = (a - b).norm();
  if (sep <= kMinAnchorSeparation) throw DegenerateAnchors("line anchors coincide");
  const Eigen::Vector3d p = T.apply(block.source);
  return (p - a).cross(p - b).norm() / sep;
}

double pointToPlaneResidual(const ResidualBlock& block, const PoseSE3& T) {
  const Eigen::Vector3d n = planeNormal(block.anchors);
  const double nn = n.norm();
  if (nn <= kMinPlaneNormal) throw DegenerateAnchors("plane anchors are collinear");
  const Eigen::Vector3d p = T.apply(block.source);
  return (n / nn).dot(p - block.anchors[0]);
}

void evaluateResidual(const ResidualBlock& block, const PoseSE3& T, double& value,
                      Eigen::Matrix<double, 1, 6>& jacobian) {
  const Eigen::Vector3d rotated = T.rotation * block.source;
  const Eigen::Vector3d p = rotated + T.translation;

  Eigen::Vector3d grad;  // d(residual)/d(transformed point)
  if (block.kind == ResidualKind::kPointToLine) {
    const Eigen::Vector3d& a = block.anchors[0];
    const Eigen::Vector3d& b = block.anchors[1];
    const double sep = (a - b).norm();
    if (sep <= kMinAnchorSeparation) throw DegenerateAnchors("line anchors coincide");
    value = (p - a).cross(p - b).norm() / sep;
    grad = lineGradient(p, a, b);
  } else {
    const Eigen::Vector3d n = planeNormal(block.anchors);
    const double nn = n.norm();
    if (nn <= kMinPlaneNormal) throw DegenerateAnchors("plane anchors are collinear");
    const Eigen::Vector3d unit = n / nn;
    value = unit.dot(p - block.anchors[0]);
    grad = unit;
  }

  // p(omega, dt) = exp(omega) * rotated + translation + dt, so
  // dp/domega = -[rotated]x and dp/ddt = I.
  jacobian.head<3>() = rotated.cross(grad).transpose();
  jacobian.tail<3>() = grad.transpose();
}

std::string stopReasonName(StopReason reason) {
  switch (reason) {
    case StopReason::kAlreadyConverged: return "already_converged";
    case StopReason::kStepTolerance: return "step_tolerance";
    case StopReason::kCostTolerance: return "cost_tolerance";
    case StopReason::kMaxIterations: return "max_iterations";
    case StopReason::kDampingExhausted: return "damping_exhausted";
  }
  return "unknown";
}

namespace {

double totalCost(const std::vector<ResidualBlock>& blocks, const PoseSE3& T) {
  double cost = 0.0;
  for (const auto& blk : blocks) {
    const double r = blk.kind == ResidualKind::kPointToLine ? pointToLineResidual(blk, T)
                                                            : pointToPlaneResidual(blk, T);
    cost += blk.weight * r * r;
  }
  return cost;
}

PoseSE3 applyStep(const PoseSE3& T, const Eigen::Matrix<double, 6, 1>& step) {
  PoseSE3 out;
  out.rotation = (expSO3(step.head<3>()) * T.rotation).normalized();
  out.translation = T.translation + step.tail<3>();
  return out;
}

}  // namespace

std::pair<PoseSE3, SolveReport> lmSolve(const std::vector<ResidualBlock>& blocks,
                                        const PoseSE3& initial_pose,
                                        const SolverOptions& opts) {
  if (blocks.size() < 6) {
    throw UnderConstrained("need at least 6 scalar residuals, got " +
                           std::to_string(blocks.size()));
  }

  PoseSE3 T = initial_pose;
  T.rotation.normalize();

  SolveReport report;
  report.initial_cost = totalCost(blocks, T);
  report.final_cost = report.initial_cost;

  if (report.initial_cost <= opts.zero_cost_threshold) {
    report.reason = StopReason::kAlreadyConverged;
    return {T, report};
  }

  double lambda = opts.initial_lambda;
  double cost = report.initial_cost;

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    Eigen::Matrix<double, 6, 6> JtJ = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 1> Jtf = Eigen::Matrix<double, 6, 1>::Zero();
    for (const auto& blk : blocks) {
      double r;
      Eigen::Matrix<double, 1, 6> J;
      evaluateResidual(blk, T, r, J);
      JtJ += blk.weight * J.transpose() * J;
      Jtf += blk.weight * J.transpose() * r;
    }

    bool accepted = false;
    for (int retry = 0; retry <= opts.max_reject_retries; ++retry) {
      Eigen::Matrix<double, 6, 6> damped = JtJ;
      damped.diagonal() += lambda * JtJ.diagonal();
      damped.diagonal() = damped.diagonal().cwiseMax(1e-300);

      const Eigen::LDLT<Eigen::Matrix<double, 6, 6>> ldlt(damped);
      if (ldlt.info() != Eigen::Success) {
        lambda *= opts.lambda_up;
        continue;
      }
      const Eigen::Matrix<double, 6, 1> step = ldlt.solve(-Jtf);
      if (!step.allFinite()) {
        lambda *= opts.lambda_up;
        continue;
      }

      if (step.norm() < opts.step_tolerance) {
        report.reason = StopReason::kStepTolerance;
        report.final_cost = cost;
        return {T, report};
      }

      const PoseSE3 candidate = applyStep(T, step);
      const double new_cost = totalCost(blocks, candidate);
      if (new_cost < cost) {
        T = candidate;
        const double decrease = (cost - new_cost) / cost;
        cost = new_cost;
        lambda = std::max(lambda / opts.lambda_down, 1e-12);
        ++report.iterations;
        report.cost_history.push_back(cost);
        accepted = true;
        if (decrease < opts.relative_cost_tolerance || cost <= opts.zero_cost_threshold) {
          report.reason = StopReason::kCostTolerance;
          report.final_cost = cost;
          return {T, report};
        }
        break;
      }
      lambda *= opts.lambda_up;
    }

    if (!accepted) {
      // Either the system stayed singular or no damping produced a decrease;
      // a decrease must exist for a nonzero gradient, so treat a zero-ish
      // gradient as convergence and a singular system as an error.
      if (Jtf.norm() < 1e-14) {
        report.reason = StopReason::kStepTolerance;
        report.final_cost = cost;
        return {T, report};
      }
      const Eigen::FullPivLU<Eigen::Matrix<double, 6, 6>> lu(JtJ);
      if (lu.rank() < 6) {
        throw SingularNormalEquations("normal equations rank " +
                                      std::to_string(lu.rank()) + " after damping retries");
      }
      report.reason = StopReason::kDampingExhausted;
      report.final_cost = cost;
      return {T, report};
    }
  }

  report.reason = StopReason::kMaxIterations;
  report.final_cost = cost;
  return {T, report};
}

}  // namespace gcloam
