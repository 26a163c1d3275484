#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace gcloam {

/// Rigid transform: p' = rotation * p + translation.
struct PoseSE3 {
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  PoseSE3() = default;
  PoseSE3(const Eigen::Quaterniond& q, const Eigen::Vector3d& t)
      : rotation(q.normalized()), translation(t) {}

  static PoseSE3 Identity() { return PoseSE3(); }

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const {
    return rotation * p + translation;
  }

  PoseSE3 inverse() const {
    const Eigen::Quaterniond qi = rotation.conjugate();
    return PoseSE3(qi, qi * (-translation));
  }

  Eigen::Matrix4d matrix() const {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = rotation.toRotationMatrix();
    m.topRightCorner<3, 1>() = translation;
    return m;
  }

  static PoseSE3 fromMatrix(const Eigen::Matrix4d& m) {
    return PoseSE3(Eigen::Quaterniond(Eigen::Matrix3d(m.topLeftCorner<3, 3>())),
                   m.topRightCorner<3, 1>());
  }
};

/// compose(a, b): apply b first, then a.
inline PoseSE3 compose(const PoseSE3& a, const PoseSE3& b) {
  return PoseSE3(a.rotation * b.rotation, a.rotation * b.translation + a.translation);
}

inline Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

/// SO(3) exponential: axis-angle vector to quaternion.
inline Eigen::Quaterniond expSO3(const Eigen::Vector3d& omega) {
  const double theta = omega.norm();
  if (theta < 1e-12) {
    Eigen::Quaterniond q(1.0, 0.5 * omega.x(), 0.5 * omega.y(), 0.5 * omega.z());
    q.normalize();
    return q;
  }
  const Eigen::Vector3d axis = omega / theta;
  return Eigen::Quaterniond(Eigen::AngleAxisd(theta, axis));
}

/// SO(3) logarithm: quaternion to axis-angle vector.
inline Eigen::Vector3d logSO3(const Eigen::Quaterniond& q_in) {
  Eigen::Quaterniond q = q_in.normalized();
  if (q.w() < 0) q.coeffs() *= -1.0;  // shortest rotation
  const double sin_half = q.vec().norm();
  const double cos_half = q.w();
  if (sin_half < 1e-12) return 2.0 * q.vec();
  const double theta = 2.0 * std::atan2(sin_half, cos_half);
  return (theta / sin_half) * q.vec();
}

inline double rotationAngle(const Eigen::Quaterniond& q) {
  return logSO3(q).norm();
}

namespace detail {

// Left Jacobian of SO(3): V(w) = I + (1-cos)/t^2 [w]x + (t-sin)/t^3 [w]x^2.
inline Eigen::Matrix3d leftJacobianSO3(const Eigen::Vector3d& omega) {
  const double theta = omega.norm();
  const Eigen::Matrix3d W = skew(omega);
  if (theta < 1e-6) {
    return Eigen::Matrix3d::Identity() + 0.5 * W + (1.0 / 6.0) * W * W;
  }
  const double t2 = theta * theta;
  return Eigen::Matrix3d::Identity() + ((1.0 - std::cos(theta)) / t2) * W +
         ((theta - std::sin(theta)) / (t2 * theta)) * W * W;
}

inline Eigen::Matrix3d leftJacobianInvSO3(const Eigen::Vector3d& omega) {
  const double theta = omega.norm();
  const Eigen::Matrix3d W = skew(omega);
  if (theta < 1e-6) {
    return Eigen::Matrix3d::Identity() - 0.5 * W + (1.0 / 12.0) * W * W;
  }
  const double half = 0.5 * theta;
  const double coeff = (1.0 - half * std::cos(half) / std::sin(half)) / (theta * theta);
  return Eigen::Matrix3d::Identity() - 0.5 * W + coeff * W * W;
}

}  // namespace detail

/// SE(3) logarithm as (rho, omega); expSE3(logSE3(T)) == T.
inline Eigen::Matrix<double, 6, 1> logSE3(const PoseSE3& pose) {
  const Eigen::Vector3d omega = logSO3(pose.rotation);
  Eigen::Matrix<double, 6, 1> xi;
  xi.head<3>() = detail::leftJacobianInvSO3(omega) * pose.translation;
  xi.tail<3>() = omega;
  return xi;
}

inline PoseSE3 expSE3(const Eigen::Matrix<double, 6, 1>& xi) {
  const Eigen::Vector3d rho = xi.head<3>();
  const Eigen::Vector3d omega = xi.tail<3>();
  return PoseSE3(expSO3(omega), detail::leftJacobianSO3(omega) * rho);
}

/// Fraction of a rigid motion along its screw axis; interpolate(T, 1) == T,
/// interpolate(T, a).compose-inverse matches interpolate(T.inverse(), a).
inline PoseSE3 interpolate(const PoseSE3& motion, double fraction) {
  return expSE3(fraction * logSE3(motion));
}

}  // namespace gcloam
