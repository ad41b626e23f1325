#pragma once

#include <Eigen/Dense>

namespace nhb {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// Positive quarter turn in the plane.
inline Vec2 quarter_turn(const Vec2& v) { return {-v.y(), v.x()}; }

inline Mat2 quarter_turn_matrix() {
  Mat2 j;
  j << 0.0, -1.0, 1.0, 0.0;
  return j;
}

/// Generalized cross product: (a ^ b) w = (a.w) b - (b.w) a.
inline MatX wedge(const VecX& a, const VecX& b) { return b * a.transpose() - a * b.transpose(); }

/// Half the Frobenius norm squared, i.e. (1/2) Tr(S S^T).
inline double half_trace_norm2(const MatX& s) { return 0.5 * s.squaredNorm(); }

/// Kinetic metric norm squared of (S,u) with m = 1.
inline double kinetic_norm2(const MatX& s, const VecX& u) { return half_trace_norm2(s) + u.squaredNorm(); }

inline Mat3 hat(const Vec3& w) {
  Mat3 m;
  m << 0.0, -w.z(), w.y(), w.z(), 0.0, -w.x(), -w.y(), w.x(), 0.0;
  return m;
}

inline Vec3 vee(const Mat3& s) { return {s(2, 1), s(0, 2), s(1, 0)}; }

/// Largest absolute deviation of S from skew symmetry.
inline double skew_defect(const MatX& s) { return (s + s.transpose()).cwiseAbs().maxCoeff(); }

}  // namespace nhb
