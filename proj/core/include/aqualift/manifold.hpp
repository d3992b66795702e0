#pragma once

#include <aqualift/types.hpp>

namespace aqualift {

/// 3x3 rotation matrix with orthonormality maintained by construction.
///
/// The raw matrix is public on purpose: most call sites are numerical code
/// that reads it directly. Anything that could push the matrix off the
/// manifold goes through project() or the integrators below.
struct Rotation {
  Mat3 m = Mat3::Identity();

  Rotation() = default;
  explicit Rotation(const Mat3& raw) : m(raw) {}

  static Rotation identity() { return Rotation{}; }

  /// Closest rotation to an arbitrary matrix (polar factor).
  static Rotation project(const Mat3& raw);

  /// Frobenius departure from orthonormality and determinant defect.
  double orthonormality_error() const;
  bool valid(double tol = 1e-9) const;

  Rotation transposed() const { return Rotation(m.transpose().eval()); }
  Vec3 operator*(const Vec3& v) const { return m * v; }
  Rotation operator*(const Rotation& o) const { return Rotation((m * o.m).eval()); }
};

/// Point on the unit sphere; normalized on construction.
struct UnitVector {
  Vec3 v = -Vec3::UnitZ();

  UnitVector() = default;
  static UnitVector normalize(const Vec3& raw);

  double norm_error() const { return std::abs(v.norm() - 1.0); }
};

/// Cross-product (skew-symmetric) matrix: hat(v) * w == v x w.
Mat3 hat(const Vec3& v);

/// Inverse of hat. Throws NonSkew when ||M + M^T|| >= 1e-9.
Vec3 vee(const Mat3& skew);

/// Rodrigues exponential; series branch below ||omega|| = 1e-8.
Rotation exp_rotation(const Vec3& omega);

/// One step of the attitude kinematics R' = R exp(hat(Omega) dt),
/// re-orthonormalized so the result is a rotation at machine precision.
Rotation integrate_attitude(const Rotation& R, const Vec3& omega_body, double dt);

/// One step of the sphere kinematics q' = exp(hat(omega) dt) q, renormalized.
UnitVector integrate_sphere(const UnitVector& q, const Vec3& omega, double dt);

/// Inverse right-trivialized tangent of exp on SO(3), truncated after the
/// second commutator (exact enough for 4th-order integration):
/// dexpinv_body(y, w) = w + y x w / 2 + y x (y x w) / 12.
/// This is the rate of the local coordinate y in R = R0 exp(hat(y)) when the
/// body angular velocity is w.
Vec3 dexpinv_body(const Vec3& y, const Vec3& w);

/// Same for spatial angular velocity, i.e. q = exp(hat(y)) q0, qdot = w x q:
/// dexpinv_spatial(y, w) = w - y x w / 2 + y x (y x w) / 12.
Vec3 dexpinv_spatial(const Vec3& y, const Vec3& w);

}  // namespace aqualift
