#include <aqualift/manifold.hpp>

#include <aqualift/errors.hpp>

#include <cmath>

namespace aqualift {

Mat3 hat(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
      -v.y(), v.x(), 0.0;
  return m;
}

Vec3 vee(const Mat3& skew) {
  const double sym = (skew + skew.transpose()).norm();
  if (sym >= 1e-9) {
    throw NonSkew("vee: matrix is not skew-symmetric, ||M + M^T|| = " + std::to_string(sym));
  }
  // Average the two off-diagonal copies so tiny asymmetries cancel.
  return Vec3(0.5 * (skew(2, 1) - skew(1, 2)),
              0.5 * (skew(0, 2) - skew(2, 0)),
              0.5 * (skew(1, 0) - skew(0, 1)));
}

Rotation exp_rotation(const Vec3& omega) {
  const double theta = omega.norm();
  double a, b;  // R = I + a*hat(w) + b*hat(w)^2
  if (theta < 1e-8) {
    const double t2 = theta * theta;
    a = 1.0 - t2 / 6.0;
    b = 0.5 - t2 / 24.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / (theta * theta);
  }
  const Mat3 w = hat(omega);
  return Rotation((Mat3::Identity() + a * w + b * (w * w)).eval());
}

Rotation Rotation::project(const Mat3& raw) {
  // Newton iteration for the polar factor; quadratic convergence near the
  // manifold, two sweeps take integrator drift to machine precision.
  Mat3 r = raw;
  for (int i = 0; i < 3; ++i) {
    const Mat3 e = r.transpose() * r - Mat3::Identity();
    if (e.norm() < 1e-15) break;
    r = r * (Mat3::Identity() - 0.5 * e);
  }
  // Far-from-manifold inputs (or reflections) fall back to SVD.
  if ((r.transpose() * r - Mat3::Identity()).norm() > 1e-12 || r.determinant() < 0.0) {
    Eigen::JacobiSVD<Mat3> svd(raw, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 u = svd.matrixU();
    Mat3 v = svd.matrixV();
    Mat3 s = Mat3::Identity();
    s(2, 2) = (u * v.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
    r = u * s * v.transpose();
  }
  return Rotation(r);
}

double Rotation::orthonormality_error() const {
  const double ortho = (m.transpose() * m - Mat3::Identity()).norm();
  const double det = std::abs(m.determinant() - 1.0);
  return std::max(ortho, det);
}

bool Rotation::valid(double tol) const { return orthonormality_error() <= tol; }

UnitVector UnitVector::normalize(const Vec3& raw) {
  UnitVector q;
  q.v = raw / raw.norm();
  return q;
}

Rotation integrate_attitude(const Rotation& R, const Vec3& omega_body, double dt) {
  return Rotation::project((R.m * exp_rotation(omega_body * dt).m).eval());
}

UnitVector integrate_sphere(const UnitVector& q, const Vec3& omega, double dt) {
  return UnitVector::normalize(exp_rotation(omega * dt).m * q.v);
}

Vec3 dexpinv_body(const Vec3& y, const Vec3& w) {
  return w + 0.5 * y.cross(w) + (1.0 / 12.0) * y.cross(y.cross(w));
}

Vec3 dexpinv_spatial(const Vec3& y, const Vec3& w) {
  return w - 0.5 * y.cross(w) + (1.0 / 12.0) * y.cross(y.cross(w));
}

}  // namespace aqualift
