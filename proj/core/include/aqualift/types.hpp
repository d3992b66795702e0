#pragma once

#include <Eigen/Dense>

namespace aqualift {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

inline constexpr double kGravity = 9.81;  // m/s^2

inline Vec3 e1() { return Vec3::UnitX(); }
inline Vec3 e2() { return Vec3::UnitY(); }
inline Vec3 e3() { return Vec3::UnitZ(); }

}  // namespace aqualift
