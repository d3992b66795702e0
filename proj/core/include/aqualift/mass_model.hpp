#pragma once

#include <aqualift/types.hpp>

#include <functional>

namespace aqualift {

enum class MassModelKind { Constant, OrificeLeak, ViscousLeak, Custom };

/// Parametric load-mass model m_theta(t) with its time derivative
/// M_theta = dm/dt, analytic parameter gradients, and the second time
/// derivative used by the error-dynamics curvature term.
///
/// Built-in models:
///   Constant:    theta = (m0),        m = m0
///   OrificeLeak: theta = (m0, lam),   m = (sqrt(m0) - sqrt(lam) t)^2, clamped at 0
///   ViscousLeak: theta = (m0, lam),   m = m0 exp(-lam t)
class MassModel {
 public:
  static MassModel constant();
  static MassModel orifice_leak();
  static MassModel viscous_leak();
  static MassModel custom(int dim,
                          std::function<double(const VecX&, double)> mass,
                          std::function<double(const VecX&, double)> mass_rate,
                          std::function<VecX(const VecX&, double)> grad_mass,
                          std::function<VecX(const VecX&, double)> grad_rate,
                          std::function<double(const VecX&, double)> mass_accel);

  MassModelKind kind() const { return kind_; }
  int dim() const { return dim_; }

  double mass(const VecX& theta, double t) const { return mass_(theta, t); }
  double mass_rate(const VecX& theta, double t) const { return rate_(theta, t); }
  VecX grad_mass(const VecX& theta, double t) const { return grad_mass_(theta, t); }
  VecX grad_rate(const VecX& theta, double t) const { return grad_rate_(theta, t); }
  double mass_accel(const VecX& theta, double t) const { return accel_(theta, t); }

  /// Smallest adjustment of theta (amplitude parameter only) such that
  /// m_theta(t) >= m_min. Keeps the controller's mass inversion well posed.
  void project(VecX& theta, double t, double m_min) const;

 private:
  MassModel() = default;
  MassModelKind kind_ = MassModelKind::Custom;
  int dim_ = 0;
  std::function<double(const VecX&, double)> mass_, rate_, accel_;
  std::function<VecX(const VecX&, double)> grad_mass_, grad_rate_;
};

}  // namespace aqualift
