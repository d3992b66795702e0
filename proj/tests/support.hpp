// Shared helpers for the test suites: random samplers on the manifolds and
// the independent residual oracle for the reduced dynamics.
#pragma once

#include <aqualift/dynamics.hpp>
#include <aqualift/manifold.hpp>

#include <random>

namespace aqualift::test {

inline std::mt19937_64& rng() {
  static std::mt19937_64 gen(20240817ull);
  return gen;
}

inline double uniform(double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  return d(rng());
}

inline Vec3 random_vec3(double scale = 1.0) {
  return scale * Vec3(uniform(-1, 1), uniform(-1, 1), uniform(-1, 1));
}

inline UnitVector random_unit() {
  Vec3 v;
  do {
    v = random_vec3();
  } while (v.norm() < 1e-3);
  return UnitVector::normalize(v);
}

inline Rotation random_rotation(double angle_scale = M_PI) {
  return exp_rotation(angle_scale * random_vec3());
}

inline SystemState random_state(const SystemParams& p, double motion_scale = 1.0) {
  SystemState s = SystemState::hover(p);
  s.x = random_vec3(1.0);
  s.v = random_vec3(motion_scale);
  s.R = random_rotation(0.5);
  s.Omega = random_vec3(motion_scale);
  for (int j = 0; j < p.n; ++j) {
    s.cables[j].q = random_unit();
    Vec3 w = random_vec3(motion_scale);
    // The component of omega along q does not move q; keep samples transverse.
    s.cables[j].omega = w - s.cables[j].q.v.dot(w) * s.cables[j].q.v;
    s.quads[j].R = random_rotation(0.5);
    s.quads[j].Omega = random_vec3(motion_scale);
  }
  return s;
}

// Residuals of the reduced equations for a candidate derivative, evaluated
// directly from the printed balances (independent of the solver path):
//   translational, rotational, and each cable equation.
struct DynamicsResiduals {
  double translational = 0.0;
  double rotational = 0.0;
  double cables = 0.0;

  double worst() const { return std::max({translational, rotational, cables}); }
};

inline DynamicsResiduals reduced_equation_residuals(const SystemState& s, const FullControl& c,
                                                    const SystemParams& p, const Disturbance& d,
                                                    const StateDerivative& der) {
  const int n = p.n;
  const double mq = p.m_quad;
  const double L = p.cable_length;
  const double m_load = p.load_mass.mass(s.t);
  const double mdot = p.load_mass.mass_rate(s.t);
  const Mat3 J = p.load_inertia.inertia(s.t);
  const Mat3 Jdot = p.load_inertia.inertia_rate(s.t);
  const double m_eff = n * mq + m_load;
  Mat3 J_eff = J;
  for (int j = 0; j < n; ++j) J_eff -= mq * hat(p.attach[j]) * hat(p.attach[j]);

  const Mat3 R = s.R.m;
  const Vec3 ge3 = p.g * Vec3::UnitZ();
  const Mat3 motion = hat(s.Omega) * hat(s.Omega) + hat(der.dOmega);

  Vec3 trans = m_eff * (der.dv + ge3) + mdot * s.v - d.wind_at(s.t);
  Vec3 rot = J_eff * der.dOmega + s.Omega.cross(J_eff * s.Omega) + Jdot * s.Omega;
  double cable_worst = 0.0;
  for (int j = 0; j < n; ++j) {
    const Vec3 q = s.cables[j].q.v;
    const Vec3 omega = s.cables[j].omega;
    const Vec3 qdd = der.domega[j].cross(q) - omega.squaredNorm() * q;
    trans -= c.u[j] - mq * R * (motion * p.attach[j]) + mq * L * qdd;
    rot -= mq * hat(p.attach[j]) * R.transpose() *
           (-ge3 - der.dv + L * qdd + c.u[j] / mq);
    const Vec3 cable_res =
        der.domega[j] -
        (1.0 / L) * q.cross(der.dv + R * (motion * p.attach[j]) + ge3 - c.u[j] / mq);
    cable_worst = std::max(cable_worst, cable_res.norm());
  }

  DynamicsResiduals out;
  out.translational = trans.norm();
  out.rotational = rot.norm();
  out.cables = cable_worst;
  return out;
}

}  // namespace aqualift::test
