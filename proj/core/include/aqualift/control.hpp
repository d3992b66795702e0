#pragma once

#include <aqualift/dynamics.hpp>
#include <aqualift/manifold.hpp>
#include <aqualift/types.hpp>

#include <optional>
#include <vector>

namespace aqualift {

struct Gains {
  double K_x = 2.0;          // load position, 1/s^2
  double K_v = 3.0;          // load velocity, 1/s
  double K_R = 2.0;          // load attitude; yaw authority passes through the
  double K_Omega = 3.0;      // cable loop, so keep these below its bandwidth
  double k_q = 16.0;         // cable direction
  double k_omega = 8.0;      // cable rate
  double k_R_quad = 40.0;    // quadrotor attitude (per unit inertia)
  double k_Omega_quad = 12.0;
  double thrust_cap = 0.0;   // N per quadrotor; 0 disables the clamp

  void validate() const;
};

struct LoadReference {
  Vec3 x = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 a = Vec3::Zero();
  Rotation R;                // desired load attitude (identity by default)
  Vec3 Omega = Vec3::Zero();
};

/// Force/torque the load should feel so that the simplified translational and
/// rotational equations track the reference with PD error dynamics:
///   F_d = m_hat (a_d + g e3 - K_x e_x - K_v e_v) + mdot_hat v_L
///   M_d = hat(Omega) J_hat Omega + Jdot_hat Omega + J_hat (-K_R e_R - K_Om e_Om)
struct Wrench {
  Vec3 force = Vec3::Zero();
  Vec3 torque = Vec3::Zero();
};

Wrench desired_wrench(const Measurement& meas, const LoadReference& ref, double m_hat,
                      double mdot_hat, const Mat3& J_hat, const Mat3& Jdot_hat,
                      const Gains& gains, double g = kGravity);

/// Attitude error e_R = vee(R_d^T R - R^T R_d) / 2 on SO(3).
Vec3 attitude_error(const Rotation& R, const Rotation& R_d);

/// Minimum-norm distribution of a load wrench over per-cable force vectors:
/// stacked map P = [I ... I; hat(r_1) R^T ... hat(r_N) R^T], F = pinv(P) w.
/// Throws RankDeficientAllocation when rank(P) < 6.
std::vector<Vec3> allocate_cable_forces(const Wrench& w, const Rotation& R,
                                        const std::vector<Vec3>& attach);

struct CableSetpoint {
  Vec3 mu = Vec3::Zero();   // component of F_j along q_j
  UnitVector q_desired;     // direction the cable should settle to
  bool degenerate = false;  // ||F_j|| below threshold: mu = 0, setpoint held
};

/// mu_j = (q_j . F_j) q_j and q_desired = -F_j/||F_j||. When ||F_j|| is below
/// eps the tension direction is undefined: mu is zeroed and the previous
/// setpoint (or current cable direction) is held.
CableSetpoint cable_setpoint_and_mu(const Vec3& F_j, const UnitVector& q_j,
                                    const std::optional<UnitVector>& held,
                                    double eps = 1e-6);

/// Cable-transverse feedback nu_j = m_Q hat(q_j)(k_q q_j x q_d - k_om w_perp);
/// perpendicular to q_j by construction.
Vec3 cable_feedback_nu(const UnitVector& q_j, const Vec3& omega_j, const UnitVector& q_desired,
                       const Gains& gains, double m_quad);

/// Full thrust command of one quadrotor:
///   u_j = mu_j + nu_j + m_Q (vdot + R(hat(Om)^2 + hat(Omdot)) r_j + g e3)
///         + m_Q L ||omega_j||^2 q_j
/// vdot comes from measurement and Omega_dot from the previous derivative
/// evaluation (one-step lag breaks the algebraic loop). Checks the mu/nu
/// orthogonality invariants at runtime.
Vec3 assemble_u(const Vec3& mu_j, const Vec3& nu_j, const UnitVector& q_j, const Vec3& omega_j,
                const Vec3& r_j, const Measurement& meas, const Vec3& Omega_dot,
                const SystemParams& params);

/// Desired quadrotor attitude whose body z axis carries the thrust direction.
/// Heading convention: world x projected onto the plane normal to b3
/// (fallback to world y when nearly parallel).
Rotation desired_quad_attitude(const Vec3& u_j);

struct QuadAttitudeCommand {
  double f = 0.0;       // scalar thrust along body z, N
  Vec3 torque = Vec3::Zero();
};

/// Geometric attitude PD with gyroscopic feedforward:
///   f = u . R e3,  M = J_Q(-k_R e_R - k_Om Omega) + Omega x J_Q Omega.
/// Throws DegenerateThrust when ||u|| <= eps.
QuadAttitudeCommand quad_attitude_control(const Vec3& u_j, const Rotation& R_j,
                                          const Vec3& Omega_j, const SystemParams& params,
                                          const Gains& gains, double eps = 1e-6);

/// Everything one control step produces, for logging and for either plant.
struct ControlStep {
  Wrench wrench;
  std::vector<Vec3> F;       // allocated per-cable forces
  WrenchControl wrench_control;
  FullControl full_control;
  std::vector<double> f;     // scalar thrusts
  Vec3 mu_sum = Vec3::Zero();
};

/// Stateful cooperative controller: wrench design, allocation, cable loops,
/// quadrotor inner loops. Holds the lagged load angular acceleration and the
/// per-cable setpoints that survive degenerate tension requests.
class CooperativeController {
 public:
  CooperativeController(SystemParams params, Gains gains);

  ControlStep update(const Measurement& meas, const std::vector<CableState>& cables,
                     const std::vector<QuadState>& quads, const LoadReference& ref,
                     double m_hat, double mdot_hat, const Mat3& J_hat, const Mat3& Jdot_hat);

  /// Feed back the load angular acceleration obtained from the last plant
  /// derivative evaluation (used by assemble_u at the next update).
  void set_angular_acceleration(const Vec3& Omega_dot) { omega_dot_lag_ = Omega_dot; }

  const Gains& gains() const { return gains_; }

 private:
  SystemParams params_;
  Gains gains_;
  Vec3 omega_dot_lag_ = Vec3::Zero();
  std::vector<std::optional<UnitVector>> held_setpoints_;
};

}  // namespace aqualift
