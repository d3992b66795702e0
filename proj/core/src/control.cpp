#include <aqualift/control.hpp>

#include <aqualift/errors.hpp>

#include <cmath>

namespace aqualift {

void Gains::validate() const {
  if (K_x <= 0 || K_v <= 0 || K_R <= 0 || K_Omega <= 0 || k_q <= 0 || k_omega <= 0 ||
      k_R_quad <= 0 || k_Omega_quad <= 0 || thrust_cap < 0) {
    throw ValidationError("Gains: all gains must be positive (thrust_cap may be 0)");
  }
}

Vec3 attitude_error(const Rotation& R, const Rotation& R_d) {
  const Mat3 E = R_d.m.transpose() * R.m - R.m.transpose() * R_d.m;
  return 0.5 * Vec3(E(2, 1), E(0, 2), E(1, 0));
}

Wrench desired_wrench(const Measurement& meas, const LoadReference& ref, double m_hat,
                      double mdot_hat, const Mat3& J_hat, const Mat3& Jdot_hat,
                      const Gains& gains, double g) {
  const Vec3 e_x = meas.x - ref.x;
  const Vec3 e_v = meas.v - ref.v;
  Wrench w;
  w.force = m_hat * (ref.a + g * Vec3::UnitZ() - gains.K_x * e_x - gains.K_v * e_v) +
            mdot_hat * meas.v;

  const Vec3 e_R = attitude_error(meas.R, ref.R);
  const Vec3 e_Om = meas.Omega - meas.R.m.transpose() * (ref.R.m * ref.Omega);
  w.torque = hat(meas.Omega) * (J_hat * meas.Omega) + Jdot_hat * meas.Omega +
             J_hat * (-gains.K_R * e_R - gains.K_Omega * e_Om);
  return w;
}

std::vector<Vec3> allocate_cable_forces(const Wrench& w, const Rotation& R,
                                        const std::vector<Vec3>& attach) {
  const int n = static_cast<int>(attach.size());
  MatX P = MatX::Zero(6, 3 * n);
  for (int j = 0; j < n; ++j) {
    P.block<3, 3>(0, 3 * j) = Mat3::Identity();
    P.block<3, 3>(3, 3 * j) = hat(attach[j]) * R.m.transpose();
  }

  Eigen::JacobiSVD<MatX> svd(P, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-9);
  if (svd.rank() < 6) {
    throw RankDeficientAllocation("allocate_cable_forces: allocation map has rank " +
                                  std::to_string(svd.rank()) + " < 6");
  }

  VecX rhs(6);
  rhs << w.force, w.torque;
  const VecX F = svd.solve(rhs);  // minimum-norm solution on the row space

  std::vector<Vec3> out(n);
  for (int j = 0; j < n; ++j) out[j] = F.segment<3>(3 * j);
  return out;
}

CableSetpoint cable_setpoint_and_mu(const Vec3& F_j, const UnitVector& q_j,
                                    const std::optional<UnitVector>& held, double eps) {
  CableSetpoint sp;
  const double f = F_j.norm();
  if (f <= eps) {
    sp.degenerate = true;
    sp.mu = Vec3::Zero();
    sp.q_desired = held.value_or(q_j);
    return sp;
  }
  sp.mu = q_j.v.dot(F_j) * q_j.v;
  sp.q_desired = UnitVector::normalize(-F_j / f);
  return sp;
}

Vec3 cable_feedback_nu(const UnitVector& q_j, const Vec3& omega_j, const UnitVector& q_desired,
                       const Gains& gains, double m_quad) {
  const Vec3 q = q_j.v;
  const Vec3 omega_perp = omega_j - q.dot(omega_j) * q;
  const Vec3 z = gains.k_q * q.cross(q_desired.v) - gains.k_omega * omega_perp;
  return m_quad * q.cross(z);  // perpendicular to q by construction
}

Vec3 assemble_u(const Vec3& mu_j, const Vec3& nu_j, const UnitVector& q_j, const Vec3& omega_j,
                const Vec3& r_j, const Measurement& meas, const Vec3& Omega_dot,
                const SystemParams& params) {
  const Vec3 q = q_j.v;
  if (std::abs(q.dot(nu_j)) > 1e-9 * nu_j.norm() ||
      (mu_j - q.dot(mu_j) * q).norm() > 1e-9 * mu_j.norm()) {
    throw ValidationError("assemble_u: mu/nu violate the cable decomposition");
  }
  const Mat3 Om_hat = hat(meas.Omega);
  const Mat3 motion = Om_hat * Om_hat + hat(Omega_dot);
  return mu_j + nu_j +
         params.m_quad * (meas.vdot + meas.R.m * (motion * r_j) + params.g * Vec3::UnitZ()) +
         params.m_quad * params.cable_length * omega_j.squaredNorm() * q;
}

Rotation desired_quad_attitude(const Vec3& u_j) {
  const Vec3 b3 = u_j.normalized();
  Vec3 ref = Vec3::UnitX();
  if (std::abs(b3.dot(ref)) > 0.99) ref = Vec3::UnitY();
  const Vec3 b1 = (ref - b3.dot(ref) * b3).normalized();
  const Vec3 b2 = b3.cross(b1);
  Mat3 R;
  R.col(0) = b1;
  R.col(1) = b2;
  R.col(2) = b3;
  return Rotation(R);
}

QuadAttitudeCommand quad_attitude_control(const Vec3& u_j, const Rotation& R_j,
                                          const Vec3& Omega_j, const SystemParams& params,
                                          const Gains& gains, double eps) {
  if (u_j.norm() <= eps) {
    throw DegenerateThrust("quad_attitude_control: thrust command too small to define attitude");
  }
  const Rotation R_d = desired_quad_attitude(u_j);
  const Vec3 e_R = attitude_error(R_j, R_d);

  QuadAttitudeCommand cmd;
  cmd.f = u_j.dot(R_j.m.col(2));
  cmd.torque = params.J_quad * (-gains.k_R_quad * e_R - gains.k_Omega_quad * Omega_j) +
               Omega_j.cross(params.J_quad * Omega_j);
  return cmd;
}

CooperativeController::CooperativeController(SystemParams params, Gains gains)
    : params_(std::move(params)), gains_(gains), held_setpoints_(params_.n) {
  params_.validate();
  gains_.validate();
}

ControlStep CooperativeController::update(const Measurement& meas,
                                          const std::vector<CableState>& cables,
                                          const std::vector<QuadState>& quads,
                                          const LoadReference& ref, double m_hat,
                                          double mdot_hat, const Mat3& J_hat,
                                          const Mat3& Jdot_hat) {
  const int n = params_.n;
  ControlStep out;
  out.wrench = desired_wrench(meas, ref, m_hat, mdot_hat, J_hat, Jdot_hat, gains_, params_.g);
  out.F = allocate_cable_forces(out.wrench, meas.R, params_.attach);

  out.wrench_control = WrenchControl::zero(n);
  out.full_control = FullControl::zero(n);
  out.f.resize(n);

  for (int j = 0; j < n; ++j) {
    const auto sp = cable_setpoint_and_mu(out.F[j], cables[j].q, held_setpoints_[j]);
    if (!sp.degenerate) held_setpoints_[j] = sp.q_desired;
    const Vec3 nu = cable_feedback_nu(cables[j].q, cables[j].omega, sp.q_desired, gains_,
                                      params_.m_quad);
    out.wrench_control.mu[j] = sp.mu;
    out.wrench_control.nu[j] = nu;
    out.mu_sum += sp.mu;

    Vec3 u = assemble_u(sp.mu, nu, cables[j].q, cables[j].omega, params_.attach[j], meas,
                        omega_dot_lag_, params_);
    if (gains_.thrust_cap > 0.0 && u.norm() > gains_.thrust_cap) {
      u *= gains_.thrust_cap / u.norm();
    }
    out.full_control.u[j] = u;

    const auto cmd = quad_attitude_control(u, quads[j].R, quads[j].Omega, params_, gains_);
    out.f[j] = cmd.f;
    out.full_control.torque[j] = cmd.torque;
    out.wrench_control.torque[j] = cmd.torque;
  }
  return out;
}

}  // namespace aqualift
