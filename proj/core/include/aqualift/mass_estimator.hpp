#pragma once

#include <aqualift/mass_model.hpp>
#include <aqualift/types.hpp>

#include <vector>

namespace aqualift {

/// One snapshot of the signals the mass regression consumes.
struct RegressorSample {
  Vec3 w = Vec3::Zero();           // vdot_L + g e3, m/s^2
  Vec3 v = Vec3::Zero();           // v_L, m/s
  Vec3 thrust_sum = Vec3::Zero();  // sum of mu_j, N
  double t = 0.0;
};

/// Online estimate of the model parameters with per-parameter learning rates.
struct ParamEstimate {
  VecX theta;   // dimension = model dim
  VecX gamma;   // learning rates, all > 0
  double m_min = 0.01;  // admissibility floor for the mass, kg

  double mass(const MassModel& model, double t) const { return model.mass(theta, t); }
  double mass_rate(const MassModel& model, double t) const { return model.mass_rate(theta, t); }
};

/// One explicit-Euler step of the gradient law
///   thetadot_i = gamma_i psi_i^T (sum mu - m w - M v),
///   psi_i = dm/dtheta_i w + dM/dtheta_i v,
/// followed by projection onto { theta : m_theta(t) >= m_min }.
ParamEstimate regress_step(const ParamEstimate& est, const MassModel& model,
                           const RegressorSample& sample, double dt);

/// Constant-model special case: mdot = gamma w^T (sum mu - m w).
double constant_mass_update(double m_hat, const RegressorSample& sample, double gamma,
                            double dt, double m_min = 0.01);

/// Mass-regression error dynamics at one instant, xi' = -A xi + Delta with
/// xi = (e_m, e_M). A is the exact (generally non-symmetric) state matrix;
/// S is its symmetric part, the object the excitation conditions integrate.
/// For the constant model (scalar reduction) dim = 1 and only the (0,0)
/// entries are active.
struct ErrorDynamics {
  int dim = 2;
  Mat2 A = Mat2::Zero();
  Mat2 S = Mat2::Zero();
  Vec2 Delta = Vec2::Zero();
  Vec2 xi = Vec2::Zero();

  double lambda_min() const;  // of the active block of S, closed form
};

/// Computes A, S, Delta, xi for a sample given the true parameters
/// (analysis/testing mode). The disturbance Delta_m is synthesized from the
/// sample so that the exact mass-dynamics identity holds:
///   sum mu - m_theta w - M_theta v + Delta_m = 0.
ErrorDynamics error_dynamics_matrices(const MassModel& model, const ParamEstimate& est,
                                      const VecX& theta_true, const RegressorSample& sample);

/// Exponential input-to-state stability certificate over one window.
struct EissReport {
  double int_lambda_min = 0.0;      // integral of lambda_min(S)
  double int_lambda_min_pos = 0.0;  // integral of max(lambda_min, 0)
  double lhs = 0.0;                 // ||xi(t+T)||
  double rhs = 0.0;                 // exp(-mu)||xi(t)|| + exp(M-mu) int ||Delta||
  bool hypotheses_ok = false;
  bool bound_holds = false;
};

struct EissSample {
  double t = 0.0;
  Mat2 S = Mat2::Zero();
  Vec2 Delta = Vec2::Zero();
  Vec2 xi = Vec2::Zero();
  int dim = 2;
};

/// Checks the windowed excitation hypotheses (integral of lambda_min >= mu,
/// integral of its positive part <= M_cap) by trapezoidal quadrature, then
/// evaluates both sides of the decay bound. Throws HypothesisUnmet when the
/// hypotheses fail for the supplied (mu, M_cap).
EissReport eiss_bound_check(const std::vector<EissSample>& window, double mu, double M_cap);

}  // namespace aqualift
