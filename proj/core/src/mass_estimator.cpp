#include <aqualift/mass_estimator.hpp>

#include <aqualift/errors.hpp>

#include <cmath>

namespace aqualift {

ParamEstimate regress_step(const ParamEstimate& est, const MassModel& model,
                           const RegressorSample& sample, double dt) {
  if (!(dt > 0.0)) throw ValidationError("regress_step: dt must be positive");
  const double t = sample.t;
  const double m = model.mass(est.theta, t);
  const double M = model.mass_rate(est.theta, t);
  const VecX gm = model.grad_mass(est.theta, t);
  const VecX gM = model.grad_rate(est.theta, t);

  const Vec3 residual = sample.thrust_sum - m * sample.w - M * sample.v;

  ParamEstimate out = est;
  for (int i = 0; i < model.dim(); ++i) {
    const Vec3 psi = gm(i) * sample.w + gM(i) * sample.v;
    out.theta(i) += dt * est.gamma(i) * psi.dot(residual);
  }
  model.project(out.theta, t + dt, est.m_min);
  return out;
}

double constant_mass_update(double m_hat, const RegressorSample& sample, double gamma,
                            double dt, double m_min) {
  const Vec3 psi = 1.0 * sample.w + 0.0 * sample.v;
  const Vec3 residual = sample.thrust_sum - m_hat * sample.w - 0.0 * sample.v;
  const double next = m_hat + dt * gamma * psi.dot(residual);
  return std::max(next, m_min);
}

double ErrorDynamics::lambda_min() const {
  if (dim == 1) return S(0, 0);
  const double mean = 0.5 * (S(0, 0) + S(1, 1));
  const double rad = std::hypot(0.5 * (S(0, 0) - S(1, 1)), S(0, 1));
  return mean - rad;
}

ErrorDynamics error_dynamics_matrices(const MassModel& model, const ParamEstimate& est,
                                      const VecX& theta_true, const RegressorSample& sample) {
  const double t = sample.t;
  const Vec3 w = sample.w;
  const Vec3 v = sample.v;

  const double m_hat = model.mass(est.theta, t);
  const double M_hat = model.mass_rate(est.theta, t);
  const double m_true = model.mass(theta_true, t);
  const double M_true = model.mass_rate(theta_true, t);

  // Synthesized so that  sum mu - m_true w - M_true v + Delta_m = 0  exactly.
  const Vec3 Delta_m = m_true * w + M_true * v - sample.thrust_sum;

  ErrorDynamics ed;
  ed.xi = Vec2(m_hat - m_true, M_hat - M_true);

  if (model.kind() == MassModelKind::Constant) {
    // Scalar reduction: e_M is identically zero for this model, and the 2x2
    // form degenerates. e_m' = -gamma ||w||^2 e_m - gamma w . Delta_m.
    const double gamma = est.gamma(0);
    ed.dim = 1;
    ed.A(0, 0) = gamma * w.squaredNorm();
    ed.S = ed.A;
    ed.Delta(0) = -gamma * w.dot(Delta_m);
    ed.xi(1) = 0.0;
    return ed;
  }

  const VecX gm = model.grad_mass(est.theta, t);
  const VecX gM = model.grad_rate(est.theta, t);
  const VecX K = est.gamma;

  const double mm = gm.dot(K.asDiagonal() * gm);   // ||grad m||_K^2
  const double MM = gM.dot(K.asDiagonal() * gM);   // ||grad M||_K^2
  const double mM = gm.dot(K.asDiagonal() * gM);   // <grad m, grad M>_K
  const double ww = w.squaredNorm();
  const double vv = v.squaredNorm();
  const double wv = w.dot(v);

  ed.dim = 2;
  ed.A(0, 0) = mm * ww + mM * wv;
  ed.A(0, 1) = mm * wv + mM * vv - 1.0;  // the -1 carries the e_M coupling in e_m'
  ed.A(1, 0) = mM * ww + MM * wv;
  ed.A(1, 1) = mM * wv + MM * vv;
  ed.S = 0.5 * (ed.A + ed.A.transpose());

  // Phi = grad_m w^T + grad_M v^T; the curvature term R enters Delta(1).
  const double curvature = model.mass_accel(est.theta, t) - model.mass_accel(theta_true, t);
  const Vec3 KPhi_m = mm * w + mM * v;  // (grad m)^T K Phi as a row vector
  const Vec3 KPhi_M = mM * w + MM * v;  // (grad M)^T K Phi
  ed.Delta(0) = -KPhi_m.dot(Delta_m);
  ed.Delta(1) = curvature - KPhi_M.dot(Delta_m);
  return ed;
}

EissReport eiss_bound_check(const std::vector<EissSample>& window, double mu, double M_cap) {
  if (window.size() < 2) throw ValidationError("eiss_bound_check: need at least two samples");

  auto lmin = [](const EissSample& s) {
    if (s.dim == 1) return s.S(0, 0);
    const double mean = 0.5 * (s.S(0, 0) + s.S(1, 1));
    const double rad = std::hypot(0.5 * (s.S(0, 0) - s.S(1, 1)), s.S(0, 1));
    return mean - rad;
  };

  EissReport rep;
  double int_delta = 0.0;
  for (std::size_t i = 0; i + 1 < window.size(); ++i) {
    const double h = window[i + 1].t - window[i].t;
    const double a = lmin(window[i]);
    const double b = lmin(window[i + 1]);
    rep.int_lambda_min += 0.5 * h * (a + b);
    rep.int_lambda_min_pos += 0.5 * h * (std::max(a, 0.0) + std::max(b, 0.0));
    int_delta += 0.5 * h * (window[i].Delta.norm() + window[i + 1].Delta.norm());
  }

  rep.hypotheses_ok = rep.int_lambda_min >= mu && rep.int_lambda_min_pos <= M_cap;
  if (!rep.hypotheses_ok) {
    throw HypothesisUnmet("eiss_bound_check: excitation hypotheses fail for the supplied window");
  }

  rep.lhs = window.back().xi.norm();
  rep.rhs = std::exp(-mu) * window.front().xi.norm() + std::exp(M_cap - mu) * int_delta;
  rep.bound_holds = rep.lhs <= rep.rhs + 1e-8;
  return rep;
}

}  // namespace aqualift
