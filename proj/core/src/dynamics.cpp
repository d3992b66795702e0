#include <aqualift/dynamics.hpp>

#include <aqualift/errors.hpp>

#include <cmath>
#include <sstream>

namespace aqualift {

namespace {

// Deterministic frequencies/phases for the sinusoidal sensor perturbations.
// Fixed constants (not configuration) so that two runs of the same scenario
// are byte-identical; amplitudes come from the Disturbance.
constexpr double kPosFreq[3] = {1.3, 1.7, 2.3};
constexpr double kPosPhase[3] = {0.4, 1.3, 2.1};
constexpr double kVelFreq[3] = {1.9, 2.7, 3.1};
constexpr double kVelPhase[3] = {0.9, 1.7, 2.6};
constexpr double kAccFreq[3] = {2.1, 2.9, 3.7};
constexpr double kAccPhase[3] = {0.2, 1.5, 2.8};
constexpr double kAttFreq[3] = {1.1, 1.6, 2.2};
constexpr double kAttPhase[3] = {0.6, 1.9, 3.0};
constexpr double kRateFreq[3] = {1.4, 2.0, 2.6};
constexpr double kRatePhase[3] = {1.0, 0.2, 2.4};

Vec3 sinusoid(double t, const double freq[3], const double phase[3]) {
  return Vec3(std::sin(freq[0] * t + phase[0]),
              std::sin(freq[1] * t + phase[1]),
              std::sin(freq[2] * t + phase[2]));
}

Vec3 euler_quad(const Mat3& J, const Vec3& Omega, const Vec3& torque) {
  return J.llt().solve((J * Omega).cross(Omega) + torque);
}

}  // namespace

MassSchedule MassSchedule::constant(double m0) {
  return MassSchedule{[m0](double) { return m0; }, [](double) { return 0.0; }};
}

MassSchedule MassSchedule::viscous(double m0, double lambda) {
  return MassSchedule{
      [m0, lambda](double t) { return m0 * std::exp(-lambda * t); },
      [m0, lambda](double t) { return -lambda * m0 * std::exp(-lambda * t); }};
}

MassSchedule MassSchedule::orifice(double m0, double lambda) {
  const double t_dep = std::sqrt(m0 / lambda);
  return MassSchedule{
      [m0, lambda, t_dep](double t) {
        if (t >= t_dep) return 0.0;
        const double s = std::sqrt(m0) - std::sqrt(lambda) * t;
        return s * s;
      },
      [m0, lambda, t_dep](double t) {
        if (t >= t_dep) return 0.0;
        return -2.0 * std::sqrt(lambda) * (std::sqrt(m0) - std::sqrt(lambda) * t);
      }};
}

InertiaSchedule InertiaSchedule::constant(const Mat3& J0) {
  return InertiaSchedule{[J0](double) { return J0; }, [](double) { return Mat3::Zero().eval(); }};
}

InertiaSchedule InertiaSchedule::mass_proportional(const Mat3& J0, const MassSchedule& mass) {
  const double m0 = mass.mass(0.0);
  auto m = mass.mass;
  auto mdot = mass.mass_rate;
  return InertiaSchedule{
      [J0, m, m0](double t) { return (J0 * (m(t) / m0)).eval(); },
      [J0, mdot, m0](double t) { return (J0 * (mdot(t) / m0)).eval(); }};
}

SystemParams SystemParams::default_quad(double side) {
  SystemParams p;
  p.n = 4;
  p.m_quad = 0.75;
  p.J_quad = Vec3(0.02, 0.02, 0.04).asDiagonal();
  p.cable_length = 1.0;
  const double a = 0.5 * side;
  p.attach = {Vec3(a, a, 0), Vec3(-a, a, 0), Vec3(-a, -a, 0), Vec3(a, -a, 0)};
  p.load_mass = MassSchedule::constant(5.0);
  p.load_inertia = InertiaSchedule::constant(Vec3(0.12, 0.12, 0.20).asDiagonal());
  return p;
}

void SystemParams::validate() const {
  std::ostringstream bad;
  if (n < 1) bad << "n must be >= 1; ";
  if (m_quad <= 0.0) bad << "m_quad must be > 0; ";
  if (cable_length <= 0.0) bad << "cable_length must be > 0; ";
  if (static_cast<int>(attach.size()) != n) bad << "attach must have n entries; ";
  if ((J_quad - J_quad.transpose()).norm() > 1e-12 || J_quad.llt().info() != Eigen::Success) {
    bad << "J_quad must be symmetric positive-definite; ";
  }
  if (!load_mass.mass || !load_mass.mass_rate) bad << "load_mass schedule missing; ";
  if (!load_inertia.inertia || !load_inertia.inertia_rate) bad << "load_inertia schedule missing; ";
  const std::string msg = bad.str();
  if (!msg.empty()) throw ValidationError("SystemParams: " + msg);
}

SystemState SystemState::hover(const SystemParams& p) {
  SystemState s;
  s.cables.resize(p.n);
  s.quads.resize(p.n);
  for (auto& c : s.cables) c.q.v = -Vec3::UnitZ();
  return s;
}

Vec3 SystemState::quad_position(const SystemParams& p, int j) const {
  return x + R.m * p.attach[j] - p.cable_length * cables[j].q.v;
}

double SystemState::invariant_error() const {
  double worst = R.orthonormality_error();
  for (const auto& c : cables) worst = std::max(worst, c.q.norm_error());
  for (const auto& q : quads) worst = std::max(worst, q.R.orthonormality_error());
  return worst;
}

FullControl FullControl::zero(int n) {
  return FullControl{std::vector<Vec3>(n, Vec3::Zero()), std::vector<Vec3>(n, Vec3::Zero())};
}

WrenchControl WrenchControl::zero(int n) {
  return WrenchControl{std::vector<Vec3>(n, Vec3::Zero()), std::vector<Vec3>(n, Vec3::Zero()),
                       std::vector<Vec3>(n, Vec3::Zero())};
}

Vec3 wind_force(double t, double scale) {
  return scale * 0.3 * Vec3(std::sin(0.4 * t), std::cos(0.6 * t), std::sin(0.8 * t));
}

Disturbance Disturbance::none() { return Disturbance{}; }

Disturbance Disturbance::benchmark(double wind_scale) {
  Disturbance d;
  d.wind = [wind_scale](double t) { return wind_force(t, wind_scale); };
  d.noise = NoiseAmplitudes{0.01, 0.02, 0.02, 0.005};
  return d;
}

StateDerivative full_derivatives(const SystemState& s, const FullControl& c,
                                 const SystemParams& p, const Disturbance& d) {
  const int n = p.n;
  const double mq = p.m_quad;
  const double L = p.cable_length;
  const double m_load = p.load_mass.mass(s.t);
  const double mdot = p.load_mass.mass_rate(s.t);
  const Mat3 J = p.load_inertia.inertia(s.t);
  const Mat3 Jdot = p.load_inertia.inertia_rate(s.t);
  const double m_eff = n * mq + m_load;

  Mat3 J_eff = J;
  for (int j = 0; j < n; ++j) {
    const Mat3 rh = hat(p.attach[j]);
    J_eff -= mq * rh * rh;
  }

  const Mat3 R = s.R.m;
  const Mat3 Om_hat = hat(s.Omega);
  const Mat3 Om_hat2 = Om_hat * Om_hat;
  const Vec3 ge3 = p.g * Vec3::UnitZ();

  // Unknowns z = [vdot(3); Omegadot(3); omegadot_1..N (3 each)].
  const int dim = 6 + 3 * n;
  MatX A = MatX::Zero(dim, dim);
  VecX b = VecX::Zero(dim);

  A.block<3, 3>(0, 0) = m_eff * Mat3::Identity();
  b.segment<3>(0) = -m_eff * ge3 - mdot * s.v + d.wind_at(s.t);

  A.block<3, 3>(3, 3) = J_eff;
  b.segment<3>(3) = -Om_hat * (J_eff * s.Omega) - Jdot * s.Omega;

  for (int j = 0; j < n; ++j) {
    const Vec3 r = p.attach[j];
    const Mat3 rh = hat(r);
    const Vec3 q = s.cables[j].q.v;
    const Mat3 qh = hat(q);
    const double w2 = s.cables[j].omega.squaredNorm();
    const int cj = 6 + 3 * j;

    A.block<3, 3>(0, 3) -= mq * R * rh;
    A.block<3, 3>(0, cj) = mq * L * qh;
    b.segment<3>(0) += c.u[j] - mq * R * (Om_hat2 * r) - mq * L * w2 * q;

    A.block<3, 3>(3, 0) += mq * rh * R.transpose();
    A.block<3, 3>(3, cj) = L * mq * rh * R.transpose() * qh;
    b.segment<3>(3) += mq * rh * R.transpose() * (-ge3 + c.u[j] / mq - L * w2 * q);

    A.block<3, 3>(cj, 0) = -(1.0 / L) * qh;
    A.block<3, 3>(cj, 3) = (1.0 / L) * qh * R * rh;
    A.block<3, 3>(cj, cj) = Mat3::Identity();
    b.segment<3>(cj) = (1.0 / L) * qh * (R * (Om_hat2 * r) + ge3 - c.u[j] / mq);
  }

  Eigen::PartialPivLU<MatX> lu(A);
  if (lu.rcond() < 1e-12) {
    throw SingularMassMatrix("full_derivatives: coupled mass matrix is ill-conditioned");
  }
  const VecX z = lu.solve(b);

  StateDerivative out;
  out.dx = s.v;
  out.dv = z.segment<3>(0);
  out.dOmega = z.segment<3>(3);
  out.domega.resize(n);
  out.dOmega_quad.resize(n);
  for (int j = 0; j < n; ++j) {
    out.domega[j] = z.segment<3>(6 + 3 * j);
    out.dOmega_quad[j] = euler_quad(p.J_quad, s.quads[j].Omega, c.torque[j]);
  }
  return out;
}

StateDerivative closed_loop_derivatives(const SystemState& s, const WrenchControl& c,
                                        const SystemParams& p, const Disturbance& d) {
  const int n = p.n;
  for (int j = 0; j < n; ++j) {
    const Vec3 q = s.cables[j].q.v;
    const Vec3& mu = c.mu[j];
    const Vec3& nu = c.nu[j];
    // Relative to each component's own magnitude, with an absolute floor so
    // roundoff-sized components of a large decomposition cannot trip it.
    const double floor = 1e-12 * (mu.norm() + nu.norm() + 1.0);
    if (std::abs(q.dot(nu)) > 1e-9 * nu.norm() + floor ||
        (mu - q.dot(mu) * q).norm() > 1e-9 * mu.norm() + floor) {
      throw ValidationError("closed_loop_derivatives: mu/nu violate the cable decomposition");
    }
  }

  const double m_load = p.load_mass.mass(s.t);
  const double mdot = p.load_mass.mass_rate(s.t);
  const Mat3 J = p.load_inertia.inertia(s.t);
  const Mat3 Jdot = p.load_inertia.inertia_rate(s.t);
  const Vec3 ge3 = p.g * Vec3::UnitZ();

  Vec3 mu_sum = Vec3::Zero();
  Vec3 torque_sum = Vec3::Zero();
  for (int j = 0; j < n; ++j) {
    mu_sum += c.mu[j];
    torque_sum += p.attach[j].cross(s.R.m.transpose() * c.mu[j]);
  }

  auto llt = J.llt();
  if (llt.info() != Eigen::Success) {
    throw SingularInertia("closed_loop_derivatives: J_L is not positive-definite");
  }

  StateDerivative out;
  out.dx = s.v;
  out.dv = (mu_sum + d.wind_at(s.t) - mdot * s.v) / m_load - ge3;
  out.dOmega = llt.solve(torque_sum - s.Omega.cross(J * s.Omega) - Jdot * s.Omega);
  out.domega.resize(n);
  out.dOmega_quad.resize(n);
  for (int j = 0; j < n; ++j) {
    // Substituting the feedback law into the cable equation leaves
    // m_Q L omegadot_j = -q_j x nu_j; the cable length stays in the balance.
    out.domega[j] = -(1.0 / (p.m_quad * p.cable_length)) * s.cables[j].q.v.cross(c.nu[j]);
    out.dOmega_quad[j] = euler_quad(p.J_quad, s.quads[j].Omega, c.torque[j]);
  }
  return out;
}

WrenchControl redecompose_wrench(const WrenchControl& cmd, const SystemState& s) {
  WrenchControl out = cmd;
  for (std::size_t j = 0; j < cmd.mu.size(); ++j) {
    const Vec3 F = cmd.mu[j] + cmd.nu[j];
    const Vec3 q = s.cables[j].q.v;
    out.mu[j] = q.dot(F) * q;
    Vec3 nu = F - out.mu[j];
    nu -= q.dot(nu) * q;  // second sweep scrubs the roundoff component
    out.nu[j] = nu;
  }
  return out;
}

namespace {

// Per-stage rates of the flattened state: classical components plus the
// local-coordinate rates of every rotation/sphere variable.
struct StageRates {
  Vec3 dx, dv, dOm;
  std::vector<Vec3> dom, dOmq;
  Vec3 yL;
  std::vector<Vec3> yq, yR;
};

StageRates eval_stage(const SystemState& base, const SystemParams& p, const Disturbance& d,
                      const ControlCallback& control,
                      const StageRates* prev, double coeff, double t_stage) {
  const int n = p.n;
  SystemState s = base;
  s.t = t_stage;
  Vec3 yL = Vec3::Zero();
  std::vector<Vec3> yq(n, Vec3::Zero()), yR(n, Vec3::Zero());
  if (prev != nullptr) {
    s.x = base.x + coeff * prev->dx;
    s.v = base.v + coeff * prev->dv;
    s.Omega = base.Omega + coeff * prev->dOm;
    yL = coeff * prev->yL;
    s.R = Rotation(base.R.m * exp_rotation(yL).m);
    for (int j = 0; j < n; ++j) {
      s.cables[j].omega = base.cables[j].omega + coeff * prev->dom[j];
      yq[j] = coeff * prev->yq[j];
      s.cables[j].q.v = exp_rotation(yq[j]).m * base.cables[j].q.v;
      s.quads[j].Omega = base.quads[j].Omega + coeff * prev->dOmq[j];
      yR[j] = coeff * prev->yR[j];
      s.quads[j].R = Rotation(base.quads[j].R.m * exp_rotation(yR[j]).m);
    }
  }

  const ControlInput input = control(s, t_stage);
  const StateDerivative der = std::visit(
      [&](const auto& ctrl) -> StateDerivative {
        using T = std::decay_t<decltype(ctrl)>;
        if constexpr (std::is_same_v<T, FullControl>) {
          return full_derivatives(s, ctrl, p, d);
        } else {
          return closed_loop_derivatives(s, ctrl, p, d);
        }
      },
      input);

  StageRates r;
  r.dx = s.v;
  r.dv = der.dv;
  r.dOm = der.dOmega;
  r.dom = der.domega;
  r.dOmq = der.dOmega_quad;
  r.yL = dexpinv_body(yL, s.Omega);
  r.yq.resize(n);
  r.yR.resize(n);
  for (int j = 0; j < n; ++j) {
    r.yq[j] = dexpinv_spatial(yq[j], s.cables[j].omega);
    r.yR[j] = dexpinv_body(yR[j], s.quads[j].Omega);
  }
  return r;
}

}  // namespace

SystemState step(const SystemState& s, const ControlCallback& control,
                 const SystemParams& p, const Disturbance& d, double dt) {
  if (!(dt > 0.0) || dt > 0.05) {
    throw ValidationError("step: dt must lie in (0, 0.05] s");
  }
  const int n = p.n;

  const StageRates k1 = eval_stage(s, p, d, control, nullptr, 0.0, s.t);
  const StageRates k2 = eval_stage(s, p, d, control, &k1, 0.5 * dt, s.t + 0.5 * dt);
  const StageRates k3 = eval_stage(s, p, d, control, &k2, 0.5 * dt, s.t + 0.5 * dt);
  const StageRates k4 = eval_stage(s, p, d, control, &k3, dt, s.t + dt);

  auto combine = [dt](const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& e) {
    return (dt / 6.0) * (a + 2.0 * b + 2.0 * c + e);
  };

  SystemState out = s;
  out.t = s.t + dt;
  out.x = s.x + combine(k1.dx, k2.dx, k3.dx, k4.dx);
  out.v = s.v + combine(k1.dv, k2.dv, k3.dv, k4.dv);
  out.Omega = s.Omega + combine(k1.dOm, k2.dOm, k3.dOm, k4.dOm);
  out.R = Rotation::project(s.R.m * exp_rotation(combine(k1.yL, k2.yL, k3.yL, k4.yL)).m);
  for (int j = 0; j < n; ++j) {
    out.cables[j].omega = s.cables[j].omega + combine(k1.dom[j], k2.dom[j], k3.dom[j], k4.dom[j]);
    out.cables[j].q = UnitVector::normalize(
        exp_rotation(combine(k1.yq[j], k2.yq[j], k3.yq[j], k4.yq[j])).m * s.cables[j].q.v);
    out.quads[j].Omega =
        s.quads[j].Omega + combine(k1.dOmq[j], k2.dOmq[j], k3.dOmq[j], k4.dOmq[j]);
    out.quads[j].R = Rotation::project(
        s.quads[j].R.m * exp_rotation(combine(k1.yR[j], k2.yR[j], k3.yR[j], k4.yR[j])).m);
  }
  return out;
}

Measurement measure(const SystemState& s, const Disturbance& d, double t,
                    const Vec3& vdot_true) {
  Measurement m;
  m.t = t;
  m.x = s.x + d.noise.pos * sinusoid(t, kPosFreq, kPosPhase);
  m.v = s.v + d.noise.vel * sinusoid(t, kVelFreq, kVelPhase);
  m.vdot = vdot_true + d.noise.acc * sinusoid(t, kAccFreq, kAccPhase);
  m.R = Rotation(s.R.m * exp_rotation(d.noise.att * sinusoid(t, kAttFreq, kAttPhase)).m);
  m.Omega = s.Omega + d.noise.att * sinusoid(t, kRateFreq, kRatePhase);
  return m;
}

}  // namespace aqualift
