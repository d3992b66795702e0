#include <aqualift/trajectory.hpp>

#include <aqualift/errors.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace aqualift {

namespace {

// Knot velocities of the clamped C2 cubic spline (Hermite form), one axis at
// a time via the Thomas algorithm.
std::vector<Vec3> spline_knot_velocities(const Waypoints& wp) {
  const int n = static_cast<int>(wp.t.size());
  std::vector<Vec3> v(n, Vec3::Zero());
  v.front() = wp.v_start.value_or(Vec3::Zero());
  v.back() = wp.v_end.value_or(Vec3::Zero());
  if (n == 2) return v;

  const int m = n - 2;  // interior unknowns
  for (int axis = 0; axis < 3; ++axis) {
    std::vector<double> a(m, 0.0), b(m, 0.0), c(m, 0.0), d(m, 0.0);
    for (int i = 1; i <= m; ++i) {
      const double hl = wp.t[i] - wp.t[i - 1];
      const double hr = wp.t[i + 1] - wp.t[i];
      const double dl = (wp.x[i](axis) - wp.x[i - 1](axis)) / (hl * hl);
      const double dr = (wp.x[i + 1](axis) - wp.x[i](axis)) / (hr * hr);
      a[i - 1] = 1.0 / hl;
      b[i - 1] = 2.0 * (1.0 / hl + 1.0 / hr);
      c[i - 1] = 1.0 / hr;
      d[i - 1] = 3.0 * (dl + dr);
    }
    d[0] -= a[0] * v.front()(axis);
    d[m - 1] -= c[m - 1] * v.back()(axis);

    for (int i = 1; i < m; ++i) {
      const double w = a[i] / b[i - 1];
      b[i] -= w * c[i - 1];
      d[i] -= w * d[i - 1];
    }
    std::vector<double> sol(m);
    sol[m - 1] = d[m - 1] / b[m - 1];
    for (int i = m - 2; i >= 0; --i) sol[i] = (d[i] - c[i] * sol[i + 1]) / b[i];
    for (int i = 0; i < m; ++i) v[i + 1](axis) = sol[i];
  }
  return v;
}

TrajectoryPlan::Segment hermite_segment(double t0, double h, const Vec3& p0, const Vec3& v0,
                                        const Vec3& p1, const Vec3& v1) {
  TrajectoryPlan::Segment seg;
  seg.t0 = t0;
  seg.h = h;
  seg.basis = TrajectoryPlan::Basis::Cubic;
  for (int axis = 0; axis < 3; ++axis) {
    const double dp = p1(axis) - p0(axis);
    seg.poly(axis, 0) = p0(axis);
    seg.poly(axis, 1) = v0(axis);
    seg.poly(axis, 2) = 3.0 * dp / (h * h) - (2.0 * v0(axis) + v1(axis)) / h;
    seg.poly(axis, 3) = -2.0 * dp / (h * h * h) + (v0(axis) + v1(axis)) / (h * h);
  }
  return seg;
}

// Rescaled hyperbolic basis, bounded on [0, h] for any beta:
//   C(s) = cosh(beta s)/cosh(beta h),  S(s) = sinh(beta s)/cosh(beta h).
void tension_basis(double beta, double h, double s, double& C, double& S) {
  const double e1 = std::exp(-beta * (h - s));
  const double e2 = std::exp(-beta * (h + s));
  const double den = 1.0 + std::exp(-2.0 * beta * h);
  C = (e1 + e2) / den;
  S = (e1 - e2) / den;
}

TrajectoryPlan::Segment tension_segment(double t0, double h, double beta, const Vec3& p0,
                                        const Vec3& v0, const Vec3& p1, const Vec3& v1) {
  TrajectoryPlan::Segment seg;
  seg.t0 = t0;
  seg.h = h;
  seg.basis = TrajectoryPlan::Basis::Tension;
  seg.beta = beta;

  double C0, S0, Ch, Sh;
  tension_basis(beta, h, 0.0, C0, S0);
  tension_basis(beta, h, h, Ch, Sh);

  Eigen::Matrix4d M;
  // x(s) = a + b s + c C(s) + d S(s); x'(s) = b + beta (c S(s) + d C(s)).
  M << 1.0, 0.0, C0, S0,
       0.0, 1.0, beta * S0, beta * C0,
       1.0, h, Ch, Sh,
       0.0, 1.0, beta * Sh, beta * Ch;
  const Eigen::PartialPivLU<Eigen::Matrix4d> lu(M);

  for (int axis = 0; axis < 3; ++axis) {
    Eigen::Vector4d rhs(p0(axis), v0(axis), p1(axis), v1(axis));
    seg.hyp.row(axis) = lu.solve(rhs).transpose();
  }
  return seg;
}

void eval_segment(const TrajectoryPlan::Segment& seg, double s, Vec3& x, Vec3& v, Vec3& a,
                  Vec3& jerk) {
  if (seg.basis == TrajectoryPlan::Basis::Tension) {
    double C, S;
    tension_basis(seg.beta, seg.h, s, C, S);
    const double b = seg.beta;
    for (int axis = 0; axis < 3; ++axis) {
      const auto& c = seg.hyp.row(axis);
      x(axis) = c(0) + c(1) * s + c(2) * C + c(3) * S;
      v(axis) = c(1) + b * (c(2) * S + c(3) * C);
      a(axis) = b * b * (c(2) * C + c(3) * S);
      jerk(axis) = b * b * b * (c(2) * S + c(3) * C);
    }
    return;
  }
  for (int axis = 0; axis < 3; ++axis) {
    const auto& c = seg.poly.row(axis);
    x(axis) = ((((c(5) * s + c(4)) * s + c(3)) * s + c(2)) * s + c(1)) * s + c(0);
    v(axis) = (((5.0 * c(5) * s + 4.0 * c(4)) * s + 3.0 * c(3)) * s + 2.0 * c(2)) * s + c(1);
    a(axis) = ((20.0 * c(5) * s + 12.0 * c(4)) * s + 6.0 * c(3)) * s + 2.0 * c(2);
    jerk(axis) = (60.0 * c(5) * s + 24.0 * c(4)) * s + 6.0 * c(3);
  }
}

}  // namespace

void Waypoints::validate() const {
  if (t.size() < 2) throw DegenerateKnots("Waypoints: need at least 2 knots");
  if (t.size() != x.size()) throw ValidationError("Waypoints: t and x sizes differ");
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    if (!(t[i + 1] - t[i] > 1e-6)) {
      throw DegenerateKnots("Waypoints: knot spacing below 1e-6 s at index " +
                            std::to_string(i));
    }
  }
}

TrajSample TrajectoryPlan::eval(double t) const {
  TrajSample out;
  out.t = t;

  const double tc = std::clamp(t, t_begin_, t_end_);
  // Last segment whose start time is <= tc.
  std::size_t idx = 0;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    if (segments_[i].t0 <= tc + 1e-15) idx = i;
  }
  const auto& seg = segments_[idx];
  const double s = std::clamp(tc - seg.t0, 0.0, seg.h);
  eval_segment(seg, s, out.x, out.v, out.a, out.jerk);
  if (t < t_begin_ || t > t_end_) {  // hold the boundary point at rest
    out.v.setZero();
    out.a.setZero();
    out.jerk.setZero();
  }

  if (dither_.active()) {
    for (int axis = 0; axis < 3; ++axis) {
      const double amp = dither_.amplitudes(axis);
      const double ph = dither_.phases(axis);
      for (double w : dither_.freqs) {
        const double arg = w * t + ph;
        out.x(axis) += amp * std::sin(arg);
        out.v(axis) += amp * w * std::cos(arg);
        out.a(axis) -= amp * w * w * std::sin(arg);
        out.jerk(axis) -= amp * w * w * w * std::cos(arg);
      }
    }
  }
  return out;
}

std::vector<TrajSample> TrajectoryPlan::sample(double dt) const {
  std::vector<TrajSample> out;
  const int n = static_cast<int>(std::round((t_end_ - t_begin_) / dt));
  out.reserve(n + 1);
  for (int i = 0; i <= n; ++i) out.push_back(eval(t_begin_ + i * dt));
  return out;
}

double TrajectoryPlan::tension_ode_residual(double tau, int points_per_segment) const {
  double worst = 0.0;
  for (const auto& seg : segments_) {
    const double fd = 1e-5 * seg.h;
    for (int i = 1; i <= points_per_segment; ++i) {
      const double t = seg.t0 + seg.h * i / (points_per_segment + 1);
      const auto lo = eval(t - fd);
      const auto hi = eval(t + fd);
      const auto mid = eval(t);
      const Vec3 fourth = (hi.jerk - lo.jerk) / (2.0 * fd);
      worst = std::max(worst, (fourth - tau * mid.a).norm());
    }
  }
  return worst;
}

TrajectoryPlan cubic_spline(const Waypoints& wp) {
  wp.validate();
  const auto v = spline_knot_velocities(wp);
  TrajectoryPlan plan;
  plan.t_begin_ = wp.t.front();
  plan.t_end_ = wp.t.back();
  for (std::size_t i = 0; i + 1 < wp.t.size(); ++i) {
    plan.segments_.push_back(hermite_segment(wp.t[i], wp.t[i + 1] - wp.t[i], wp.x[i], v[i],
                                             wp.x[i + 1], v[i + 1]));
  }
  return plan;
}

TrajectoryPlan tension_spline(const Waypoints& wp, double tau) {
  if (tau < 0.0) throw ValidationError("tension_spline: tau must be >= 0");
  wp.validate();
  const auto v = spline_knot_velocities(wp);
  const double beta = std::sqrt(tau);

  TrajectoryPlan plan;
  plan.t_begin_ = wp.t.front();
  plan.t_end_ = wp.t.back();
  for (std::size_t i = 0; i + 1 < wp.t.size(); ++i) {
    const double h = wp.t[i + 1] - wp.t[i];
    // The hyperbolic basis degenerates towards {1, s} as beta h -> 0; below
    // the threshold the tension solution is the cubic to far better than
    // the 1e-6 contract, so switch bases.
    if (beta * h < 1e-3) {
      plan.segments_.push_back(
          hermite_segment(wp.t[i], h, wp.x[i], v[i], wp.x[i + 1], v[i + 1]));
    } else {
      plan.segments_.push_back(
          tension_segment(wp.t[i], h, beta, wp.x[i], v[i], wp.x[i + 1], v[i + 1]));
    }
  }
  return plan;
}

TensionFromMassRate tension_from_mass_rate(const MassModel& model, const VecX& theta,
                                           double t0, double t1, int samples) {
  if (!(t1 > t0)) throw ValidationError("tension_from_mass_rate: empty window");
  TensionFromMassRate out;
  double alpha_sum = 0.0;
  double sup_alpha_dot = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double t = t0 + (t1 - t0) * i / (samples - 1);
    const double m = model.mass(theta, t);
    if (!(m > 0.0)) throw ValidationError("tension_from_mass_rate: mass not positive on window");
    const double M = model.mass_rate(theta, t);
    const double alpha = M / m;
    alpha_sum += alpha;
    // alphadot = mddot/m - alpha^2
    sup_alpha_dot = std::max(sup_alpha_dot,
                             std::abs(model.mass_accel(theta, t) / m - alpha * alpha));
  }
  out.alpha_mean = alpha_sum / samples;
  out.tau = out.alpha_mean * out.alpha_mean;
  out.sup_alpha_dot_T = sup_alpha_dot * (t1 - t0);
  return out;
}

TrajectoryPlan min_jerk_quintic(const Waypoints& wp) {
  wp.validate();
  if (wp.t.size() != 2) throw ValidationError("min_jerk_quintic: exactly two waypoints");
  if ((wp.v_start && wp.v_start->norm() > 0.0) || (wp.v_end && wp.v_end->norm() > 0.0)) {
    throw ValidationError("min_jerk_quintic: boundary velocities must be zero (rest-to-rest)");
  }
  const double h = wp.t[1] - wp.t[0];
  const Vec3 dp = wp.x[1] - wp.x[0];

  TrajectoryPlan plan;
  plan.t_begin_ = wp.t[0];
  plan.t_end_ = wp.t[1];
  TrajectoryPlan::Segment seg;
  seg.t0 = wp.t[0];
  seg.h = h;
  seg.basis = TrajectoryPlan::Basis::Quintic;
  for (int axis = 0; axis < 3; ++axis) {
    seg.poly(axis, 0) = wp.x[0](axis);
    seg.poly(axis, 3) = 10.0 * dp(axis) / (h * h * h);
    seg.poly(axis, 4) = -15.0 * dp(axis) / (h * h * h * h);
    seg.poly(axis, 5) = 6.0 * dp(axis) / (h * h * h * h * h);
  }
  plan.segments_.push_back(seg);
  return plan;
}

DitherResult add_dither(const TrajectoryPlan& plan, const Vec3& amplitudes,
                        const std::vector<double>& freqs, const DitherCaps& caps) {
  for (double w : freqs) {
    if (w > caps.bandwidth) {
      throw CapExceeded("add_dither: frequency " + std::to_string(w) +
                        " rad/s exceeds the bandwidth cap");
    }
  }
  double w2_sum = 0.0;
  for (double w : freqs) w2_sum += w * w;
  for (int axis = 0; axis < 3; ++axis) {
    const double implied = std::abs(amplitudes(axis)) * w2_sum;
    if (implied > caps.accel) {
      throw CapExceeded("add_dither: implied acceleration " + std::to_string(implied) +
                        " m/s^2 exceeds the cap");
    }
  }

  DitherResult out;
  out.plan = plan;
  out.plan.dither_.amplitudes = amplitudes;
  out.plan.dither_.freqs = freqs;

  const double T = plan.t_end() - plan.t_begin();
  if (T > 0.0) {
    const double dt = std::min(1e-3, T / 1000.0);
    const auto base_samples = plan.sample(dt);
    const auto dithered_samples = out.plan.sample(dt);
    // Window over the realized sample span, which can fall short of the plan
    // duration by a rounding step.
    const double T_win = base_samples.back().t - base_samples.front().t;
    out.pe_before = constant_mass_pe(base_samples, 0.0, T_win).worst_margin;
    out.pe_after = constant_mass_pe(dithered_samples, 0.0, T_win).worst_margin;
  }
  return out;
}

void export_plan_csv(const TrajectoryPlan& plan, const std::string& path, double dt) {
  std::ofstream f(path);
  if (!f) throw ValidationError("export_plan_csv: cannot open " + path);
  f << "t,x,y,z,vx,vy,vz,ax,ay,az,jx,jy,jz\n";
  char buf[512];
  for (const auto& s : plan.sample(dt)) {
    std::snprintf(buf, sizeof(buf),
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                  "%.17g\n",
                  s.t, s.x.x(), s.x.y(), s.x.z(), s.v.x(), s.v.y(), s.v.z(), s.a.x(), s.a.y(),
                  s.a.z(), s.jerk.x(), s.jerk.y(), s.jerk.z());
    f << buf;
  }
}

}  // namespace aqualift
