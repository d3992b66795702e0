#include <aqualift/excitation.hpp>

#include <aqualift/errors.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>

namespace aqualift {

namespace {

// Trapezoid of linearly interpolated samples over [t0, t1]; t0 must be a
// sample point, the right end is interpolated so window lengths are exact.
template <typename F>
double window_trapezoid(const std::vector<double>& t, F value, std::size_t i0, double t1) {
  double acc = 0.0;
  std::size_t k = i0;
  while (k + 1 < t.size() && t[k + 1] <= t1 + 1e-12) {
    acc += 0.5 * (t[k + 1] - t[k]) * (value(k) + value(k + 1));
    ++k;
  }
  if (k + 1 < t.size() && t[k] < t1) {
    const double h = t[k + 1] - t[k];
    const double frac = (t1 - t[k]) / h;
    const double v_end = value(k) + frac * (value(k + 1) - value(k));
    acc += 0.5 * (t1 - t[k]) * (value(k) + v_end);
  }
  return acc;
}

struct WindowIndex {
  std::size_t start;
  double t_end;
};

std::vector<WindowIndex> window_starts(const std::vector<double>& t, double T) {
  std::vector<WindowIndex> out;
  if (t.size() < 2) return out;
  const double stride = T / 10.0;
  double next_start = t.front();
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] + 1e-12 < next_start) continue;
    const double t_end = t[i] + T;
    if (t_end > t.back() + 1e-9) break;
    out.push_back({i, t_end});
    next_start = t[i] + stride;
  }
  return out;
}

std::vector<double> times_of(const std::vector<TrajSample>& traj) {
  std::vector<double> t(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) t[i] = traj[i].t;
  return t;
}

}  // namespace

double ExcitationSample::lambda_min() const {
  if (dim == 1) return S(0, 0);
  const double mean = 0.5 * (S(0, 0) + S(1, 1));
  const double rad = std::hypot(0.5 * (S(0, 0) - S(1, 1)), S(0, 1));
  return mean - rad;
}

void ExcitationBounds::validate() const {
  if (!(0.0 < a_lo && a_lo <= a_hi) || !(0.0 < b_lo && b_lo <= b_hi) || !(c_hi > 0.0)) {
    throw ValidationError("ExcitationBounds: need 0 < a_lo <= a_hi, 0 < b_lo <= b_hi, c_hi > 0");
  }
}

ExcitationBounds ExcitationBounds::from_model(const MassModel& model, const VecX& theta_lo,
                                              const VecX& theta_hi, const VecX& gamma,
                                              double t_end, int theta_samples,
                                              int time_samples) {
  const int k = model.dim();
  ExcitationBounds b;
  b.a_lo = b.b_lo = std::numeric_limits<double>::infinity();
  b.a_hi = b.b_hi = b.c_hi = 0.0;

  // Dense grid over the admissible box x time range. With k <= 2 for the
  // built-in models this stays cheap.
  std::vector<VecX> thetas;
  if (k == 1) {
    for (int i = 0; i < theta_samples; ++i) {
      VecX th(1);
      th(0) = theta_lo(0) + (theta_hi(0) - theta_lo(0)) * i / std::max(1, theta_samples - 1);
      thetas.push_back(th);
    }
  } else if (k == 2) {
    for (int i = 0; i < theta_samples; ++i) {
      for (int j = 0; j < theta_samples; ++j) {
        VecX th(k);
        th(0) = theta_lo(0) + (theta_hi(0) - theta_lo(0)) * i / std::max(1, theta_samples - 1);
        th(1) = theta_lo(1) + (theta_hi(1) - theta_lo(1)) * j / std::max(1, theta_samples - 1);
        thetas.push_back(th);
      }
    }
  } else {
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int i = 0; i < theta_samples * theta_samples; ++i) {
      VecX th(k);
      for (int d = 0; d < k; ++d) th(d) = theta_lo(d) + (theta_hi(d) - theta_lo(d)) * uni(rng);
      thetas.push_back(th);
    }
  }

  for (const auto& th : thetas) {
    for (int s = 0; s < time_samples; ++s) {
      const double t = t_end * s / std::max(1, time_samples - 1);
      const VecX gm = model.grad_mass(th, t);
      const VecX gM = model.grad_rate(th, t);
      const double na = std::sqrt(gm.dot(gamma.asDiagonal() * gm));
      const double nb = std::sqrt(gM.dot(gamma.asDiagonal() * gM));
      const double c = std::abs(gm.dot(gamma.asDiagonal() * gM));
      b.a_lo = std::min(b.a_lo, na);
      b.a_hi = std::max(b.a_hi, na);
      b.b_lo = std::min(b.b_lo, nb);
      b.b_hi = std::max(b.b_hi, nb);
      b.c_hi = std::max(b.c_hi, c);
    }
  }
  return b;
}

WindowReport pe_window_check(const std::vector<ExcitationSample>& window, double mu,
                             double M_cap) {
  if (window.size() < 100) {
    throw ValidationError("pe_window_check: need >= 100 samples per window");
  }
  std::vector<double> t(window.size());
  for (std::size_t i = 0; i < window.size(); ++i) t[i] = window[i].t;

  WindowReport rep;
  rep.t_start = t.front();
  rep.T = t.back() - t.front();
  rep.int_lmin =
      window_trapezoid(t, [&](std::size_t k) { return window[k].lambda_min(); }, 0, t.back());
  rep.int_lmin_pos = window_trapezoid(
      t, [&](std::size_t k) { return std::max(window[k].lambda_min(), 0.0); }, 0, t.back());
  rep.pe_ok = rep.int_lmin >= mu;
  rep.spike_ok = rep.int_lmin_pos <= M_cap;
  return rep;
}

ElementwiseVerdict necessary_elementwise_check(const std::vector<ExcitationSample>& window) {
  if (window.size() < 2) {
    throw ValidationError("necessary_elementwise_check: need >= 2 samples");
  }
  std::vector<double> t(window.size());
  for (std::size_t i = 0; i < window.size(); ++i) t[i] = window[i].t;

  ElementwiseVerdict v;
  v.S11_int =
      window_trapezoid(t, [&](std::size_t k) { return window[k].S(0, 0); }, 0, t.back());
  v.S22_int =
      window_trapezoid(t, [&](std::size_t k) { return window[k].S(1, 1); }, 0, t.back());
  v.det_int = window_trapezoid(
      t,
      [&](std::size_t k) {
        return window[k].S(0, 0) * window[k].S(1, 1) - window[k].S(0, 1) * window[k].S(0, 1);
      },
      0, t.back());
  v.s11_ok = v.S11_int > 0.0;
  v.s22_ok = v.S22_int > 0.0;
  v.det_ok = v.det_int > 0.0;
  return v;
}

SlidingVerdict diag_sufficient_check(const std::vector<TrajSample>& traj,
                                     const ExcitationBounds& bounds, double T, double g) {
  bounds.validate();
  const auto t = times_of(traj);
  SlidingVerdict out;
  out.all_ok = true;
  out.worst_margin = std::numeric_limits<double>::infinity();
  for (const auto& win : window_starts(t, T)) {
    WindowReport rep;
    rep.t_start = t[win.start];
    rep.T = T;
    rep.diag_w_margin = window_trapezoid(
        t,
        [&](std::size_t k) {
          const Vec3 w = traj[k].w(g);
          return bounds.a_lo * bounds.a_lo * w.squaredNorm() -
                 bounds.c_hi * std::abs(w.dot(traj[k].v));
        },
        win.start, win.t_end);
    rep.diag_v_margin = window_trapezoid(
        t,
        [&](std::size_t k) {
          const Vec3 w = traj[k].w(g);
          return bounds.b_lo * bounds.b_lo * traj[k].v.squaredNorm() -
                 bounds.c_hi * std::abs(w.dot(traj[k].v));
        },
        win.start, win.t_end);
    rep.diag_w_ok = rep.diag_w_margin > 0.0;
    rep.diag_v_ok = rep.diag_v_margin > 0.0;
    const double margin = std::min(rep.diag_w_margin, rep.diag_v_margin);
    if (margin < out.worst_margin) {
      out.worst_margin = margin;
      out.worst_t_start = rep.t_start;
    }
    out.all_ok = out.all_ok && rep.diag_w_ok && rep.diag_v_ok;
    out.windows.push_back(rep);
  }
  if (out.windows.empty()) {
    out.all_ok = false;
    out.worst_margin = 0.0;
  }
  return out;
}

SlidingVerdict energy_drift_check(const std::vector<TrajSample>& traj,
                                  const ExcitationBounds& bounds, double T, double g) {
  bounds.validate();
  const auto t = times_of(traj);
  auto H = [&](const TrajSample& s) { return 0.5 * s.v.squaredNorm() + g * s.x.z(); };

  SlidingVerdict out;
  out.all_ok = true;
  out.worst_margin = std::numeric_limits<double>::infinity();
  for (const auto& win : window_starts(t, T)) {
    WindowReport rep;
    rep.t_start = t[win.start];
    rep.T = T;
    // H at the exact window end, linearly interpolated between samples.
    const auto it = std::upper_bound(t.begin(), t.end(), win.t_end - 1e-12);
    const std::size_t k1 = std::min<std::size_t>(it - t.begin(), t.size() - 1);
    const std::size_t k0 = k1 == 0 ? 0 : k1 - 1;
    double H_end = H(traj[k1]);
    if (k1 > k0 && t[k1] > t[k0]) {
      const double frac = (win.t_end - t[k0]) / (t[k1] - t[k0]);
      H_end = H(traj[k0]) + frac * (H(traj[k1]) - H(traj[k0]));
    }
    rep.H_drift = std::abs(H_end - H(traj[win.start]));

    const double int_w2 = window_trapezoid(
        t, [&](std::size_t k) { return traj[k].w(g).squaredNorm(); }, win.start, win.t_end);
    const double int_v2 = window_trapezoid(
        t, [&](std::size_t k) { return traj[k].v.squaredNorm(); }, win.start, win.t_end);
    const double budget =
        std::min(bounds.a_lo * bounds.a_lo * int_w2, bounds.b_lo * bounds.b_lo * int_v2) /
        bounds.c_hi;
    rep.drift_ok = rep.H_drift < budget;
    const double margin = budget - rep.H_drift;
    if (margin < out.worst_margin) {
      out.worst_margin = margin;
      out.worst_t_start = rep.t_start;
    }
    out.all_ok = out.all_ok && rep.drift_ok;
    out.windows.push_back(rep);
  }
  if (out.windows.empty()) {
    out.all_ok = false;
    out.worst_margin = 0.0;
  }
  return out;
}

SlidingVerdict constant_mass_pe(const std::vector<TrajSample>& traj, double mu, double T,
                                double g) {
  const auto t = times_of(traj);
  SlidingVerdict out;
  out.all_ok = true;
  out.worst_margin = std::numeric_limits<double>::infinity();
  for (const auto& win : window_starts(t, T)) {
    WindowReport rep;
    rep.t_start = t[win.start];
    rep.T = T;
    rep.pe_integral = window_trapezoid(
        t, [&](std::size_t k) { return traj[k].w(g).squaredNorm(); }, win.start, win.t_end);
    rep.constant_pe_ok = rep.pe_integral >= mu;
    if (rep.pe_integral < out.worst_margin) {
      out.worst_margin = rep.pe_integral;
      out.worst_t_start = rep.t_start;
    }
    out.all_ok = out.all_ok && rep.constant_pe_ok;
    out.windows.push_back(rep);
  }
  if (out.windows.empty()) {
    out.all_ok = false;
    out.worst_margin = 0.0;
  }
  return out;
}

HydroReport hydrostatic_validity(const std::vector<TrajSample>& traj, double tank_radius,
                                 const HydroThresholds& thresholds, double g) {
  HydroReport rep;
  bool in_flagged = false;
  double flag_begin = 0.0;
  for (const auto& s : traj) {
    const double eps =
        (s.a.norm() + s.Omega_dot.norm() * tank_radius + s.Omega.squaredNorm() * tank_radius) / g;
    const double jerk = s.jerk.norm();
    rep.eps_peak = std::max(rep.eps_peak, eps);
    rep.jerk_peak = std::max(rep.jerk_peak, jerk);
    const bool bad = eps > thresholds.eps_max || jerk > thresholds.jerk_max;
    if (bad && !in_flagged) {
      in_flagged = true;
      flag_begin = s.t;
    } else if (!bad && in_flagged) {
      in_flagged = false;
      rep.flagged.emplace_back(flag_begin, s.t);
    }
  }
  if (in_flagged) rep.flagged.emplace_back(flag_begin, traj.back().t);
  rep.ok = rep.flagged.empty();
  return rep;
}

std::vector<WindowReport> sliding_window_report(const std::vector<TrajSample>& traj,
                                                const std::vector<ExcitationSample>& S_series,
                                                const ExcitationBounds* bounds, double T,
                                                double mu, double M_cap, double tank_radius,
                                                const HydroThresholds& hydro, double g) {
  const auto t = times_of(traj);
  const bool with_S = S_series.size() == traj.size();

  std::vector<WindowReport> rows;
  for (const auto& win : window_starts(t, T)) {
    WindowReport rep;
    rep.t_start = t[win.start];
    rep.T = T;

    rep.pe_integral = window_trapezoid(
        t, [&](std::size_t k) { return traj[k].w(g).squaredNorm(); }, win.start, win.t_end);
    rep.constant_pe_ok = rep.pe_integral >= mu;

    if (with_S) {
      rep.int_lmin = window_trapezoid(
          t, [&](std::size_t k) { return S_series[k].lambda_min(); }, win.start, win.t_end);
      rep.int_lmin_pos = window_trapezoid(
          t, [&](std::size_t k) { return std::max(S_series[k].lambda_min(), 0.0); }, win.start,
          win.t_end);
      rep.S11_int = window_trapezoid(
          t, [&](std::size_t k) { return S_series[k].S(0, 0); }, win.start, win.t_end);
      rep.S22_int = window_trapezoid(
          t, [&](std::size_t k) { return S_series[k].S(1, 1); }, win.start, win.t_end);
      rep.det_int = window_trapezoid(
          t,
          [&](std::size_t k) {
            return S_series[k].S(0, 0) * S_series[k].S(1, 1) -
                   S_series[k].S(0, 1) * S_series[k].S(0, 1);
          },
          win.start, win.t_end);
      rep.pe_ok = rep.int_lmin >= mu;
      rep.spike_ok = rep.int_lmin_pos <= M_cap;
      rep.elem11_ok = rep.S11_int > 0.0;
      rep.elem22_ok = rep.S22_int > 0.0;
      rep.elemdet_ok = rep.det_int > 0.0;
    }

    if (bounds != nullptr) {
      rep.diag_w_margin = window_trapezoid(
          t,
          [&](std::size_t k) {
            const Vec3 w = traj[k].w(g);
            return bounds->a_lo * bounds->a_lo * w.squaredNorm() -
                   bounds->c_hi * std::abs(w.dot(traj[k].v));
          },
          win.start, win.t_end);
      rep.diag_v_margin = window_trapezoid(
          t,
          [&](std::size_t k) {
            const Vec3 w = traj[k].w(g);
            return bounds->b_lo * bounds->b_lo * traj[k].v.squaredNorm() -
                   bounds->c_hi * std::abs(w.dot(traj[k].v));
          },
          win.start, win.t_end);
      rep.diag_w_ok = rep.diag_w_margin > 0.0;
      rep.diag_v_ok = rep.diag_v_margin > 0.0;

      auto H = [&](const TrajSample& s) { return 0.5 * s.v.squaredNorm() + g * s.x.z(); };
      const auto it = std::upper_bound(t.begin(), t.end(), win.t_end - 1e-12);
      const std::size_t k1 = std::min<std::size_t>(it - t.begin(), t.size() - 1);
      rep.H_drift = std::abs(H(traj[k1]) - H(traj[win.start]));
      const double int_v2 = window_trapezoid(
          t, [&](std::size_t k) { return traj[k].v.squaredNorm(); }, win.start, win.t_end);
      const double budget = std::min(bounds->a_lo * bounds->a_lo * rep.pe_integral,
                                     bounds->b_lo * bounds->b_lo * int_v2) /
                            bounds->c_hi;
      rep.drift_ok = rep.H_drift < budget;
    }

    double eps_pk = 0.0, jerk_pk = 0.0;
    for (std::size_t k = win.start; k < traj.size() && traj[k].t <= win.t_end + 1e-12; ++k) {
      const auto& s = traj[k];
      eps_pk = std::max(eps_pk, (s.a.norm() + s.Omega_dot.norm() * tank_radius +
                                 s.Omega.squaredNorm() * tank_radius) /
                                    g);
      jerk_pk = std::max(jerk_pk, s.jerk.norm());
    }
    rep.eps_max = eps_pk;
    rep.jerk_max = jerk_pk;
    rep.hydro_ok = eps_pk <= hydro.eps_max && jerk_pk <= hydro.jerk_max;

    rows.push_back(rep);
  }
  return rows;
}

void write_window_report_csv(const std::string& path, const std::vector<WindowReport>& rows) {
  std::ofstream out(path);
  if (!out) throw ValidationError("write_window_report_csv: cannot open " + path);
  out << "t_start,int_lmin,int_lmin_pos,S11_int,S22_int,det_int,H_drift,eps_max,jerk_max,"
         "pe_ok,spike_ok,elem11_ok,elem22_ok,elemdet_ok,diag_w_ok,diag_v_ok,drift_ok,"
         "constant_pe_ok,hydro_ok\n";
  char buf[512];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf),
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                  "%d,%d,%d,%d,%d,%d,%d,%d,%d,%d\n",
                  r.t_start, r.int_lmin, r.int_lmin_pos, r.S11_int, r.S22_int, r.det_int,
                  r.H_drift, r.eps_max, r.jerk_max, r.pe_ok ? 1 : 0, r.spike_ok ? 1 : 0,
                  r.elem11_ok ? 1 : 0, r.elem22_ok ? 1 : 0, r.elemdet_ok ? 1 : 0,
                  r.diag_w_ok ? 1 : 0, r.diag_v_ok ? 1 : 0, r.drift_ok ? 1 : 0,
                  r.constant_pe_ok ? 1 : 0, r.hydro_ok ? 1 : 0);
    out << buf;
  }
}

}  // namespace aqualift
