#pragma once

#include <aqualift/excitation.hpp>
#include <aqualift/mass_model.hpp>
#include <aqualift/types.hpp>

#include <optional>
#include <string>
#include <vector>

namespace aqualift {

struct Waypoints {
  std::vector<double> t;   // strictly increasing knot times, >= 2
  std::vector<Vec3> x;     // knot positions
  std::optional<Vec3> v_start;  // clamped end velocities; zero when absent
  std::optional<Vec3> v_end;

  void validate() const;  // throws DegenerateKnots / ValidationError
};

struct DitherSpec {
  Vec3 amplitudes = Vec3::Zero();          // m, per axis
  std::vector<double> freqs;               // rad/s
  Vec3 phases = Vec3(0.0, 2.0 * M_PI / 3.0, 4.0 * M_PI / 3.0);

  bool active() const { return amplitudes.norm() > 0.0 && !freqs.empty(); }
};

struct DitherCaps;
struct DitherResult;

/// Piecewise-polynomial / hyperbolic load reference with analytic derivatives
/// up to jerk, plus an optional sinusoidal dither superimposed on every
/// evaluation. Plans are immutable after construction; evaluation outside the
/// knot range clamps to the boundary value with zero base derivatives.
class TrajectoryPlan {
 public:
  enum class Basis { Cubic, Tension, Quintic };

  struct Segment {
    double t0 = 0.0;
    double h = 0.0;
    Basis basis = Basis::Cubic;
    Eigen::Matrix<double, 3, 6> poly = Eigen::Matrix<double, 3, 6>::Zero();  // power basis
    Eigen::Matrix<double, 3, 4> hyp = Eigen::Matrix<double, 3, 4>::Zero();   // a,b,c,d per axis
    double beta = 0.0;  // sqrt(tension)
  };

  TrajSample eval(double t) const;
  std::vector<TrajSample> sample(double dt) const;

  double t_begin() const { return t_begin_; }
  double t_end() const { return t_end_; }
  const std::vector<Segment>& segments() const { return segments_; }
  const DitherSpec& dither() const { return dither_; }

  /// Worst pointwise residual of x'''' - tau x'' measured by central
  /// differencing of the analytic third derivative at interior points.
  double tension_ode_residual(double tau, int points_per_segment = 100) const;

 private:
  friend TrajectoryPlan cubic_spline(const Waypoints&);
  friend TrajectoryPlan tension_spline(const Waypoints&, double);
  friend TrajectoryPlan min_jerk_quintic(const Waypoints&);
  friend DitherResult add_dither(const TrajectoryPlan&, const Vec3&,
                                 const std::vector<double>&, const DitherCaps&);

  std::vector<Segment> segments_;
  DitherSpec dither_;
  double t_begin_ = 0.0;
  double t_end_ = 0.0;
};

/// Clamped cubic spline (C2 at interior knots). Boundary velocities default
/// to zero when the waypoints do not specify them.
TrajectoryPlan cubic_spline(const Waypoints& wp);

/// Spline in tension: per segment the interpolant satisfies
/// x'''' - tau x'' = 0, fitted to the same knot positions and velocities as
/// the cubic spline, so tau -> 0 recovers cubic_spline. Large tau uses a
/// rescaled exponential basis (cosh overflows near argument 710).
TrajectoryPlan tension_spline(const Waypoints& wp, double tau);

struct TensionFromMassRate {
  double tau = 0.0;          // (mean alpha)^2
  double alpha_mean = 0.0;   // mean of mdot/m over the window
  double sup_alpha_dot_T = 0.0;  // first-order approximation error scale
};

/// tau = (mean of mdot/m)^2 over [t0, t1] plus the reported error scale
/// sup|alphadot| * (t1 - t0).
TensionFromMassRate tension_from_mass_rate(const MassModel& model, const VecX& theta,
                                           double t0, double t1, int samples = 200);

/// Unique rest-to-rest quintic minimizing the integrated squared jerk
/// (normalized profile 10 s^3 - 15 s^4 + 6 s^5). Exactly two waypoints with
/// zero boundary velocities.
TrajectoryPlan min_jerk_quintic(const Waypoints& wp);

struct DitherCaps {
  double accel = 5.0;      // m/s^2, per-axis implied dither acceleration
  double bandwidth = 50.0; // rad/s, highest allowed dither frequency
};

struct DitherResult {
  TrajectoryPlan plan;
  double pe_before = 0.0;  // int ||a + g e3||^2 over the plan, without dither
  double pe_after = 0.0;   // same with dither
};

/// Superimposes per-axis sinusoids (default phase offsets 0, 2pi/3, 4pi/3)
/// on the plan and reports the constant-mass excitation integral before and
/// after. Throws CapExceeded when the implied acceleration or the highest
/// frequency exceeds the caps.
DitherResult add_dither(const TrajectoryPlan& plan, const Vec3& amplitudes,
                        const std::vector<double>& freqs, const DitherCaps& caps = {});

/// CSV export: t, position, velocity, acceleration, jerk per axis.
void export_plan_csv(const TrajectoryPlan& plan, const std::string& path, double dt = 1e-3);

}  // namespace aqualift
