#pragma once

#include <aqualift/mass_estimator.hpp>
#include <aqualift/mass_model.hpp>
#include <aqualift/types.hpp>

#include <string>
#include <vector>

namespace aqualift {

/// Kinematic time sample of a load trajectory, with enough derivatives for
/// every checker in this module. Angular terms may be zero when unused.
struct TrajSample {
  double t = 0.0;
  Vec3 x = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 a = Vec3::Zero();
  Vec3 jerk = Vec3::Zero();
  Vec3 Omega = Vec3::Zero();
  Vec3 Omega_dot = Vec3::Zero();

  Vec3 w(double g = kGravity) const { return a + g * Vec3::UnitZ(); }
};

/// Time sample of the error-dynamics matrix S for the windowed checks.
struct ExcitationSample {
  double t = 0.0;
  Mat2 S = Mat2::Zero();
  int dim = 2;

  double lambda_min() const;
};

/// Uniform bounds on the model gradients over the admissible parameter set:
/// a_lo <= ||grad m||_K <= a_hi, b_lo <= ||grad M||_K <= b_hi,
/// |<grad m, grad M>_K| <= c_hi.
struct ExcitationBounds {
  double a_lo = 0.0, a_hi = 0.0;
  double b_lo = 0.0, b_hi = 0.0;
  double c_hi = 0.0;

  void validate() const;

  /// Bounds measured by sampling the model gradients over a user-declared
  /// parameter box and time range (the bounds are assumptions in the theory;
  /// here they are computed).
  static ExcitationBounds from_model(const MassModel& model, const VecX& theta_lo,
                                     const VecX& theta_hi, const VecX& gamma, double t_end,
                                     int theta_samples = 12, int time_samples = 60);
};

/// Everything the sliding-window analysis knows about one window.
struct WindowReport {
  double t_start = 0.0;
  double T = 0.0;
  double int_lmin = 0.0;
  double int_lmin_pos = 0.0;
  double S11_int = 0.0;
  double S22_int = 0.0;
  double det_int = 0.0;       // integral of S11 S22 - S12^2
  double H_drift = 0.0;       // |H(t+T) - H(t)|
  double diag_w_margin = 0.0; // int (a_lo^2 ||w||^2 - c_hi |w.v|)
  double diag_v_margin = 0.0; // int (b_lo^2 ||v||^2 - c_hi |w.v|)
  double pe_integral = 0.0;   // int ||w||^2 (constant-mass excitation)
  double eps_max = 0.0;       // hydrostatic forcing ratio, max over window
  double jerk_max = 0.0;      // m/s^3, max over window
  bool pe_ok = false;         // int_lmin >= mu
  bool spike_ok = false;      // int_lmin_pos <= M_cap
  bool elem11_ok = false, elem22_ok = false, elemdet_ok = false;
  bool diag_w_ok = false, diag_v_ok = false;
  bool drift_ok = false;
  bool constant_pe_ok = false;
  bool hydro_ok = false;
};

/// Windowed excitation check on one window of S samples (>= 100 points):
/// trapezoidal integrals of lambda_min and its positive part with the two
/// verdicts int >= mu and int_pos <= M_cap.
WindowReport pe_window_check(const std::vector<ExcitationSample>& window, double mu,
                             double M_cap);

struct ElementwiseVerdict {
  double S11_int = 0.0, S22_int = 0.0, det_int = 0.0;
  bool s11_ok = false, s22_ok = false, det_ok = false;
};

/// Necessary conditions from concavity of lambda_min: strict positivity of
/// the windowed integrals of S11, S22 and S11 S22 - S12^2.
ElementwiseVerdict necessary_elementwise_check(const std::vector<ExcitationSample>& window);

struct SlidingVerdict {
  bool all_ok = false;
  double worst_margin = 0.0;   // most negative (or smallest) windowed value
  double worst_t_start = 0.0;
  std::vector<WindowReport> windows;
};

/// Windowed diagonal-positivity sufficient condition over every window start
/// on the sampling grid (stride T/10):
///   int (a_lo^2 ||w||^2 - c_hi |w.v|) > 0  and  int (b_lo^2 ||v||^2 - c_hi |w.v|) > 0.
SlidingVerdict diag_sufficient_check(const std::vector<TrajSample>& traj,
                                     const ExcitationBounds& bounds, double T,
                                     double g = kGravity);

/// Energy-drift sufficient condition with H = ||v||^2/2 + g e3.x:
///   |H(t+T) - H(t)| < (1/c_hi) min{ a_lo^2 int ||w||^2, b_lo^2 int ||v||^2 }.
SlidingVerdict energy_drift_check(const std::vector<TrajSample>& traj,
                                  const ExcitationBounds& bounds, double T,
                                  double g = kGravity);

/// Constant-mass excitation condition: int ||a + g e3||^2 >= mu on every
/// window of length T starting on the grid.
SlidingVerdict constant_mass_pe(const std::vector<TrajSample>& traj, double mu, double T,
                                double g = kGravity);

struct HydroThresholds {
  double eps_max = 0.1;    // gravity-domination ratio
  double jerk_max = 2.0;   // m/s^3
};

struct HydroReport {
  double eps_peak = 0.0;
  double jerk_peak = 0.0;
  bool ok = false;
  std::vector<std::pair<double, double>> flagged;  // [t_begin, t_end] intervals
};

/// Flags any part of the trajectory where the hydrostatic flat-surface model
/// is suspect: eps(t) = (||a|| + ||Omega_dot|| R_T + ||Omega||^2 R_T)/g above
/// eps_max, or translational jerk above jerk_max.
HydroReport hydrostatic_validity(const std::vector<TrajSample>& traj, double tank_radius,
                                 const HydroThresholds& thresholds = {},
                                 double g = kGravity);

/// Full sliding-window report combining every check; rows at stride T/10.
/// S samples are optional (empty: the S-based columns stay zero/false).
std::vector<WindowReport> sliding_window_report(const std::vector<TrajSample>& traj,
                                                const std::vector<ExcitationSample>& S_series,
                                                const ExcitationBounds* bounds, double T,
                                                double mu, double M_cap, double tank_radius,
                                                const HydroThresholds& hydro = {},
                                                double g = kGravity);

/// Window-report CSV (one row per window start).
void write_window_report_csv(const std::string& path, const std::vector<WindowReport>& rows);

}  // namespace aqualift
