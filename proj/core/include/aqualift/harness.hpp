#pragma once

#include <aqualift/excitation.hpp>
#include <aqualift/scenario.hpp>

#include <string>
#include <vector>

namespace aqualift {

/// One trace row per control step.
struct TraceRow {
  double t = 0.0;
  Vec3 x = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Eigen::Vector4d quat = Eigen::Vector4d(1, 0, 0, 0);  // w, x, y, z of R_L
  Vec3 Omega = Vec3::Zero();
  std::vector<Vec3> q;       // cable directions
  std::vector<Vec3> omega;   // cable rates
  double m_true = 0.0;
  double m_hat = 0.0;
  Eigen::Matrix<double, 6, 1> J_true = Eigen::Matrix<double, 6, 1>::Zero();  // xx,yy,zz,xy,xz,yz
  Eigen::Matrix<double, 6, 1> J_hat = Eigen::Matrix<double, 6, 1>::Zero();
  std::vector<double> u_norm;
  double pe_integrand = 0.0;  // ||vdot_meas + g e3||^2
};

struct RunMetrics {
  std::vector<double> t;
  std::vector<double> pos_error;       // ||x_L - x_d||
  std::vector<double> mass_error;      // |m_hat - m_true|
  std::vector<double> inertia_error;   // ||J_hat - J_true||_F
  std::vector<TraceRow> trace;
  std::vector<TrajSample> traj;            // measured kinematics for the checkers
  std::vector<ExcitationSample> S_series;  // model-based error-dynamics S

  double terminal_pos_error = 0.0;
  double terminal_mass_error = 0.0;
  double terminal_inertia_error = 0.0;
  double worst_pe_integral = 0.0;       // min over windows of int ||w||^2
  bool pe_ok = false;
  bool hydro_ok = false;
  double eps_peak = 0.0;
  double jerk_peak = 0.0;
};

struct RunOptions {
  bool keep_trace = true;
  double pe_window = 2.0;   // s
  double pe_mu = 5.0;       // threshold for the constant-mass PE verdict
  double tank_radius = 0.5; // m, for the hydrostatic diagnostic
};

/// Runs one scenario end to end: per step, trajectory evaluation,
/// measurement, estimator update, inertia source, controller, plant step.
/// Deterministic given the scenario seed.
RunMetrics run(const Scenario& scenario, const RunOptions& options = {});

/// Writes trace.csv, window_report.csv, summary.json and (optionally) SVG
/// plots into the scenario's output directory; returns the summary JSON text.
std::string summarize(const Scenario& scenario, const RunMetrics& metrics);

}  // namespace aqualift
