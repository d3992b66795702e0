#include <aqualift/harness.hpp>

#include <aqualift/errors.hpp>
#include <aqualift/inertia_lut.hpp>
#include <aqualift/io.hpp>

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>

namespace aqualift {

namespace {

MassSchedule true_mass_schedule(const Scenario& s) {
  switch (s.mass_mode) {
    case MassMode::Constant: return MassSchedule::constant(s.m0);
    case MassMode::Viscous: return MassSchedule::viscous(s.m0, s.lambda);
    case MassMode::Orifice: return MassSchedule::orifice(s.m0, s.lambda);
  }
  return MassSchedule::constant(s.m0);
}

// Dense 1-D fill-level table of the hydrostatic inertia at upright attitude,
// the quasi-static truth model for tank scenarios. 201 sigma samples keep
// the interpolation error far below the hydrostatic-model error itself.
struct TankTruthTable {
  std::vector<Mat3> J;       // by sigma index
  double m_T = 0.0, rho = 0.0, V_T = 0.0;

  Mat3 at_sigma(double sigma) const {
    const double f = std::clamp(sigma, 0.0, 1.0) * (J.size() - 1);
    const int i0 = std::min<int>(static_cast<int>(f), static_cast<int>(J.size()) - 2);
    const double w = f - i0;
    return (1.0 - w) * J[i0] + w * J[i0 + 1];
  }
  Mat3 slope_at_sigma(double sigma) const {
    const double dsig = 1.0 / (J.size() - 1);
    const double f = std::clamp(sigma, 0.0, 1.0) * (J.size() - 1);
    const int i0 = std::min<int>(static_cast<int>(f), static_cast<int>(J.size()) - 2);
    return (J[i0 + 1] - J[i0]) / dsig;
  }
};

TankTruthTable build_tank_truth(const TankGeometry& tank, int resolution) {
  TankTruthTable tbl;
  tbl.m_T = tank.empty_mass();
  tbl.rho = tank.density();
  tbl.V_T = tank.volume();
  const VoxelizedTank vox(tank, resolution);
  const int n = 201;
  tbl.J.resize(n);
  const Vec3 g_dir = -Vec3::UnitZ();  // upright
  for (int i = 0; i < n; ++i) {
    const double sigma = static_cast<double>(i) / (n - 1);
    const FluidConfig cfg = solve_plane_offset(vox, sigma, g_dir);
    const double m_hat = tbl.m_T + sigma * tbl.rho * tbl.V_T;
    tbl.J[i] = load_inertia(vox, cfg, m_hat).J;
  }
  return tbl;
}

InertiaSchedule true_inertia_schedule(const Scenario& s, const MassSchedule& mass,
                                      std::shared_ptr<TankTruthTable> tank_truth) {
  switch (s.inertia_truth) {
    case InertiaTruth::Constant:
      return InertiaSchedule::constant(s.J0);
    case InertiaTruth::MassProportional:
      return InertiaSchedule::mass_proportional(s.J0, mass);
    case InertiaTruth::Tank: {
      auto m = mass.mass;
      auto mdot = mass.mass_rate;
      auto tbl = std::move(tank_truth);
      const double denom = tbl->rho * tbl->V_T;
      return InertiaSchedule{
          [tbl, m, denom](double t) {
            return tbl->at_sigma((m(t) - tbl->m_T) / denom);
          },
          [tbl, m, mdot, denom](double t) {
            const double sigma = (m(t) - tbl->m_T) / denom;
            return (tbl->slope_at_sigma(sigma) * (mdot(t) / denom)).eval();
          }};
    }
  }
  return InertiaSchedule::constant(s.J0);
}

SystemState perturbed_initial_state(const SystemParams& p, const InitialPerturbation& pert,
                                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto rand3 = [&]() { return Vec3(u(rng), u(rng), u(rng)); };

  SystemState s = SystemState::hover(p);
  s.x = pert.pos * rand3();
  s.v = pert.vel * rand3();
  s.R = exp_rotation(pert.att * rand3());
  for (int j = 0; j < p.n; ++j) {
    s.cables[j].q = UnitVector::normalize(exp_rotation(pert.cable * rand3()).m *
                                          (-Vec3::UnitZ()));
    s.quads[j].R = exp_rotation(pert.att * rand3());
  }
  return s;
}

Eigen::Matrix<double, 6, 1> mat_to_six(const Mat3& m) {
  Eigen::Matrix<double, 6, 1> v;
  v << m(0, 0), m(1, 1), m(2, 2), m(0, 1), m(0, 2), m(1, 2);
  return v;
}

}  // namespace

RunMetrics run(const Scenario& scenario, const RunOptions& options) {
  scenario.validate();

  const MassSchedule mass = true_mass_schedule(scenario);
  std::shared_ptr<TankTruthTable> tank_truth;
  if (scenario.inertia_truth == InertiaTruth::Tank) {
    tank_truth = std::make_shared<TankTruthTable>(
        build_tank_truth(*scenario.tank, scenario.lut_resolution));
  }

  SystemParams params = scenario.params;
  params.load_mass = mass;
  params.load_inertia = true_inertia_schedule(scenario, mass, tank_truth);
  params.validate();

  // Controller-side inertia source.
  std::unique_ptr<InertiaLut> lut;
  if (scenario.inertia_source == InertiaSource::Lut) {
    if (!scenario.lut_file.empty()) {
      lut = std::make_unique<InertiaLut>(load_lut(scenario.lut_file));
    } else if (scenario.tank.has_value()) {
      lut = std::make_unique<InertiaLut>(
          build_lut(*scenario.tank, 21, 13, 24, scenario.lut_resolution));
    } else {
      throw ValidationError("run: lut inertia source needs a lut_file or a tank");
    }
  }

  Disturbance dist;
  if (scenario.wind_scale != 0.0) {
    const double scale = scenario.wind_scale;
    dist.wind = [scale](double t) { return wind_force(t, scale); };
  }
  dist.noise = scenario.noise;

  const TrajectoryPlan plan = scenario.build_plan();
  const MassModel model = scenario.estimator_model();

  ParamEstimate est;
  est.theta = scenario.estimator.theta0;
  est.gamma = scenario.estimator.gamma;
  est.m_min = scenario.estimator.m_min;
  if (scenario.tank.has_value()) {
    // The LUT rejects masses below the empty tank; keep the estimate
    // admissible for queries as well as for the controller inversion.
    est.m_min = std::max(est.m_min, scenario.tank->empty_mass());
  }

  // True parameters for the error-dynamics diagnostics, defined only when
  // the estimator model matches the truth.
  const bool matched =
      (scenario.mass_mode == MassMode::Constant &&
       scenario.estimator.model == MassModelKind::Constant) ||
      (scenario.mass_mode == MassMode::Viscous &&
       scenario.estimator.model == MassModelKind::ViscousLeak) ||
      (scenario.mass_mode == MassMode::Orifice &&
       scenario.estimator.model == MassModelKind::OrificeLeak);
  VecX theta_true;
  if (matched) {
    theta_true = VecX::Zero(model.dim());
    theta_true(0) = scenario.m0;
    if (model.dim() > 1) theta_true(1) = scenario.lambda;
  }

  CooperativeController controller(params, scenario.gains);
  InertiaRateTracker lut_tracker;

  SystemState state = perturbed_initial_state(params, scenario.perturbation, scenario.seed);
  const int n_steps = static_cast<int>(std::round(scenario.horizon / scenario.dt));

  RunMetrics metrics;
  metrics.t.reserve(n_steps + 1);

  Vec3 vdot_lag = Vec3::Zero();
  for (int k = 0; k <= n_steps; ++k) {
    const double t = k * scenario.dt;
    state.t = t;

    const TrajSample ref_sample = plan.eval(t);
    LoadReference ref;
    ref.x = ref_sample.x;
    ref.v = ref_sample.v;
    ref.a = ref_sample.a;

    const Measurement meas = measure(state, dist, t, vdot_lag);

    const double m_hat = est.mass(model, t);
    const double mdot_hat = est.mass_rate(model, t);
    Mat3 J_hat, Jdot_hat;
    if (lut) {
      const auto r = lut_tracker.update(*lut, m_hat, meas.R, t);
      J_hat = r.J;
      Jdot_hat = r.Jdot;
    } else {
      J_hat = params.load_inertia.inertia(t);
      Jdot_hat = params.load_inertia.inertia_rate(t);
    }

    ControlStep ctrl;
    try {
      ctrl = controller.update(meas, state.cables, state.quads, ref, m_hat, mdot_hat, J_hat,
                               Jdot_hat);
    } catch (const Error& e) {
      throw NumericalError("run: controller failed at step " + std::to_string(k) + ": " +
                           e.what());
    }

    // Plant-side acceleration at t under the commanded input; feeds the
    // (lagged) accelerations the controller and estimator consume.
    StateDerivative deriv;
    try {
      switch (scenario.plant) {
        case PlantModel::ClosedLoop:
          deriv = closed_loop_derivatives(state, ctrl.wrench_control, params, dist);
          break;
        case PlantModel::FullVector:
          deriv = full_derivatives(state, ctrl.full_control, params, dist);
          break;
        case PlantModel::FullThrust: {
          FullControl fc = ctrl.full_control;
          for (int j = 0; j < params.n; ++j) {
            fc.u[j] = ctrl.f[j] * state.quads[j].R.m.col(2);
          }
          deriv = full_derivatives(state, fc, params, dist);
          break;
        }
      }
    } catch (const Error& e) {
      throw NumericalError("run: dynamics failed at step " + std::to_string(k) + ": " +
                           e.what());
    }

    const Measurement meas_now = measure(state, dist, t, deriv.dv);
    RegressorSample sample;
    sample.w = meas_now.vdot + params.g * Vec3::UnitZ();
    sample.v = meas_now.v;
    sample.thrust_sum = ctrl.mu_sum;
    sample.t = t;

    if (matched) {
      const ErrorDynamics ed = error_dynamics_matrices(model, est, theta_true, sample);
      metrics.S_series.push_back(ExcitationSample{t, ed.S, ed.dim});
    }

    est = regress_step(est, model, sample, scenario.dt);
    controller.set_angular_acceleration(deriv.dOmega);
    vdot_lag = deriv.dv;

    // Bookkeeping.
    const double m_true = mass.mass(t);
    const Mat3 J_true = params.load_inertia.inertia(t);
    metrics.t.push_back(t);
    metrics.pos_error.push_back((state.x - ref.x).norm());
    metrics.mass_error.push_back(std::abs(est.mass(model, t) - m_true));
    metrics.inertia_error.push_back((J_hat - J_true).norm());

    TrajSample traj;
    traj.t = t;
    traj.x = meas.x;
    traj.v = meas.v;
    traj.a = meas_now.vdot;
    traj.Omega = meas.Omega;
    traj.Omega_dot = deriv.dOmega;
    metrics.traj.push_back(traj);

    if (options.keep_trace) {
      TraceRow row;
      row.t = t;
      row.x = state.x;
      row.v = state.v;
      const Eigen::Quaterniond quat(state.R.m);
      row.quat << quat.w(), quat.x(), quat.y(), quat.z();
      row.Omega = state.Omega;
      row.q.resize(params.n);
      row.omega.resize(params.n);
      row.u_norm.resize(params.n);
      for (int j = 0; j < params.n; ++j) {
        row.q[j] = state.cables[j].q.v;
        row.omega[j] = state.cables[j].omega;
        row.u_norm[j] = ctrl.full_control.u[j].norm();
      }
      row.m_true = m_true;
      row.m_hat = est.mass(model, t);
      row.J_true = mat_to_six(J_true);
      row.J_hat = mat_to_six(J_hat);
      row.pe_integrand = sample.w.squaredNorm();
      metrics.trace.push_back(row);
    }

    if (k == n_steps) break;

    try {
      switch (scenario.plant) {
        case PlantModel::ClosedLoop:
          state = step(
              state,
              [&](const SystemState& s, double) {
                return ControlInput(redecompose_wrench(ctrl.wrench_control, s));
              },
              params, dist, scenario.dt);
          break;
        case PlantModel::FullVector:
          state = step(
              state,
              [&](const SystemState&, double) { return ControlInput(ctrl.full_control); },
              params, dist, scenario.dt);
          break;
        case PlantModel::FullThrust:
          state = step(
              state,
              [&](const SystemState& s, double) {
                FullControl fc = ctrl.full_control;
                for (int j = 0; j < params.n; ++j) {
                  fc.u[j] = ctrl.f[j] * s.quads[j].R.m.col(2);
                }
                return ControlInput(fc);
              },
              params, dist, scenario.dt);
          break;
      }
    } catch (const Error& e) {
      throw NumericalError("run: step failed at step " + std::to_string(k) + ": " + e.what());
    }
  }

  // Jerk of the measured acceleration by central differences, for the
  // hydrostatic diagnostic.
  for (std::size_t i = 0; i < metrics.traj.size(); ++i) {
    if (i > 0 && i + 1 < metrics.traj.size()) {
      metrics.traj[i].jerk = (metrics.traj[i + 1].a - metrics.traj[i - 1].a) /
                             (metrics.traj[i + 1].t - metrics.traj[i - 1].t);
    }
  }

  metrics.terminal_pos_error = metrics.pos_error.back();
  metrics.terminal_mass_error = metrics.mass_error.back();
  metrics.terminal_inertia_error = metrics.inertia_error.back();

  if (metrics.traj.size() > 2 && scenario.horizon >= options.pe_window) {
    const auto pe = constant_mass_pe(metrics.traj, options.pe_mu, options.pe_window);
    metrics.worst_pe_integral = pe.worst_margin;
    metrics.pe_ok = pe.all_ok;
    const auto hydro = hydrostatic_validity(metrics.traj, options.tank_radius);
    metrics.hydro_ok = hydro.ok;
    metrics.eps_peak = hydro.eps_peak;
    metrics.jerk_peak = hydro.jerk_peak;
  }
  return metrics;
}

std::string summarize(const Scenario& scenario, const RunMetrics& metrics) {
  namespace fs = std::filesystem;
  const fs::path dir(scenario.out_dir);
  fs::create_directories(dir);

  save_scenario(scenario, (dir / "scenario_effective.json").string());
  if (!metrics.trace.empty()) {
    write_trace_csv((dir / "trace.csv").string(), metrics.trace, scenario.params.n);
  }

  RunOptions defaults;
  if (!metrics.traj.empty() && scenario.horizon >= defaults.pe_window) {
    const auto rows = sliding_window_report(metrics.traj, metrics.S_series, nullptr,
                                            defaults.pe_window, defaults.pe_mu,
                                            10.0 * defaults.pe_mu, defaults.tank_radius);
    write_window_report_csv((dir / "window_report.csv").string(), rows);
  }

  nlohmann::json j;
  j["scenario"] = scenario.name;
  j["terminal"] = {{"pos_error_m", metrics.terminal_pos_error},
                   {"mass_error_kg", metrics.terminal_mass_error},
                   {"inertia_error_frobenius", metrics.terminal_inertia_error}};
  j["pe"] = {{"worst_window_integral", metrics.worst_pe_integral}, {"ok", metrics.pe_ok}};
  j["hydrostatic"] = {{"eps_peak", metrics.eps_peak},
                      {"jerk_peak_mps3", metrics.jerk_peak},
                      {"ok", metrics.hydro_ok}};
  const std::string text = j.dump(2) + "\n";
  std::ofstream out(dir / "summary.json");
  out << text;

  if (scenario.write_plots && !metrics.trace.empty()) {
    std::vector<PlotSeries> pos(3);
    const char* names[3] = {"x", "y", "z"};
    for (int axis = 0; axis < 3; ++axis) {
      pos[axis].label = names[axis];
      for (const auto& row : metrics.trace) {
        pos[axis].x.push_back(row.t);
        pos[axis].y.push_back(row.x(axis));
      }
    }
    write_svg_plot((dir / "position.svg").string(), "load position [m]", pos);

    std::vector<PlotSeries> massp(2);
    massp[0].label = "true";
    massp[1].label = "estimate";
    for (const auto& row : metrics.trace) {
      massp[0].x.push_back(row.t);
      massp[0].y.push_back(row.m_true);
      massp[1].x.push_back(row.t);
      massp[1].y.push_back(row.m_hat);
    }
    write_svg_plot((dir / "mass.svg").string(), "load mass [kg]", massp);

    std::vector<PlotSeries> inert(6);
    const char* jn[3] = {"Jxx", "Jyy", "Jzz"};
    for (int d = 0; d < 3; ++d) {
      inert[d].label = std::string(jn[d]) + " true";
      inert[d + 3].label = std::string(jn[d]) + " est";
      for (const auto& row : metrics.trace) {
        inert[d].x.push_back(row.t);
        inert[d].y.push_back(row.J_true(d));
        inert[d + 3].x.push_back(row.t);
        inert[d + 3].y.push_back(row.J_hat(d));
      }
    }
    write_svg_plot((dir / "inertia.svg").string(), "inertia diagonal [kg m^2]", inert);
  }
  return text;
}

}  // namespace aqualift
