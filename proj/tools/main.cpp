// aqualift command-line tool: simulation, excitation checks, inertia tables
// and trajectory planning for cooperative fluid-load transport.

#include <aqualift/errors.hpp>
#include <aqualift/harness.hpp>
#include <aqualift/inertia_lut.hpp>
#include <aqualift/io.hpp>
#include <aqualift/scenario.hpp>
#include <aqualift/trajectory.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace aqualift;

TankGeometry tank_from_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError("cannot open tank file " + path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("tank JSON: ") + e.what());
  }
  const std::string shape = j.value("shape", "box");
  const double m = j.value("empty_mass_kg", 1.0);
  const double rho = j.value("density_kgpm3", 1000.0);
  if (shape == "box") {
    const auto& s = j.at("size");
    return TankGeometry::box(s[0].get<double>(), s[1].get<double>(), s[2].get<double>(), m, rho);
  }
  if (shape == "cylinder") {
    return TankGeometry::cylinder(j.at("radius").get<double>(), j.at("height").get<double>(), m,
                                  rho);
  }
  if (shape == "sphere") {
    return TankGeometry::sphere(j.at("radius").get<double>(), m, rho);
  }
  throw ParseError("tank.shape must be box, cylinder or sphere");
}

int cmd_simulate(const std::string& scenario_path, const std::string& out_dir) {
  Scenario s = load_scenario(scenario_path);
  if (!out_dir.empty()) s.out_dir = out_dir;
  const RunMetrics metrics = run(s);
  std::cout << summarize(s, metrics);
  return 0;
}

int cmd_check_pe(const std::string& trace_path, double T, double mu, double M_cap,
                 double gamma, double tank_radius, const std::string& out_path) {
  const auto traj = read_traj_csv(trace_path);
  if (traj.size() < 3) throw ValidationError("check-pe: trace too short");

  // Constant-model error dynamics from the kinematics: S = gamma ||w||^2.
  std::vector<ExcitationSample> S_series(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    S_series[i].t = traj[i].t;
    S_series[i].dim = 1;
    S_series[i].S(0, 0) = gamma * traj[i].w().squaredNorm();
  }

  const auto rows = sliding_window_report(traj, S_series, nullptr, T, mu, M_cap, tank_radius);
  if (rows.empty()) throw ValidationError("check-pe: window longer than the trace");
  if (!out_path.empty()) write_window_report_csv(out_path, rows);

  double worst = std::numeric_limits<double>::infinity();
  bool all_ok = true;
  for (const auto& r : rows) {
    worst = std::min(worst, r.pe_integral);
    all_ok = all_ok && r.constant_pe_ok;
  }
  std::printf("windows: %zu  worst int ||w||^2 = %.6g  (mu = %.6g)  verdict: %s\n", rows.size(),
              worst, mu, all_ok ? "PASS" : "FAIL");
  return all_ok ? 0 : 3;
}

int cmd_build_lut(const std::string& tank_path, const std::string& out_path, int res,
                  const std::string& grid, int threads) {
  int ns = 21, nt = 13, np = 24;
  if (!grid.empty() &&
      std::sscanf(grid.c_str(), "%dx%dx%d", &ns, &nt, &np) != 3) {
    throw ValidationError("--grid must look like 21x13x24");
  }
  const TankGeometry tank = tank_from_file(tank_path);
  const InertiaLut lut = build_lut(tank, ns, nt, np, res, threads);
  save_lut(lut, out_path);
  std::printf("wrote %s: grid %ux%ux%u, resolution %d, max volume residual %.3g (V_T = %.6g)\n",
              out_path.c_str(), lut.n_sigma, lut.n_theta, lut.n_phi, res,
              lut.max_volume_residual, lut.V_T);
  return 0;
}

int cmd_query(const std::string& lut_path, double mass, const std::string& attitude) {
  const InertiaLut lut = load_lut(lut_path);

  Rotation R;
  std::vector<double> vals;
  std::stringstream ss(attitude);
  std::string tok;
  while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
  if (vals.size() == 4) {
    Eigen::Quaterniond q(vals[0], vals[1], vals[2], vals[3]);  // w, x, y, z
    q.normalize();
    R = Rotation(q.toRotationMatrix());
  } else if (vals.size() == 9) {
    Mat3 m;
    m << vals[0], vals[1], vals[2], vals[3], vals[4], vals[5], vals[6], vals[7], vals[8];
    R = Rotation::project(m);
  } else {
    throw ValidationError("--attitude needs a quaternion (w,x,y,z) or 9 row-major floats");
  }

  const LutQuery q = query(lut, mass, R);
  std::printf("sigma = %.6g%s\n", q.sigma, q.clamp_warning ? "  (clamped)" : "");
  std::printf("J_L [kg m^2]:\n");
  for (int r = 0; r < 3; ++r) {
    std::printf("  % .9e % .9e % .9e\n", q.J(r, 0), q.J(r, 1), q.J(r, 2));
  }
  std::printf("O_cm [m]: % .9e % .9e % .9e\n", q.O_cm.x(), q.O_cm.y(), q.O_cm.z());
  return 0;
}

int cmd_plan(const std::string& waypoints_path, const std::string& kind, double tau,
             const std::string& dither, const std::string& out_path, double dt) {
  std::ifstream f(waypoints_path);
  if (!f) throw ValidationError("cannot open waypoints file " + waypoints_path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("waypoints JSON: ") + e.what());
  }

  Waypoints wp;
  for (const auto& v : j.at("t")) wp.t.push_back(v.get<double>());
  for (const auto& v : j.at("x")) {
    wp.x.emplace_back(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
  }
  if (j.contains("v_start")) {
    const auto& v = j["v_start"];
    wp.v_start = Vec3(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
  }
  if (j.contains("v_end")) {
    const auto& v = j["v_end"];
    wp.v_end = Vec3(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
  }

  TrajectoryPlan plan;
  if (kind == "cubic") {
    plan = cubic_spline(wp);
  } else if (kind == "tension") {
    plan = tension_spline(wp, tau);
  } else if (kind == "quintic") {
    plan = min_jerk_quintic(wp);
  } else {
    throw ValidationError("--kind must be cubic, tension or quintic");
  }

  if (!dither.empty()) {
    double a = 0.0, w = 0.0;
    if (std::sscanf(dither.c_str(), "%lf,%lf", &a, &w) != 2) {
      throw ValidationError("--dither must look like amplitude,frequency");
    }
    const auto res = add_dither(plan, Vec3::Constant(a), {w});
    plan = res.plan;
    std::printf("dither: excitation integral %.6g -> %.6g\n", res.pe_before, res.pe_after);
  }

  export_plan_csv(plan, out_path, dt);
  std::printf("wrote %s (%.3g s at dt = %.3g s)\n", out_path.c_str(),
              plan.t_end() - plan.t_begin(), dt);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"aqualift: cooperative fluid-load transport simulation and estimation"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "Run a scenario end to end");
  std::string scenario_path, out_dir;
  sim->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
  sim->add_option("--out", out_dir, "Output directory (default from the scenario)");

  auto* pe = app.add_subcommand("check-pe", "Windowed excitation checks on a trace");
  std::string trace_path, report_path;
  double T = 2.0, mu = 5.0, M_cap = 1e6, gamma = 1.0, tank_radius = 0.5;
  pe->add_option("--trace", trace_path, "Trace CSV (or plan CSV)")->required();
  pe->add_option("--T", T, "Window length [s]");
  pe->add_option("--mu", mu, "Excitation threshold");
  pe->add_option("--M", M_cap, "Spike cap for int lambda_min^+");
  pe->add_option("--gamma", gamma, "Learning rate for the constant-model S");
  pe->add_option("--tank-radius", tank_radius, "Tank radius for the hydrostatic flag [m]");
  pe->add_option("--out", report_path, "Window-report CSV path");

  auto* bl = app.add_subcommand("build-lut", "Precompute an inertia look-up table");
  std::string tank_path, lut_out, grid;
  int res = 128, threads = 0;
  bl->add_option("--tank", tank_path, "Tank JSON file")->required();
  bl->add_option("--out", lut_out, "Output LUT file")->required();
  bl->add_option("--res", res, "Voxels along the longest axis");
  bl->add_option("--grid", grid, "Grid as n_sigma x n_theta x n_phi, e.g. 21x13x24");
  bl->add_option("--threads", threads, "Worker threads (0 = hardware)");

  auto* qr = app.add_subcommand("query", "Interpolate a stored look-up table");
  std::string lut_path, attitude = "1,0,0,0";
  double mass = 0.0;
  qr->add_option("--lut", lut_path, "LUT file")->required();
  qr->add_option("--mass", mass, "Estimated load mass [kg]")->required();
  qr->add_option("--attitude", attitude, "Quaternion w,x,y,z or 9 row-major floats");

  auto* pl = app.add_subcommand("plan", "Generate a reference trajectory CSV");
  std::string waypoints_path, kind = "cubic", dither, plan_out = "plan.csv";
  double tau = 0.0, plan_dt = 1e-3;
  pl->add_option("--waypoints", waypoints_path, "Waypoints JSON file")->required();
  pl->add_option("--kind", kind, "cubic | tension | quintic");
  pl->add_option("--tau", tau, "Tension parameter [1/s^2]");
  pl->add_option("--dither", dither, "amplitude,frequency (m, rad/s)");
  pl->add_option("--out", plan_out, "Output CSV path");
  pl->add_option("--dt", plan_dt, "Sampling step [s]");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(scenario_path, out_dir);
    if (pe->parsed()) return cmd_check_pe(trace_path, T, mu, M_cap, gamma, tank_radius,
                                          report_path);
    if (bl->parsed()) return cmd_build_lut(tank_path, lut_out, res, grid, threads);
    if (qr->parsed()) return cmd_query(lut_path, mass, attitude);
    if (pl->parsed()) return cmd_plan(waypoints_path, kind, tau, dither, plan_out, plan_dt);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
