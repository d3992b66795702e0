#include <aqualift/scenario.hpp>

#include <aqualift/errors.hpp>

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace aqualift {

using nlohmann::json;

namespace {

Vec3 vec3_of(const json& j, const char* field) {
  if (!j.is_array() || j.size() != 3) {
    throw ParseError(std::string("expected a 3-array for ") + field);
  }
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

json to_json_arr(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

MassMode mass_mode_of(const std::string& s) {
  if (s == "constant") return MassMode::Constant;
  if (s == "viscous") return MassMode::Viscous;
  if (s == "orifice") return MassMode::Orifice;
  throw ParseError("load.mass_mode: unknown value '" + s + "'");
}

std::string mass_mode_str(MassMode m) {
  switch (m) {
    case MassMode::Constant: return "constant";
    case MassMode::Viscous: return "viscous";
    case MassMode::Orifice: return "orifice";
  }
  return "constant";
}

MassModelKind model_kind_of(const std::string& s) {
  if (s == "constant") return MassModelKind::Constant;
  if (s == "viscous") return MassModelKind::ViscousLeak;
  if (s == "orifice") return MassModelKind::OrificeLeak;
  throw ParseError("estimator.model: unknown value '" + s + "'");
}

std::string model_kind_str(MassModelKind k) {
  switch (k) {
    case MassModelKind::Constant: return "constant";
    case MassModelKind::ViscousLeak: return "viscous";
    case MassModelKind::OrificeLeak: return "orifice";
    case MassModelKind::Custom: return "custom";
  }
  return "constant";
}

TankGeometry tank_of(const json& j) {
  const std::string shape = j.value("shape", "box");
  const double m = j.value("empty_mass_kg", 1.0);
  const double rho = j.value("density_kgpm3", 1000.0);
  if (shape == "box") {
    const Vec3 size = vec3_of(j.at("size"), "tank.size");
    return TankGeometry::box(size.x(), size.y(), size.z(), m, rho);
  }
  if (shape == "cylinder") {
    return TankGeometry::cylinder(j.at("radius").get<double>(), j.at("height").get<double>(),
                                  m, rho);
  }
  if (shape == "sphere") {
    return TankGeometry::sphere(j.at("radius").get<double>(), m, rho);
  }
  throw ParseError("tank.shape: unknown value '" + shape + "' (box, cylinder, sphere)");
}

json tank_to_json(const TankGeometry& t) {
  json j;
  j["empty_mass_kg"] = t.empty_mass();
  j["density_kgpm3"] = t.density();
  const Vec3 ext = t.bbox_max() - t.bbox_min();
  switch (t.shape()) {
    case TankShape::Box:
      j["shape"] = "box";
      j["size"] = to_json_arr(ext);
      break;
    case TankShape::Cylinder:
      j["shape"] = "cylinder";
      j["radius"] = 0.5 * ext.x();
      j["height"] = ext.z();
      break;
    case TankShape::Sphere:
      j["shape"] = "sphere";
      j["radius"] = 0.5 * ext.x();
      break;
    case TankShape::Mesh:
      throw ValidationError("scenario echo: mesh tanks cannot be serialized");
  }
  return j;
}

}  // namespace

MassModel Scenario::estimator_model() const {
  switch (estimator.model) {
    case MassModelKind::Constant: return MassModel::constant();
    case MassModelKind::ViscousLeak: return MassModel::viscous_leak();
    case MassModelKind::OrificeLeak: return MassModel::orifice_leak();
    case MassModelKind::Custom:
      throw ValidationError("Scenario: custom estimator models are API-only");
  }
  return MassModel::constant();
}

TrajectoryPlan Scenario::build_plan() const {
  Waypoints wp;
  wp.t = trajectory.knot_t;
  wp.x = trajectory.knot_x;

  TrajectoryPlan plan;
  if (trajectory.kind == "cubic") {
    plan = cubic_spline(wp);
  } else if (trajectory.kind == "tension") {
    plan = tension_spline(wp, trajectory.tau);
  } else if (trajectory.kind == "quintic") {
    plan = min_jerk_quintic(wp);
  } else {
    throw ValidationError("trajectory.kind: unknown value '" + trajectory.kind + "'");
  }

  if (trajectory.dither_amplitudes.norm() > 0.0 && !trajectory.dither_freqs.empty()) {
    plan = add_dither(plan, trajectory.dither_amplitudes, trajectory.dither_freqs).plan;
  }
  return plan;
}

void Scenario::validate() const {
  std::ostringstream bad;
  if (!(horizon > 0.0)) bad << "horizon must be > 0; ";
  if (!(dt > 0.0) || dt > 0.05) bad << "dt must lie in (0, 0.05]; ";
  if (params.n < 1) bad << "quadrotors.count must be >= 1; ";
  if (static_cast<int>(params.attach.size()) != params.n) {
    bad << "attachments must have quadrotors.count entries; ";
  }
  if (params.m_quad <= 0) bad << "quadrotor mass must be > 0; ";
  if (params.cable_length <= 0) bad << "cable length must be > 0; ";
  if (m0 <= 0) bad << "load.m0_kg must be > 0; ";
  if ((mass_mode != MassMode::Constant) && lambda <= 0) bad << "load.lambda must be > 0; ";

  // Mass positivity over the horizon.
  {
    MassSchedule ms;
    switch (mass_mode) {
      case MassMode::Constant: ms = MassSchedule::constant(m0); break;
      case MassMode::Viscous: ms = MassSchedule::viscous(m0, lambda); break;
      case MassMode::Orifice: ms = MassSchedule::orifice(m0, lambda); break;
    }
    for (int i = 0; i <= 100; ++i) {
      if (!(ms.mass(horizon * i / 100.0) > 0.0)) {
        bad << "load mass must stay positive over the horizon; ";
        break;
      }
    }
  }

  if ((inertia_truth == InertiaTruth::Tank || inertia_source == InertiaSource::Lut) &&
      !tank.has_value() && lut_file.empty()) {
    bad << "tank-based inertia requires a tank (or lut_file for the lut source); ";
  }
  if (tank.has_value() && m0 < tank->empty_mass()) {
    bad << "load.m0_kg must be at least the empty tank mass; ";
  }

  const int k = estimator.model == MassModelKind::Constant ? 1 : 2;
  if (estimator.theta0.size() != k) bad << "estimator.theta0 must have dimension " << k << "; ";
  if (estimator.gamma.size() != k) bad << "estimator.gamma must have dimension " << k << "; ";
  for (int i = 0; i < estimator.gamma.size(); ++i) {
    if (!(estimator.gamma(i) > 0.0)) bad << "estimator.gamma entries must be > 0; ";
  }

  if (trajectory.knot_t.size() < 2 || trajectory.knot_t.size() != trajectory.knot_x.size()) {
    bad << "trajectory needs >= 2 knots with matching times/positions; ";
  }
  for (std::size_t i = 0; i + 1 < trajectory.knot_t.size(); ++i) {
    if (!(trajectory.knot_t[i + 1] > trajectory.knot_t[i])) {
      bad << "trajectory knot times must be strictly increasing; ";
      break;
    }
  }

  const std::string msg = bad.str();
  if (!msg.empty()) throw ValidationError("Scenario '" + name + "': " + msg);
}

Scenario scenario_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("scenario JSON: ") + e.what());
  }

  try {
    Scenario s;
    s.name = j.value("name", s.name);
    s.horizon = j.value("horizon_s", s.horizon);
    s.dt = j.value("dt_s", s.dt);
    s.seed = j.value("seed", s.seed);

    s.params = SystemParams::default_quad();
    if (j.contains("quadrotors")) {
      const auto& q = j["quadrotors"];
      s.params.n = q.value("count", s.params.n);
      s.params.m_quad = q.value("mass_kg", s.params.m_quad);
      s.params.cable_length = q.value("cable_length_m", s.params.cable_length);
      if (q.contains("inertia_diag")) {
        s.params.J_quad = vec3_of(q["inertia_diag"], "quadrotors.inertia_diag").asDiagonal();
      }
      if (q.contains("attachments")) {
        s.params.attach.clear();
        for (const auto& a : q["attachments"]) {
          s.params.attach.push_back(vec3_of(a, "quadrotors.attachments[]"));
        }
      } else if (s.params.n != 4) {
        throw ParseError("quadrotors.attachments required when count != 4");
      }
    }

    if (j.contains("load")) {
      const auto& l = j["load"];
      s.mass_mode = mass_mode_of(l.value("mass_mode", "constant"));
      s.m0 = l.value("m0_kg", s.m0);
      s.lambda = l.value("lambda", s.lambda);
      if (l.contains("inertia")) {
        const auto& in = l["inertia"];
        const std::string mode = in.value("mode", "constant");
        if (mode == "constant") {
          s.inertia_truth = InertiaTruth::Constant;
        } else if (mode == "mass_proportional") {
          s.inertia_truth = InertiaTruth::MassProportional;
        } else if (mode == "tank") {
          s.inertia_truth = InertiaTruth::Tank;
        } else {
          throw ParseError("load.inertia.mode: unknown value '" + mode + "'");
        }
        if (in.contains("J0_diag")) {
          s.J0 = vec3_of(in["J0_diag"], "load.inertia.J0_diag").asDiagonal();
        }
        if (in.contains("tank")) s.tank = tank_of(in["tank"]);
        s.lut_file = in.value("lut_file", s.lut_file);
        s.lut_resolution = in.value("lut_resolution", s.lut_resolution);
      }
    }

    const std::string source = j.value("inertia_source", "true");
    if (source == "true") {
      s.inertia_source = InertiaSource::TrueSchedule;
    } else if (source == "lut") {
      s.inertia_source = InertiaSource::Lut;
    } else {
      throw ParseError("inertia_source: unknown value '" + source + "' (true, lut)");
    }

    if (j.contains("estimator")) {
      const auto& e = j["estimator"];
      s.estimator.model = model_kind_of(e.value("model", "constant"));
      const int k = s.estimator.model == MassModelKind::Constant ? 1 : 2;
      s.estimator.theta0 = VecX::Zero(k);
      s.estimator.gamma = VecX::Zero(k);
      if (e.contains("theta0")) {
        int i = 0;
        for (const auto& v : e["theta0"]) {
          if (i < k) s.estimator.theta0(i) = v.get<double>();
          ++i;
        }
        if (i != k) throw ParseError("estimator.theta0: wrong dimension");
      }
      if (e.contains("gamma")) {
        int i = 0;
        for (const auto& v : e["gamma"]) {
          if (i < k) s.estimator.gamma(i) = v.get<double>();
          ++i;
        }
        if (i != k) throw ParseError("estimator.gamma: wrong dimension");
      }
      s.estimator.m_min = e.value("m_min_kg", s.estimator.m_min);
    } else {
      s.estimator.theta0 = VecX::Constant(1, 1.5 * s.m0);
      s.estimator.gamma = VecX::Constant(1, 0.01);
    }

    const std::string plant = j.value("plant", "closed_loop");
    if (plant == "closed_loop") {
      s.plant = PlantModel::ClosedLoop;
    } else if (plant == "full_vector") {
      s.plant = PlantModel::FullVector;
    } else if (plant == "full_thrust") {
      s.plant = PlantModel::FullThrust;
    } else {
      throw ParseError("plant: unknown value '" + plant + "'");
    }

    if (j.contains("gains")) {
      const auto& g = j["gains"];
      s.gains.K_x = g.value("K_x", s.gains.K_x);
      s.gains.K_v = g.value("K_v", s.gains.K_v);
      s.gains.K_R = g.value("K_R", s.gains.K_R);
      s.gains.K_Omega = g.value("K_Omega", s.gains.K_Omega);
      s.gains.k_q = g.value("k_q", s.gains.k_q);
      s.gains.k_omega = g.value("k_omega", s.gains.k_omega);
      s.gains.k_R_quad = g.value("k_R_quad", s.gains.k_R_quad);
      s.gains.k_Omega_quad = g.value("k_Omega_quad", s.gains.k_Omega_quad);
      s.gains.thrust_cap = g.value("thrust_cap_n", s.gains.thrust_cap);
    }

    if (j.contains("disturbance")) {
      const auto& d = j["disturbance"];
      s.wind_scale = d.value("wind_scale", s.wind_scale);
      if (d.contains("noise")) {
        const auto& n = d["noise"];
        s.noise.pos = n.value("pos_m", s.noise.pos);
        s.noise.vel = n.value("vel_mps", s.noise.vel);
        s.noise.acc = n.value("acc_mps2", s.noise.acc);
        s.noise.att = n.value("att_rad", s.noise.att);
      }
    }

    if (j.contains("trajectory")) {
      const auto& t = j["trajectory"];
      if (t.contains("knot_t")) {
        s.trajectory.knot_t.clear();
        for (const auto& v : t["knot_t"]) s.trajectory.knot_t.push_back(v.get<double>());
      }
      if (t.contains("knot_x")) {
        s.trajectory.knot_x.clear();
        for (const auto& v : t["knot_x"]) {
          s.trajectory.knot_x.push_back(vec3_of(v, "trajectory.knot_x[]"));
        }
      }
      s.trajectory.kind = t.value("kind", s.trajectory.kind);
      s.trajectory.tau = t.value("tau", s.trajectory.tau);
      if (t.contains("dither_amplitudes")) {
        s.trajectory.dither_amplitudes =
            vec3_of(t["dither_amplitudes"], "trajectory.dither_amplitudes");
      }
      if (t.contains("dither_freqs")) {
        s.trajectory.dither_freqs.clear();
        for (const auto& v : t["dither_freqs"]) {
          s.trajectory.dither_freqs.push_back(v.get<double>());
        }
      }
    }
    if (s.trajectory.knot_t.empty()) {
      s.trajectory.knot_t = {0.0, s.horizon};
      s.trajectory.knot_x = {Vec3::Zero(), Vec3::Zero()};
    }

    if (j.contains("initial_perturbation")) {
      const auto& p = j["initial_perturbation"];
      s.perturbation.pos = p.value("pos_m", s.perturbation.pos);
      s.perturbation.vel = p.value("vel_mps", s.perturbation.vel);
      s.perturbation.att = p.value("att_rad", s.perturbation.att);
      s.perturbation.cable = p.value("cable_rad", s.perturbation.cable);
    }

    if (j.contains("output")) {
      s.out_dir = j["output"].value("dir", s.out_dir);
      s.write_plots = j["output"].value("plots", s.write_plots);
    }

    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw ParseError(std::string("scenario JSON: ") + e.what());
  }
}

Scenario load_scenario(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError("load_scenario: cannot open " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  return scenario_from_json_text(buf.str());
}

std::string scenario_to_json_text(const Scenario& s) {
  json j;
  j["name"] = s.name;
  j["horizon_s"] = s.horizon;
  j["dt_s"] = s.dt;
  j["seed"] = s.seed;

  json q;
  q["count"] = s.params.n;
  q["mass_kg"] = s.params.m_quad;
  q["inertia_diag"] =
      json::array({s.params.J_quad(0, 0), s.params.J_quad(1, 1), s.params.J_quad(2, 2)});
  q["cable_length_m"] = s.params.cable_length;
  q["attachments"] = json::array();
  for (const auto& a : s.params.attach) q["attachments"].push_back(to_json_arr(a));
  j["quadrotors"] = q;

  json l;
  l["mass_mode"] = mass_mode_str(s.mass_mode);
  l["m0_kg"] = s.m0;
  l["lambda"] = s.lambda;
  json in;
  in["mode"] = s.inertia_truth == InertiaTruth::Constant ? "constant"
               : s.inertia_truth == InertiaTruth::MassProportional ? "mass_proportional"
                                                                   : "tank";
  in["J0_diag"] = json::array({s.J0(0, 0), s.J0(1, 1), s.J0(2, 2)});
  if (s.tank.has_value()) in["tank"] = tank_to_json(*s.tank);
  in["lut_file"] = s.lut_file;
  in["lut_resolution"] = s.lut_resolution;
  l["inertia"] = in;
  j["load"] = l;

  j["inertia_source"] = s.inertia_source == InertiaSource::TrueSchedule ? "true" : "lut";

  json e;
  e["model"] = model_kind_str(s.estimator.model);
  e["theta0"] = json::array();
  for (int i = 0; i < s.estimator.theta0.size(); ++i) e["theta0"].push_back(s.estimator.theta0(i));
  e["gamma"] = json::array();
  for (int i = 0; i < s.estimator.gamma.size(); ++i) e["gamma"].push_back(s.estimator.gamma(i));
  e["m_min_kg"] = s.estimator.m_min;
  j["estimator"] = e;

  j["plant"] = s.plant == PlantModel::ClosedLoop ? "closed_loop"
               : s.plant == PlantModel::FullVector ? "full_vector"
                                                   : "full_thrust";

  json g;
  g["K_x"] = s.gains.K_x;
  g["K_v"] = s.gains.K_v;
  g["K_R"] = s.gains.K_R;
  g["K_Omega"] = s.gains.K_Omega;
  g["k_q"] = s.gains.k_q;
  g["k_omega"] = s.gains.k_omega;
  g["k_R_quad"] = s.gains.k_R_quad;
  g["k_Omega_quad"] = s.gains.k_Omega_quad;
  g["thrust_cap_n"] = s.gains.thrust_cap;
  j["gains"] = g;

  json d;
  d["wind_scale"] = s.wind_scale;
  d["noise"] = {{"pos_m", s.noise.pos},
                {"vel_mps", s.noise.vel},
                {"acc_mps2", s.noise.acc},
                {"att_rad", s.noise.att}};
  j["disturbance"] = d;

  json t;
  t["knot_t"] = s.trajectory.knot_t;
  t["knot_x"] = json::array();
  for (const auto& x : s.trajectory.knot_x) t["knot_x"].push_back(to_json_arr(x));
  t["kind"] = s.trajectory.kind;
  t["tau"] = s.trajectory.tau;
  t["dither_amplitudes"] = to_json_arr(s.trajectory.dither_amplitudes);
  t["dither_freqs"] = s.trajectory.dither_freqs;
  j["trajectory"] = t;

  j["initial_perturbation"] = {{"pos_m", s.perturbation.pos},
                               {"vel_mps", s.perturbation.vel},
                               {"att_rad", s.perturbation.att},
                               {"cable_rad", s.perturbation.cable}};
  j["output"] = {{"dir", s.out_dir}, {"plots", s.write_plots}};
  return j.dump(2) + "\n";
}

void save_scenario(const Scenario& s, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ValidationError("save_scenario: cannot open " + path);
  f << scenario_to_json_text(s);
}

}  // namespace aqualift
