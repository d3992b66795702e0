#pragma once

#include <aqualift/control.hpp>
#include <aqualift/dynamics.hpp>
#include <aqualift/mass_model.hpp>
#include <aqualift/tank.hpp>
#include <aqualift/trajectory.hpp>
#include <aqualift/types.hpp>

#include <optional>
#include <string>
#include <vector>

namespace aqualift {

enum class MassMode { Constant, Viscous, Orifice };
/// What the true load inertia does during the run.
enum class InertiaTruth { Constant, MassProportional, Tank };
/// What the controller consults for J_hat.
enum class InertiaSource { TrueSchedule, Lut };
enum class PlantModel { ClosedLoop, FullVector, FullThrust };

struct EstimatorConfig {
  MassModelKind model = MassModelKind::Constant;
  VecX theta0;
  VecX gamma;
  double m_min = 0.01;
};

struct TrajectoryConfig {
  std::vector<double> knot_t;
  std::vector<Vec3> knot_x;
  std::string kind = "cubic";  // cubic | tension | quintic
  double tau = 0.0;
  Vec3 dither_amplitudes = Vec3::Zero();
  std::vector<double> dither_freqs;
};

struct InitialPerturbation {
  double pos = 0.0;    // m
  double vel = 0.0;    // m/s
  double att = 0.0;    // rad
  double cable = 0.0;  // rad
};

struct Scenario {
  std::string name = "scenario";

  double horizon = 15.0;
  double dt = 1e-3;
  std::uint64_t seed = 1;

  SystemParams params;        // schedules filled from the mass/inertia settings
  MassMode mass_mode = MassMode::Constant;
  double m0 = 5.0;
  double lambda = 0.1;

  InertiaTruth inertia_truth = InertiaTruth::Constant;
  InertiaSource inertia_source = InertiaSource::TrueSchedule;
  Mat3 J0 = Vec3(0.12, 0.12, 0.20).asDiagonal();
  std::optional<TankGeometry> tank;
  std::string lut_file;       // prebuilt table for the Lut source ("" = build on load)
  int lut_resolution = 96;

  EstimatorConfig estimator;
  PlantModel plant = PlantModel::ClosedLoop;
  Gains gains;

  double wind_scale = 0.0;
  NoiseAmplitudes noise;

  TrajectoryConfig trajectory;
  InitialPerturbation perturbation;

  std::string out_dir = ".";
  bool write_plots = true;

  MassModel estimator_model() const;
  TrajectoryPlan build_plan() const;

  void validate() const;  // throws ValidationError listing all violations
};

/// Loads and validates a scenario JSON file; unspecified fields take the
/// documented defaults. Throws ParseError / ValidationError.
Scenario load_scenario(const std::string& path);
Scenario scenario_from_json_text(const std::string& text);

/// Effective configuration echo (reloads to an identical Scenario).
std::string scenario_to_json_text(const Scenario& s);
void save_scenario(const Scenario& s, const std::string& path);

}  // namespace aqualift
