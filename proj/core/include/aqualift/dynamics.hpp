#pragma once

#include <aqualift/manifold.hpp>
#include <aqualift/types.hpp>

#include <functional>
#include <variant>
#include <vector>

namespace aqualift {

/// True load mass and its rate, as functions of time.
struct MassSchedule {
  std::function<double(double)> mass;       // kg
  std::function<double(double)> mass_rate;  // kg/s

  static MassSchedule constant(double m0);
  static MassSchedule viscous(double m0, double lambda);   // m0 exp(-lambda t)
  static MassSchedule orifice(double m0, double lambda);   // (sqrt(m0) - sqrt(lambda) t)^2, clamped
};

/// True load inertia tensor and its rate, as functions of time.
struct InertiaSchedule {
  std::function<Mat3(double)> inertia;       // kg m^2, SPD
  std::function<Mat3(double)> inertia_rate;  // kg m^2 / s

  static InertiaSchedule constant(const Mat3& J0);
  /// J(t) = J0 * m(t)/m(0): fixed mass distribution, scaled by total mass.
  static InertiaSchedule mass_proportional(const Mat3& J0, const MassSchedule& mass);
};

struct SystemParams {
  int n = 4;                       // quadrotor count
  double m_quad = 0.75;            // kg, each quadrotor
  Mat3 J_quad = Mat3::Identity();  // kg m^2, each quadrotor
  double cable_length = 1.0;       // m
  std::vector<Vec3> attach;        // body-frame attachment offsets r_j, size n
  double g = kGravity;
  MassSchedule load_mass;
  InertiaSchedule load_inertia;

  /// Four quadrotors on a square of the given side, attachments in the load plane.
  static SystemParams default_quad(double side = 0.8);

  void validate() const;  // throws ValidationError listing all violations
};

struct CableState {
  UnitVector q;  // direction from quadrotor to its attachment point
  Vec3 omega = Vec3::Zero();
};

struct QuadState {
  Rotation R;
  Vec3 Omega = Vec3::Zero();
};

struct SystemState {
  Vec3 x = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Rotation R;
  Vec3 Omega = Vec3::Zero();
  std::vector<CableState> cables;
  std::vector<QuadState> quads;
  double t = 0.0;

  static SystemState hover(const SystemParams& p);

  /// x_Q_j = x_L + R_L r_j - L q_j
  Vec3 quad_position(const SystemParams& p, int j) const;

  /// Worst manifold-invariant violation across all rotations and cable directions.
  double invariant_error() const;
};

/// Thrust vectors in the inertial frame plus body torques, one per quadrotor.
struct FullControl {
  std::vector<Vec3> u;       // N, inertial frame
  std::vector<Vec3> torque;  // N m, body frame
  static FullControl zero(int n);
};

/// Cable-parallel and cable-perpendicular force components plus body torques.
struct WrenchControl {
  std::vector<Vec3> mu;      // N, parallel to q_j
  std::vector<Vec3> nu;      // N, perpendicular to q_j
  std::vector<Vec3> torque;  // N m
  static WrenchControl zero(int n);
};

using ControlInput = std::variant<FullControl, WrenchControl>;

struct NoiseAmplitudes {
  double pos = 0.0;   // m
  double vel = 0.0;   // m/s
  double acc = 0.0;   // m/s^2
  double att = 0.0;   // rad
};

struct Disturbance {
  std::function<Vec3(double)> wind;  // N, inertial frame; may be empty (no wind)
  NoiseAmplitudes noise;

  Vec3 wind_at(double t) const { return wind ? wind(t) : Vec3::Zero(); }
  static Disturbance none();
  /// Benchmark wind plus the standard sensor-noise amplitudes.
  static Disturbance benchmark(double wind_scale = 1.0);
};

/// F(t) = 0.3 [sin(0.4 t), cos(0.6 t), sin(0.8 t)] N, scaled.
Vec3 wind_force(double t, double scale = 1.0);

struct StateDerivative {
  Vec3 dx = Vec3::Zero();        // = v_L
  Vec3 dv = Vec3::Zero();        // load acceleration
  Vec3 dOmega = Vec3::Zero();    // load angular acceleration, body frame
  std::vector<Vec3> domega;      // cable angular accelerations
  std::vector<Vec3> dOmega_quad; // quadrotor angular accelerations
};

/// Reduced multi-quadrotor/load dynamics with the control given as inertial
/// thrust vectors. The load translational/rotational accelerations and the
/// cable accelerations are coupled implicitly; one (6+3N)-dimensional linear
/// system is assembled and solved per call. Throws SingularMassMatrix when
/// that system is ill-conditioned (rcond < 1e-12).
StateDerivative full_derivatives(const SystemState& s, const FullControl& c,
                                 const SystemParams& p, const Disturbance& d);

/// Feedback-simplified dynamics in terms of mu_j (parallel) and nu_j
/// (perpendicular) cable force components. Requires the orthogonality
/// invariants on mu/nu; throws SingularInertia if J_L is not invertible.
StateDerivative closed_loop_derivatives(const SystemState& s, const WrenchControl& c,
                                        const SystemParams& p, const Disturbance& d);

/// Re-projects held per-cable force commands onto the current cable frame:
/// the total F_j = mu_j + nu_j is preserved while the parallel/perpendicular
/// split follows q_j. This is the zero-order-hold semantics for the
/// closed-loop plant, whose inputs must satisfy the decomposition at every
/// evaluation state (integrator stages move the cables).
WrenchControl redecompose_wrench(const WrenchControl& cmd, const SystemState& s);

using ControlCallback = std::function<ControlInput(const SystemState&, double)>;

/// One RK4 step with manifold-aware handling of the attitude and sphere
/// variables: rotations and cable directions advance through the exponential
/// map in local coordinates (stage rates combined with dexpinv corrections),
/// vector states through classical RK4. All manifold invariants are restored
/// exactly at the end of the step. dt must lie in (0, 0.05].
SystemState step(const SystemState& s, const ControlCallback& control,
                 const SystemParams& p, const Disturbance& d, double dt);

/// What onboard estimation exposes to the controller and the mass observer.
struct Measurement {
  double t = 0.0;
  Vec3 x = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 vdot = Vec3::Zero();
  Rotation R;
  Vec3 Omega = Vec3::Zero();
};

/// Perturbs the true state with smooth deterministic sinusoids of the
/// configured amplitudes. vdot_true is the load acceleration from the last
/// derivative evaluation; attitude noise is applied through the exponential
/// map so the measured attitude is still a rotation.
Measurement measure(const SystemState& s, const Disturbance& d, double t,
                    const Vec3& vdot_true);

}  // namespace aqualift
