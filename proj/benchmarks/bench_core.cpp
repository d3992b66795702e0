// Microbenchmarks for the hot paths: derivative evaluation, stepping, the
// controller pipeline, estimator updates and look-up-table operations.

#include <aqualift/control.hpp>
#include <aqualift/dynamics.hpp>
#include <aqualift/inertia_lut.hpp>
#include <aqualift/manifold.hpp>
#include <aqualift/mass_estimator.hpp>
#include <aqualift/trajectory.hpp>

#include <benchmark/benchmark.h>

namespace {

using namespace aqualift;

SystemParams bench_params() {
  SystemParams p = SystemParams::default_quad();
  p.load_mass = MassSchedule::viscous(5.0, 0.1);
  p.load_inertia =
      InertiaSchedule::mass_proportional(Vec3(0.12, 0.12, 0.20).asDiagonal(), p.load_mass);
  return p;
}

SystemState bench_state(const SystemParams& p) {
  SystemState s = SystemState::hover(p);
  s.x = Vec3(0.1, -0.2, 0.05);
  s.v = Vec3(0.3, 0.1, -0.2);
  s.Omega = Vec3(0.2, -0.1, 0.3);
  for (int j = 0; j < p.n; ++j) {
    s.cables[j].q = UnitVector::normalize(Vec3(0.1 * j, -0.05, -1.0));
    s.cables[j].omega = Vec3(0.1, 0.2, 0.0);
  }
  return s;
}

WrenchControl bench_wrench(const SystemState& s, const SystemParams& p) {
  WrenchControl c = WrenchControl::zero(p.n);
  for (int j = 0; j < p.n; ++j) {
    const Vec3 q = s.cables[j].q.v;
    const Vec3 F = 12.0 * Vec3::UnitZ() + Vec3(0.5, -0.2, 0.0);
    c.mu[j] = q.dot(F) * q;
    const Vec3 raw(0.4, 0.1, 0.2);
    c.nu[j] = raw - q.dot(raw) * q;
  }
  return c;
}

void BM_exp_rotation(benchmark::State& state) {
  const Vec3 w(0.1, -0.3, 0.2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(exp_rotation(w));
  }
}
BENCHMARK(BM_exp_rotation);

void BM_full_derivatives(benchmark::State& state) {
  const SystemParams p = bench_params();
  const SystemState s = bench_state(p);
  FullControl c = FullControl::zero(p.n);
  for (int j = 0; j < p.n; ++j) c.u[j] = Vec3(0.2, -0.1, 14.0);
  const Disturbance d = Disturbance::none();
  for (auto _ : state) {
    benchmark::DoNotOptimize(full_derivatives(s, c, p, d));
  }
}
BENCHMARK(BM_full_derivatives);

void BM_closed_loop_derivatives(benchmark::State& state) {
  const SystemParams p = bench_params();
  const SystemState s = bench_state(p);
  const WrenchControl c = bench_wrench(s, p);
  const Disturbance d = Disturbance::none();
  for (auto _ : state) {
    benchmark::DoNotOptimize(closed_loop_derivatives(s, c, p, d));
  }
}
BENCHMARK(BM_closed_loop_derivatives);

void BM_step_closed_loop(benchmark::State& state) {
  const SystemParams p = bench_params();
  SystemState s = bench_state(p);
  const WrenchControl c = bench_wrench(s, p);
  const Disturbance d = Disturbance::none();
  auto cb = [&](const SystemState& st, double) {
    return ControlInput(redecompose_wrench(c, st));
  };
  for (auto _ : state) {
    s = step(s, cb, p, d, 1e-3);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_step_closed_loop);

void BM_controller_update(benchmark::State& state) {
  const SystemParams p = bench_params();
  const SystemState s = bench_state(p);
  CooperativeController controller(p, Gains{});
  Measurement meas;
  meas.x = s.x;
  meas.v = s.v;
  meas.R = s.R;
  meas.Omega = s.Omega;
  const LoadReference ref;
  const Mat3 J = Vec3(0.12, 0.12, 0.20).asDiagonal();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        controller.update(meas, s.cables, s.quads, ref, 5.0, -0.5, J, Mat3::Zero()));
  }
}
BENCHMARK(BM_controller_update);

void BM_regress_step(benchmark::State& state) {
  const MassModel model = MassModel::viscous_leak();
  ParamEstimate est;
  est.theta = VecX::Constant(2, 1.0);
  est.theta(0) = 5.0;
  est.theta(1) = 0.1;
  est.gamma = VecX::Constant(2, 0.01);
  RegressorSample sample;
  sample.w = Vec3(0.1, 0.0, 9.8);
  sample.v = Vec3(0.2, -0.1, 0.0);
  sample.thrust_sum = Vec3(0.0, 0.0, 49.0);
  for (auto _ : state) {
    est = regress_step(est, model, sample, 1e-3);
    benchmark::DoNotOptimize(est);
  }
}
BENCHMARK(BM_regress_step);

void BM_plane_solve(benchmark::State& state) {
  const TankGeometry tank = TankGeometry::box(0.3, 0.24, 0.16, 1.0, 1000.0);
  const VoxelizedTank vox(tank, static_cast<int>(state.range(0)));
  const Vec3 g_dir = Vec3(0.2, -0.3, -0.93).normalized();
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_plane_offset(vox, 0.6, g_dir));
  }
}
BENCHMARK(BM_plane_solve)->Arg(64)->Arg(128);

void BM_lut_query(benchmark::State& state) {
  static const InertiaLut lut =
      build_lut(TankGeometry::box(0.3, 0.24, 0.16, 1.0, 1000.0), 9, 7, 12, 48, 1);
  const Rotation R = exp_rotation(Vec3(0.1, 0.2, -0.1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(query(lut, 4.0, R));
  }
}
BENCHMARK(BM_lut_query);

void BM_plan_eval(benchmark::State& state) {
  Waypoints wp;
  wp.t = {0.0, 2.0, 4.0, 6.0, 8.0};
  wp.x = {Vec3(0, 0, 0), Vec3(1, 0.5, 0), Vec3(2, 0, 0.5), Vec3(3, -0.5, 0), Vec3(4, 0, 0)};
  const TrajectoryPlan plan = tension_spline(wp, 4.0);
  double t = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(plan.eval(t));
    t += 1e-3;
    if (t > 8.0) t = 0.0;
  }
}
BENCHMARK(BM_plan_eval);

}  // namespace

BENCHMARK_MAIN();
