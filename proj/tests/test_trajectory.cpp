#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <aqualift/errors.hpp>
#include <aqualift/trajectory.hpp>

#include "support.hpp"

#include <cmath>
#include <fstream>

using namespace aqualift;
using test::uniform;

namespace {

Waypoints line_rest_to_rest(double T, const Vec3& from, const Vec3& to) {
  Waypoints wp;
  wp.t = {0.0, T};
  wp.x = {from, to};
  return wp;
}

Waypoints random_waypoints(int knots, double T) {
  Waypoints wp;
  for (int i = 0; i < knots; ++i) {
    wp.t.push_back(T * i / (knots - 1));
    wp.x.push_back(test::random_vec3(1.5));
  }
  return wp;
}

double sup_distance(const TrajectoryPlan& a, const TrajectoryPlan& b, int samples = 500) {
  double worst = 0.0;
  const double t0 = a.t_begin(), t1 = a.t_end();
  for (int i = 0; i <= samples; ++i) {
    const double t = t0 + (t1 - t0) * i / samples;
    worst = std::max(worst, (a.eval(t).x - b.eval(t).x).norm());
  }
  return worst;
}

double jerk_energy(const TrajectoryPlan& p, int samples = 4000) {
  double acc = 0.0;
  const double t0 = p.t_begin(), t1 = p.t_end();
  double prev = p.eval(t0).jerk.squaredNorm();
  for (int i = 1; i <= samples; ++i) {
    const double t = t0 + (t1 - t0) * i / samples;
    const double cur = p.eval(t).jerk.squaredNorm();
    acc += 0.5 * ((t1 - t0) / samples) * (prev + cur);
    prev = cur;
  }
  return acc;
}

}  // namespace

TEST_CASE("cubic spline: smoothstep profile for a rest-to-rest pair") {
  const auto plan = cubic_spline(line_rest_to_rest(1.0, Vec3::Zero(), Vec3::UnitX()));
  for (double u : {0.1, 0.25, 0.5, 0.75, 0.9}) {
    const double expect = 3.0 * u * u - 2.0 * u * u * u;
    CHECK(plan.eval(u).x.x() == doctest::Approx(expect).epsilon(1e-12));
  }
  CHECK(plan.eval(0.0).v.norm() <= 1e-12);
  CHECK(plan.eval(1.0).v.norm() <= 1e-12);
}

TEST_CASE("cubic spline reproduces knots sampled from a cubic") {
  // x(t) = p0 + p1 t + p2 t^2 + p3 t^3 per axis, with matching end velocities.
  const Vec3 p0 = test::random_vec3(), p1 = test::random_vec3(), p2 = test::random_vec3(),
             p3 = test::random_vec3();
  auto poly = [&](double t) { return (p0 + p1 * t + p2 * t * t + p3 * t * t * t).eval(); };
  auto dpoly = [&](double t) { return (p1 + 2.0 * p2 * t + 3.0 * p3 * t * t).eval(); };

  Waypoints wp;
  for (int i = 0; i <= 6; ++i) {
    const double t = 0.5 * i;
    wp.t.push_back(t);
    wp.x.push_back(poly(t));
  }
  wp.v_start = dpoly(0.0);
  wp.v_end = dpoly(3.0);

  const auto plan = cubic_spline(wp);
  for (int i = 0; i <= 300; ++i) {
    const double t = 3.0 * i / 300.0;
    CHECK((plan.eval(t).x - poly(t)).norm() <= 1e-12);
  }
}

TEST_CASE("spline continuity at interior knots") {
  for (const double tau : {0.0, 2.5}) {
    const auto wp = random_waypoints(6, 8.0);
    const auto plan = tau == 0.0 ? cubic_spline(wp) : tension_spline(wp, tau);
    for (std::size_t i = 1; i + 1 < wp.t.size(); ++i) {
      const double t = wp.t[i];
      const auto lo = plan.eval(t - 1e-9);
      const auto hi = plan.eval(t + 1e-9);
      CHECK((lo.x - hi.x).norm() <= 1e-8);
      CHECK((lo.v - hi.v).norm() <= 1e-6);
      CHECK((plan.eval(t).x - wp.x[i]).norm() <= 1e-9);
    }
  }
}

TEST_CASE("tension spline: cubic limit and defining ODE") {
  const auto wp = random_waypoints(5, 6.0);

  SUBCASE("tau = 0 falls back to the cubic spline") {
    CHECK(sup_distance(tension_spline(wp, 0.0), cubic_spline(wp)) <= 1e-10);
  }

  SUBCASE("tau = 1e-8 stays within 1e-6 of the cubic") {
    CHECK(sup_distance(tension_spline(wp, 1e-8), cubic_spline(wp)) <= 1e-6);
  }

  SUBCASE("x'''' - tau x'' vanishes pointwise") {
    for (const double tau : {0.5, 4.0, 25.0}) {
      const auto plan = tension_spline(wp, tau);
      CHECK(plan.tension_ode_residual(tau) <= 1e-6);
    }
  }

  SUBCASE("interiors straighten monotonically as tau grows") {
    // Max deviation of the middle segment from its chord.
    Waypoints zig;
    zig.t = {0.0, 1.0, 2.0, 3.0};
    zig.x = {Vec3(0, 0, 0), Vec3(1, 1, 0), Vec3(2, -1, 0), Vec3(3, 0, 0)};
    auto chord_dev = [&](double tau) {
      const auto plan = tension_spline(zig, tau);
      double worst = 0.0;
      for (int i = 1; i < 100; ++i) {
        const double s = i / 100.0;
        const Vec3 chord = (1.0 - s) * zig.x[1] + s * zig.x[2];
        worst = std::max(worst, (plan.eval(1.0 + s).x - chord).norm());
      }
      return worst;
    };
    const double d1 = chord_dev(1.0), d10 = chord_dev(10.0), d100 = chord_dev(100.0);
    CHECK(d10 < d1);
    CHECK(d100 < d10);
  }

  SUBCASE("huge tension stays finite (rescaled basis)") {
    Waypoints wide;
    wide.t = {0.0, 5.0};
    wide.x = {Vec3::Zero(), Vec3::UnitX()};
    const auto plan = tension_spline(wide, 25000.0);  // beta h = 790 > 710
    for (int i = 0; i <= 100; ++i) {
      const auto s = plan.eval(5.0 * i / 100.0);
      CHECK(std::isfinite(s.x.x()));
      CHECK(std::isfinite(s.jerk.x()));
    }
    CHECK((plan.eval(0.0).x - wide.x[0]).norm() <= 1e-9);
    CHECK((plan.eval(5.0).x - wide.x[1]).norm() <= 1e-9);
  }
}

TEST_CASE("tension_from_mass_rate for each leak model") {
  SUBCASE("constant mass has zero tension") {
    const auto r = tension_from_mass_rate(MassModel::constant(), VecX::Constant(1, 5.0), 0.0,
                                          4.0);
    CHECK(r.tau == 0.0);
    CHECK(r.sup_alpha_dot_T == 0.0);
  }

  SUBCASE("viscous leak: alpha = -lambda exactly, tau = lambda^2") {
    VecX th(2);
    th << 5.0, 0.25;
    const auto r = tension_from_mass_rate(MassModel::viscous_leak(), th, 0.0, 6.0);
    CHECK(r.alpha_mean == doctest::Approx(-0.25).epsilon(1e-12));
    CHECK(r.tau == doctest::Approx(0.0625).epsilon(1e-12));
    CHECK(r.sup_alpha_dot_T <= 1e-10);
  }

  SUBCASE("orifice leak: alpha varies, approximation error reported") {
    VecX th(2);
    th << 4.0, 0.04;  // depletes at t = 10
    const auto r = tension_from_mass_rate(MassModel::orifice_leak(), th, 0.0, 5.0);
    CHECK(r.tau > 0.0);
    CHECK(r.sup_alpha_dot_T > 0.0);
    // alpha(t) = -2 sqrt(lambda) / (sqrt(m0) - sqrt(lambda) t)
    const double alpha0 = -2.0 * std::sqrt(th(1)) / std::sqrt(th(0));
    CHECK(r.alpha_mean < alpha0);  // decreasing (more negative) as t grows
  }
}

TEST_CASE("minimum-jerk quintic") {
  SUBCASE("peak velocity of 1 m in 1 s is 1.875 m/s at the midpoint") {
    const auto plan = min_jerk_quintic(line_rest_to_rest(1.0, Vec3::Zero(), Vec3::UnitX()));
    CHECK(plan.eval(0.5).v.x() == doctest::Approx(1.875).epsilon(1e-12));
    double peak = 0.0;
    for (int i = 0; i <= 1000; ++i) peak = std::max(peak, plan.eval(i / 1000.0).v.norm());
    CHECK(peak == doctest::Approx(1.875).epsilon(1e-6));
  }

  SUBCASE("boundary accelerations vanish") {
    const auto plan = min_jerk_quintic(line_rest_to_rest(2.0, Vec3(1, 2, 3), Vec3(-1, 0, 2)));
    CHECK(plan.eval(0.0).a.norm() <= 1e-12);
    CHECK(plan.eval(2.0).a.norm() <= 1e-12);
  }

  SUBCASE("closed-form jerk energies and minimality within the quintic's class") {
    // Rest-to-rest over [0, T]: the quintic (zero boundary accelerations)
    // integrates to 720 d^2/T^5; the clamped cubic, which leaves the
    // boundary accelerations free, integrates to 144 d^2/T^5.
    const Vec3 d(1, 0.5, -0.25);
    const double T = 2.0;
    const auto wp = line_rest_to_rest(T, Vec3::Zero(), d);
    const double scale = d.squaredNorm() / std::pow(T, 5);
    CHECK(jerk_energy(min_jerk_quintic(wp)) ==
          doctest::Approx(720.0 * scale).epsilon(1e-6));
    CHECK(jerk_energy(cubic_spline(wp)) == doctest::Approx(144.0 * scale).epsilon(1e-6));

    // Any admissible perturbation (vanishing value/velocity/acceleration at
    // both ends) can only increase the quintic's jerk energy.
    const auto base = min_jerk_quintic(wp);
    for (double eps : {0.05, -0.03}) {
      double acc = 0.0;
      const int n = 4000;
      double prev = 0.0;
      for (int i = 0; i <= n; ++i) {
        const double t = T * i / n;
        const double u = t / T;
        // bump = u^3 (1-u)^3 vanishes with its first two derivatives at both
        // ends; expanded, its third derivative is 6 - 72u + 180u^2 - 120u^3.
        const double b3 =
            (6.0 - 72.0 * u + 180.0 * u * u - 120.0 * u * u * u) / (T * T * T);
        const double cur = (base.eval(t).jerk + eps * b3 * Vec3::UnitX()).squaredNorm();
        if (i > 0) acc += 0.5 * (T / n) * (prev + cur);
        prev = cur;
      }
      CHECK(acc >= jerk_energy(base) - 1e-9);
    }
  }

  SUBCASE("rejects nonzero boundary velocities and extra knots") {
    Waypoints bad = line_rest_to_rest(1.0, Vec3::Zero(), Vec3::UnitX());
    bad.v_start = Vec3::UnitX();
    CHECK_THROWS_AS(min_jerk_quintic(bad), ValidationError);
    CHECK_THROWS_AS(min_jerk_quintic(random_waypoints(3, 2.0)), ValidationError);
  }
}

TEST_CASE("add_dither") {
  const auto hover = cubic_spline(line_rest_to_rest(10.0, Vec3::Zero(), Vec3::Zero()));

  SUBCASE("zero amplitude leaves the plan unchanged") {
    const auto res = add_dither(hover, Vec3::Zero(), {2.0});
    CHECK(sup_distance(res.plan, hover) == 0.0);
    CHECK(res.pe_after == doctest::Approx(res.pe_before).epsilon(1e-12));
  }

  SUBCASE("single-axis dither raises the excitation integral by a^2 w^4 T / 2") {
    const double a = 0.05, w = 2.0 * M_PI;  // whole periods over the horizon
    const auto res = add_dither(hover, Vec3(a, 0, 0), {w});
    const double T = 10.0;
    const double gain = res.pe_after - res.pe_before;
    CHECK(gain == doctest::Approx(0.5 * a * a * w * w * w * w * T).epsilon(0.02));
    CHECK(res.pe_before == doctest::Approx(kGravity * kGravity * T).epsilon(1e-9));
  }

  SUBCASE("caps reject aggressive dithers") {
    CHECK_THROWS_AS(add_dither(hover, Vec3(0.05, 0, 0), {100.0}), CapExceeded);  // bandwidth
    DitherCaps tight;
    tight.accel = 0.01;
    CHECK_THROWS_AS(add_dither(hover, Vec3(0.05, 0, 0), {5.0}, tight), CapExceeded);
  }
}

TEST_CASE("derivative consistency: finite differences of x converge to v at order 2") {
  const auto wp = random_waypoints(4, 6.0);
  for (const auto& plan : {cubic_spline(wp), tension_spline(wp, 3.0)}) {
    double worst_order = 10.0;
    for (int trial = 0; trial < 50; ++trial) {
      // Interior points away from knots, so the stencil stays in one segment.
      const int seg = static_cast<int>(uniform(0.0, 2.999));
      const double t = 2.0 * seg + uniform(0.4, 1.6);
      auto fd_error = [&](double h) {
        const Vec3 fd = (plan.eval(t + h).x - plan.eval(t - h).x) / (2.0 * h);
        return (fd - plan.eval(t).v).norm();
      };
      const double e1 = fd_error(1e-3);
      const double e2 = fd_error(5e-4);
      if (e1 < 1e-12 || e2 < 1e-12) continue;  // too smooth to measure
      worst_order = std::min(worst_order, std::log2(e1 / e2));
    }
    CHECK(worst_order >= 1.9);
  }
}

TEST_CASE("evaluation clamps outside the knot range") {
  const auto plan = cubic_spline(line_rest_to_rest(2.0, Vec3::Zero(), Vec3::UnitY()));
  const auto before = plan.eval(-1.0);
  CHECK((before.x - Vec3::Zero()).norm() <= 1e-12);
  CHECK(before.v.norm() == 0.0);
  const auto after = plan.eval(5.0);
  CHECK((after.x - Vec3::UnitY()).norm() <= 1e-12);
  CHECK(after.a.norm() == 0.0);
}

TEST_CASE("degenerate waypoints are rejected") {
  Waypoints wp;
  wp.t = {0.0};
  wp.x = {Vec3::Zero()};
  CHECK_THROWS_AS(cubic_spline(wp), DegenerateKnots);

  wp.t = {0.0, 1e-9};
  wp.x = {Vec3::Zero(), Vec3::UnitX()};
  CHECK_THROWS_AS(tension_spline(wp, 1.0), DegenerateKnots);
}

TEST_CASE("plan CSV export writes analytic derivative columns") {
  const auto plan = min_jerk_quintic(line_rest_to_rest(1.0, Vec3::Zero(), Vec3::UnitX()));
  export_plan_csv(plan, "plan_test.csv", 1e-2);
  std::ifstream f("plan_test.csv");
  std::string header;
  std::getline(f, header);
  CHECK(header == "t,x,y,z,vx,vy,vz,ax,ay,az,jx,jy,jz");
  int rows = 0;
  std::string line;
  while (std::getline(f, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == 101);
  std::remove("plan_test.csv");
}
