#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <aqualift/errors.hpp>
#include <aqualift/mass_estimator.hpp>

#include "support.hpp"

#include <cmath>

using namespace aqualift;
using test::random_vec3;
using test::uniform;

namespace {

VecX random_theta(const MassModel& model) {
  VecX th(model.dim());
  th(0) = uniform(1.0, 8.0);       // amplitude-like parameter
  if (model.dim() > 1) th(1) = uniform(0.02, 0.5);  // rate-like parameter
  return th;
}

double cost(const MassModel& model, const VecX& theta, const RegressorSample& s) {
  const double m = model.mass(theta, s.t);
  const double M = model.mass_rate(theta, s.t);
  return 0.5 * (s.thrust_sum - m * s.w - M * s.v).squaredNorm();
}

}  // namespace

TEST_CASE("analytic model gradients match central finite differences") {
  for (const auto& model :
       {MassModel::constant(), MassModel::viscous_leak(), MassModel::orifice_leak()}) {
    for (int trial = 0; trial < 200; ++trial) {
      const VecX th = random_theta(model);
      // Stay clear of the orifice depletion kink.
      const double t_max = model.kind() == MassModelKind::OrificeLeak
                               ? 0.5 * std::sqrt(th(0) / th(model.dim() > 1 ? 1 : 0))
                               : 10.0;
      const double t = uniform(0.0, t_max);
      const VecX gm = model.grad_mass(th, t);
      const VecX gM = model.grad_rate(th, t);
      for (int i = 0; i < model.dim(); ++i) {
        const double h = 1e-6 * std::max(1.0, std::abs(th(i)));
        VecX lo = th, hi = th;
        lo(i) -= h;
        hi(i) += h;
        const double fd_m = (model.mass(hi, t) - model.mass(lo, t)) / (2.0 * h);
        const double fd_M = (model.mass_rate(hi, t) - model.mass_rate(lo, t)) / (2.0 * h);
        CHECK(std::abs(gm(i) - fd_m) <= 1e-6 * std::max(1.0, std::abs(fd_m)));
        CHECK(std::abs(gM(i) - fd_M) <= 1e-6 * std::max(1.0, std::abs(fd_M)));
      }
      // Second time derivative against finite differences of the rate.
      const double h = 1e-6;
      const double fd_acc =
          (model.mass_rate(th, t + h) - model.mass_rate(th, t - h)) / (2.0 * h);
      CHECK(std::abs(model.mass_accel(th, t) - fd_acc) <=
            1e-5 * std::max(1.0, std::abs(fd_acc)));
    }
  }
}

TEST_CASE("orifice model clamps at depletion") {
  const MassModel model = MassModel::orifice_leak();
  VecX th(2);
  th << 4.0, 1.0;  // depletes at t = 2
  CHECK(model.mass(th, 1.9999) > 0.0);
  CHECK(model.mass(th, 2.0) == 0.0);
  CHECK(model.mass(th, 5.0) == 0.0);
  CHECK(model.mass_rate(th, 5.0) == 0.0);
  CHECK(model.grad_mass(th, 5.0).norm() == 0.0);
}

TEST_CASE("regress_step: stationarity, hover rate, matched-theta invariance") {
  SUBCASE("zero residual leaves the estimate unchanged") {
    const MassModel model = MassModel::viscous_leak();
    ParamEstimate est;
    est.theta = random_theta(model);
    est.gamma = VecX::Constant(2, 0.05);
    RegressorSample s;
    s.t = 1.2;
    s.w = Vec3(0.1, -0.2, 9.9);
    s.v = Vec3(0.3, 0.1, -0.2);
    s.thrust_sum =
        model.mass(est.theta, s.t) * s.w + model.mass_rate(est.theta, s.t) * s.v;
    const auto next = regress_step(est, model, s, 1e-3);
    CHECK((next.theta - est.theta).norm() <= 1e-15);
  }

  SUBCASE("hover convergence rate equals gamma g^2") {
    const MassModel model = MassModel::constant();
    const double g = kGravity;
    const double gamma = 0.01;
    const double m_true = 5.0;
    ParamEstimate est;
    est.theta = VecX::Constant(1, 1.5 * m_true);
    est.gamma = VecX::Constant(1, gamma);

    const double dt = 1e-4;
    RegressorSample s;
    s.w = g * Vec3::UnitZ();
    s.thrust_sum = m_true * g * Vec3::UnitZ();
    const double e0 = est.theta(0) - m_true;
    for (int k = 0; k < 30000; ++k) {
      s.t = k * dt;
      est = regress_step(est, model, s, dt);
    }
    const double e3 = est.theta(0) - m_true;
    const double rate = -std::log(e3 / e0) / 3.0;
    CHECK(std::abs(rate - gamma * g * g) <= 0.02 * gamma * g * g);
  }

  SUBCASE("true parameters stay fixed along a disturbance-free trajectory") {
    const MassModel model = MassModel::viscous_leak();
    VecX th(2);
    th << 5.0, 0.1;
    ParamEstimate est;
    est.theta = th;
    est.gamma = VecX::Constant(2, 0.05);
    const double dt = 1e-3;
    for (int k = 0; k < 5000; ++k) {
      const double t = k * dt;
      RegressorSample s;
      s.t = t;
      s.w = Vec3(0.2 * std::sin(t), 0.1 * std::cos(2 * t), kGravity + 0.3 * std::sin(0.7 * t));
      s.v = Vec3(0.3 * std::cos(t), -0.2 * std::sin(0.5 * t), 0.1);
      s.thrust_sum = model.mass(th, t) * s.w + model.mass_rate(th, t) * s.v;
      est = regress_step(est, model, s, dt);
    }
    CHECK((est.theta - th).norm() <= 1e-12);
  }
}

TEST_CASE("constant_mass_update specializes regress_step bit-for-bit") {
  const MassModel model = MassModel::constant();
  for (int trial = 0; trial < 500; ++trial) {
    RegressorSample s;
    s.t = uniform(0.0, 10.0);
    s.w = random_vec3(12.0);
    s.v = random_vec3(2.0);
    s.thrust_sum = random_vec3(60.0);
    const double gamma = uniform(0.001, 0.1);
    const double m0 = uniform(0.5, 9.0);
    const double dt = uniform(1e-4, 1e-2);

    ParamEstimate est;
    est.theta = VecX::Constant(1, m0);
    est.gamma = VecX::Constant(1, gamma);
    const auto next = regress_step(est, model, s, dt);
    const double direct = constant_mass_update(m0, s, gamma, dt);
    CHECK(std::abs(next.theta(0) - direct) <= 1e-15 * std::max(1.0, std::abs(direct)));
  }

  RegressorSample still;
  still.thrust_sum = Vec3(1, 2, 3);
  CHECK(constant_mass_update(4.0, still, 0.1, 1e-3) == 4.0);  // w = 0: no excitation
}

TEST_CASE("projection keeps the mass estimate admissible") {
  const MassModel model = MassModel::constant();
  ParamEstimate est;
  est.theta = VecX::Constant(1, 0.02);
  est.gamma = VecX::Constant(1, 10.0);
  RegressorSample s;
  s.w = kGravity * Vec3::UnitZ();
  s.thrust_sum = Vec3::Zero();  // drives the estimate hard towards zero
  for (int k = 0; k < 100; ++k) {
    s.t = k * 1e-2;
    est = regress_step(est, model, s, 1e-2);
    CHECK(est.mass(model, s.t) >= est.m_min - 1e-15);
  }
}

TEST_CASE("gradient step never increases the frozen-sample cost") {
  for (const auto& model : {MassModel::constant(), MassModel::viscous_leak()}) {
    for (int trial = 0; trial < 100; ++trial) {
      RegressorSample s;
      s.t = uniform(0.0, 5.0);
      s.w = random_vec3(11.0);
      s.v = random_vec3(2.0);
      s.thrust_sum = random_vec3(50.0);
      ParamEstimate est;
      est.theta = random_theta(model);
      est.gamma = VecX::Constant(model.dim(), 1e-4);
      double last = cost(model, est.theta, s);
      for (int k = 0; k < 50; ++k) {
        est = regress_step(est, model, s, 1e-3);
        const double now = cost(model, est.theta, s);
        CHECK(now <= last + 1e-12 * (1.0 + last));
        last = now;
      }
    }
  }
}

TEST_CASE("error dynamics: constant-model reduction and structure") {
  const MassModel model = MassModel::constant();
  ParamEstimate est;
  est.theta = VecX::Constant(1, 6.0);
  est.gamma = VecX::Constant(1, 0.02);
  const VecX th_true = VecX::Constant(1, 5.0);

  RegressorSample s;
  s.t = 0.0;
  s.w = Vec3(0.3, 0.0, 9.81);
  s.v = Vec3(0.4, -0.1, 0.0);
  s.thrust_sum = th_true(0) * s.w;

  const auto ed = error_dynamics_matrices(model, est, th_true, s);
  CHECK(ed.dim == 1);
  CHECK(ed.A(0, 0) == doctest::Approx(0.02 * s.w.squaredNorm()).epsilon(1e-12));
  CHECK(ed.S(0, 1) == 0.0);
  CHECK(ed.xi(0) == doctest::Approx(1.0));
  CHECK(ed.xi(1) == 0.0);
  CHECK(ed.lambda_min() == doctest::Approx(ed.S(0, 0)));
}

TEST_CASE("error dynamics: S22 vanishes at rest and S is the symmetric part") {
  const MassModel model = MassModel::viscous_leak();
  ParamEstimate est;
  est.theta = random_theta(model);
  est.gamma = VecX::Constant(2, 0.03);
  const VecX th_true = random_theta(model);

  RegressorSample s;
  s.t = 1.0;
  s.w = Vec3(0.2, 0.5, 10.0);
  s.v = Vec3::Zero();
  s.thrust_sum = model.mass(th_true, s.t) * s.w;

  const auto ed = error_dynamics_matrices(model, est, th_true, s);
  CHECK(ed.S(1, 1) == 0.0);
  const VecX gm = model.grad_mass(est.theta, s.t);
  const double expect = gm.dot(est.gamma.asDiagonal() * gm) * s.w.squaredNorm();
  CHECK(ed.S(0, 0) == doctest::Approx(expect).epsilon(1e-12));
  CHECK((ed.S - 0.5 * (ed.A + ed.A.transpose())).norm() <= 1e-15);
}

TEST_CASE("error dynamics match finite differences of the running errors") {
  const MassModel model = MassModel::viscous_leak();
  VecX th_true(2);
  th_true << 5.0, 0.12;

  ParamEstimate est;
  est.theta = VecX(2);
  est.theta << 6.5, 0.08;
  est.gamma = VecX(2);
  est.gamma << 0.04, 0.002;

  auto signals = [&](double t) {
    RegressorSample s;
    s.t = t;
    s.w = Vec3(0.5 * std::sin(1.3 * t), 0.3 * std::cos(0.8 * t),
               kGravity + 0.4 * std::sin(0.6 * t));
    s.v = Vec3(0.6 * std::cos(0.9 * t), 0.4 * std::sin(1.1 * t), 0.2 * std::sin(0.5 * t));
    const Vec3 delta_m(0.05 * std::sin(2.1 * t), 0.04 * std::cos(1.7 * t), 0.03);
    s.thrust_sum = model.mass(th_true, t) * s.w + model.mass_rate(th_true, t) * s.v - delta_m;
    return s;
  };

  // Integrate the continuous gradient law with a test-local RK4 so the
  // differenced path carries no first-order discretization bias.
  auto theta_rate = [&](const VecX& theta, double t) {
    const RegressorSample s = signals(t);
    const double m = model.mass(theta, t);
    const double M = model.mass_rate(theta, t);
    const VecX gm = model.grad_mass(theta, t);
    const VecX gM = model.grad_rate(theta, t);
    const Vec3 residual = s.thrust_sum - m * s.w - M * s.v;
    VecX rate(2);
    for (int i = 0; i < 2; ++i) {
      rate(i) = est.gamma(i) * (gm(i) * s.w + gM(i) * s.v).dot(residual);
    }
    return rate;
  };

  const double dt = 1e-4;
  std::vector<VecX> path;
  VecX theta = est.theta;
  double t = 0.0;
  for (int k = 0; k <= 2000; ++k) {
    path.push_back(theta);
    const VecX k1 = theta_rate(theta, t);
    const VecX k2 = theta_rate(theta + 0.5 * dt * k1, t + 0.5 * dt);
    const VecX k3 = theta_rate(theta + 0.5 * dt * k2, t + 0.5 * dt);
    const VecX k4 = theta_rate(theta + dt * k3, t + dt);
    theta += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t += dt;
  }

  auto errors_at = [&](const VecX& th, double tt) {
    return Vec2(model.mass(th, tt) - model.mass(th_true, tt),
                model.mass_rate(th, tt) - model.mass_rate(th_true, tt));
  };

  for (int k = 100; k < 2000; k += 100) {
    const double tk = k * dt;
    const Vec2 fd = (errors_at(path[k + 1], tk + dt) - errors_at(path[k - 1], tk - dt)) /
                    (2.0 * dt);
    ParamEstimate cur = est;
    cur.theta = path[k];
    const auto ed = error_dynamics_matrices(model, cur, th_true, signals(tk));
    const Vec2 analytic = -ed.A * ed.xi + ed.Delta;
    CHECK((fd - analytic).norm() <= 1e-6 * (1.0 + analytic.norm()));
  }
}

TEST_CASE("eiss bound: exact scalar decay and hypothesis rejection") {
  SUBCASE("S = s I with zero disturbance decays exactly") {
    const double s_val = 0.8;
    const double T = 2.0;
    const int n = 400;
    std::vector<EissSample> win(n + 1);
    const Vec2 xi(0.7, -0.4);
    for (int k = 0; k <= n; ++k) {
      const double t = T * k / n;
      win[k].t = t;
      win[k].S = s_val * Mat2::Identity();
      win[k].Delta = Vec2::Zero();
      win[k].xi = std::exp(-s_val * t) * xi;
    }
    const double mu = s_val * T;
    const auto rep = eiss_bound_check(win, mu - 1e-9, mu + 1e-9);
    CHECK(rep.bound_holds);
    CHECK(rep.lhs == doctest::Approx(std::exp(-mu) * xi.norm()).epsilon(1e-9));
    CHECK(rep.int_lambda_min == doctest::Approx(mu).epsilon(1e-12));
  }

  SUBCASE("S = 0 fails the excitation hypothesis") {
    std::vector<EissSample> win(101);
    for (int k = 0; k <= 100; ++k) win[k].t = 0.01 * k;
    CHECK_THROWS_AS(eiss_bound_check(win, 0.5, 10.0), HypothesisUnmet);
  }
}
