#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <aqualift/errors.hpp>
#include <aqualift/manifold.hpp>

#include "support.hpp"

using namespace aqualift;
using test::random_vec3;

TEST_CASE("hat: zero and unit cases") {
  CHECK(hat(Vec3::Zero()).norm() == 0.0);

  Mat3 expect;
  expect << 0, 0, 0,
            0, 0, -1,
            0, 1, 0;
  CHECK((hat(Vec3::UnitX()) - expect).norm() == 0.0);
}

TEST_CASE("hat matches the componentwise cross product") {
  for (int i = 0; i < 1000; ++i) {
    const Vec3 v = random_vec3(10.0);
    const Vec3 w = random_vec3(10.0);
    CHECK((hat(v) * w - v.cross(w)).norm() <= 1e-15 * std::max(1.0, v.norm() * w.norm()));
    CHECK((hat(v) + hat(v).transpose()).norm() == 0.0);
  }
}

TEST_CASE("vee: inverse of hat, zero case, precondition") {
  CHECK(vee(Mat3::Zero()).norm() == 0.0);
  const Vec3 v(1, 2, 3);
  CHECK((vee(hat(v)) - v).norm() == 0.0);

  Mat3 bad = hat(v);
  bad(0, 1) += 1e-3;  // symmetric perturbation
  bad(1, 0) += 1e-3;
  CHECK_THROWS_AS(vee(bad), NonSkew);
}

TEST_CASE("hat/vee mutually inverse on skew matrices") {
  for (int i = 0; i < 1000; ++i) {
    const Vec3 v = random_vec3(5.0);
    const Mat3 m = hat(v);
    CHECK((hat(vee(m)) - m).norm() <= 1e-15);
  }
}

TEST_CASE("exp_rotation: identity, quarter turn, inverse") {
  CHECK((exp_rotation(Vec3::Zero()).m - Mat3::Identity()).norm() == 0.0);

  const Rotation Rz = exp_rotation(Vec3(0, 0, M_PI_2));
  CHECK((Rz * Vec3::UnitX() - Vec3::UnitY()).norm() <= 1e-15);

  for (int i = 0; i < 200; ++i) {
    const Vec3 w = random_vec3(2.0 * M_PI);
    const Mat3 prod = exp_rotation(w).m * exp_rotation(-w).m;
    CHECK((prod - Mat3::Identity()).norm() <= 1e-12);
  }
}

TEST_CASE("exp_rotation: series branch continuity near zero") {
  for (double mag : {1e-12, 1e-10, 1e-9}) {
    const Vec3 w = mag * Vec3(0.3, -0.5, 0.8).normalized();
    const Mat3 linear = Mat3::Identity() + hat(w);
    CHECK((exp_rotation(w).m - linear).cwiseAbs().maxCoeff() <= 1e-18);
  }
}

TEST_CASE("integrate_attitude: identity, exact constant rotation, composition") {
  const Rotation I;
  CHECK((integrate_attitude(I, Vec3::Zero(), 1e-3).m - Mat3::Identity()).norm() <= 1e-15);

  const Rotation quarter = integrate_attitude(I, Vec3(0, 0, 1), M_PI_2);
  CHECK((quarter * Vec3::UnitX() - Vec3::UnitY()).norm() <= 1e-12);

  for (int i = 0; i < 100; ++i) {
    const Vec3 Om = random_vec3(3.0);
    const double dt = test::uniform(1e-4, 0.5);
    const Rotation full = integrate_attitude(I, Om, dt);
    const Rotation halves = integrate_attitude(integrate_attitude(I, Om, dt / 2), Om, dt / 2);
    CHECK((full.m - halves.m).norm() <= 1e-12);
  }
}

TEST_CASE("integrate_sphere: fixed point, quarter turn, norm preservation") {
  UnitVector e3u;
  e3u.v = Vec3::UnitZ();
  CHECK((integrate_sphere(e3u, Vec3::Zero(), 0.1).v - Vec3::UnitZ()).norm() == 0.0);

  const UnitVector rolled = integrate_sphere(e3u, Vec3(0, M_PI_2, 0), 1.0);
  CHECK((rolled.v - Vec3::UnitX()).norm() <= 1e-12);

  UnitVector q = test::random_unit();
  for (int i = 0; i < 100000; ++i) {
    q = integrate_sphere(q, random_vec3(2.0), 1e-3);
    if (i % 10000 == 0) CHECK(q.norm_error() <= 1e-15);
  }
  CHECK(q.norm_error() <= 1e-15);
}

TEST_CASE("typed outputs keep their invariants under random inputs") {
  for (int i = 0; i < 10000; ++i) {
    const Rotation R = integrate_attitude(test::random_rotation(), random_vec3(10.0),
                                          test::uniform(1e-5, 0.05));
    CHECK(R.valid(1e-9));
    const UnitVector q = integrate_sphere(test::random_unit(), random_vec3(10.0),
                                          test::uniform(1e-5, 0.05));
    CHECK(q.norm_error() <= 1e-12);
  }
}

TEST_CASE("Rotation::project recovers a rotation from a drifted matrix") {
  for (int i = 0; i < 200; ++i) {
    Mat3 drifted = test::random_rotation().m;
    drifted += 1e-6 * Mat3::Random();
    const Rotation R = Rotation::project(drifted);
    CHECK(R.orthonormality_error() <= 1e-12);
    CHECK((R.m - drifted).norm() <= 1e-5);
  }
}
