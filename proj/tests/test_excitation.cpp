#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <aqualift/errors.hpp>
#include <aqualift/excitation.hpp>

#include "support.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <fstream>

using namespace aqualift;
using test::uniform;

namespace {

std::vector<ExcitationSample> constant_S(const Mat2& S, double T, int n) {
  std::vector<ExcitationSample> out(n + 1);
  for (int k = 0; k <= n; ++k) {
    out[k].t = T * k / n;
    out[k].S = S;
  }
  return out;
}

// Random smooth trajectory as a short trigonometric series per axis.
struct TrigPath {
  Vec3 amp[3];
  double freq[3];
  double phase[3];

  static TrigPath random() {
    TrigPath p;
    for (int i = 0; i < 3; ++i) {
      p.amp[i] = test::random_vec3(0.5);
      p.freq[i] = uniform(0.3, 3.0);
      p.phase[i] = uniform(0.0, 2.0 * M_PI);
    }
    return p;
  }
  TrajSample at(double t) const {
    TrajSample s;
    s.t = t;
    for (int i = 0; i < 3; ++i) {
      const double a = std::sin(p(i, t));
      const double da = freq[i] * std::cos(p(i, t));
      const double dda = -freq[i] * freq[i] * std::sin(p(i, t));
      s.x += amp[i] * a;
      s.v += amp[i] * da;
      s.a += amp[i] * dda;
      s.jerk += amp[i] * (-freq[i] * freq[i] * freq[i]) * std::cos(p(i, t));
    }
    return s;
  }

 private:
  double p(int i, double t) const { return freq[i] * t + phase[i]; }
};

std::vector<TrajSample> sample_path(const TrigPath& p, double T, int n) {
  std::vector<TrajSample> out(n + 1);
  for (int k = 0; k <= n; ++k) out[k] = p.at(T * k / n);
  return out;
}

}  // namespace

TEST_CASE("closed-form lambda_min matches an eigensolver") {
  for (int trial = 0; trial < 2000; ++trial) {
    ExcitationSample s;
    s.S(0, 0) = uniform(-3.0, 5.0);
    s.S(1, 1) = uniform(-3.0, 5.0);
    s.S(0, 1) = s.S(1, 0) = uniform(-4.0, 4.0);
    const Eigen::SelfAdjointEigenSolver<Mat2> es(s.S);
    CHECK(std::abs(s.lambda_min() - es.eigenvalues().minCoeff()) <= 1e-12);
  }
}

TEST_CASE("pe_window_check: identity, null, and sin^2 windows") {
  SUBCASE("S = I over T = 2 meets mu = 1") {
    const auto rep = pe_window_check(constant_S(Mat2::Identity(), 2.0, 200), 1.0, 10.0);
    CHECK(rep.int_lmin == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(rep.pe_ok);
    CHECK(rep.spike_ok);
  }

  SUBCASE("S = 0 fails every positive mu") {
    const auto rep = pe_window_check(constant_S(Mat2::Zero(), 2.0, 150), 1e-9, 10.0);
    CHECK(rep.int_lmin == 0.0);
    CHECK_FALSE(rep.pe_ok);
  }

  SUBCASE("diagonal sin^2 integrates to pi over a period") {
    const int n = 4000;
    std::vector<ExcitationSample> win(n + 1);
    for (int k = 0; k <= n; ++k) {
      const double t = 2.0 * M_PI * k / n;
      win[k].t = t;
      const double s2 = std::sin(t) * std::sin(t);
      win[k].S = s2 * Mat2::Identity();
    }
    const auto rep = pe_window_check(win, 1.0, 100.0);
    CHECK(rep.int_lmin == doctest::Approx(M_PI).epsilon(1e-6));
  }

  SUBCASE("fewer than 100 samples is rejected") {
    CHECK_THROWS_AS(pe_window_check(constant_S(Mat2::Identity(), 1.0, 50), 0.1, 10.0),
                    ValidationError);
  }
}

TEST_CASE("necessary elementwise conditions") {
  SUBCASE("rest trajectory kills the S22 integral") {
    // v = 0: S22 = 0 pointwise, so its integral cannot be positive.
    const int n = 300;
    std::vector<ExcitationSample> win(n + 1);
    for (int k = 0; k <= n; ++k) {
      win[k].t = 2.0 * k / n;
      win[k].S(0, 0) = 3.0;
    }
    const auto v = necessary_elementwise_check(win);
    CHECK(v.s11_ok);
    CHECK_FALSE(v.s22_ok);
  }

  SUBCASE("constant-model reduction leaves only the S11 condition") {
    const int n = 200;
    std::vector<ExcitationSample> win(n + 1);
    for (int k = 0; k <= n; ++k) {
      win[k].t = 1.0 * k / n;
      win[k].dim = 1;
      win[k].S(0, 0) = 0.5 + 0.2 * std::sin(6.0 * win[k].t);
    }
    const auto v = necessary_elementwise_check(win);
    CHECK(v.s11_ok);
    CHECK_FALSE(v.s22_ok);
    CHECK_FALSE(v.det_ok);
  }

  SUBCASE("pointwise indefinite S fails the determinant condition") {
    const int n = 250;
    std::vector<ExcitationSample> win(n + 1);
    for (int k = 0; k <= n; ++k) {
      win[k].t = 1.5 * k / n;
      win[k].S << 1.0, 2.0, 2.0, 1.0;  // S11 S22 - S12^2 = -3 < 0
    }
    const auto v = necessary_elementwise_check(win);
    CHECK(v.s11_ok);
    CHECK(v.s22_ok);
    CHECK_FALSE(v.det_ok);
  }
}

TEST_CASE("diagonal sufficient condition") {
  ExcitationBounds b;
  b.a_lo = 0.5;
  b.a_hi = 1.0;
  b.b_lo = 0.3;
  b.b_hi = 0.8;
  b.c_hi = 0.6;

  SUBCASE("orthogonal v and w pass for any coupling bound") {
    // Horizontal circle: w = a + g e3 is orthogonal to v throughout.
    const int n = 1000;
    std::vector<TrajSample> traj(n + 1);
    for (int k = 0; k <= n; ++k) {
      const double t = 10.0 * k / n;
      traj[k].t = t;
      traj[k].x = Vec3(std::cos(t), std::sin(t), 0.0);
      traj[k].v = Vec3(-std::sin(t), std::cos(t), 0.0);
      traj[k].a = -Vec3(std::cos(t), std::sin(t), 0.0);
    }
    ExcitationBounds huge = b;
    huge.c_hi = 1e6;
    const auto verdict = diag_sufficient_check(traj, huge, 2.0);
    CHECK(verdict.all_ok);

    // Closed form: ||w||^2 = 1 + g^2 and ||v||^2 = 1, both constant.
    const double g2 = kGravity * kGravity;
    CHECK(verdict.windows.front().diag_w_margin ==
          doctest::Approx(huge.a_lo * huge.a_lo * (1.0 + g2) * 2.0).epsilon(1e-9));
    CHECK(verdict.windows.front().diag_v_margin ==
          doctest::Approx(huge.b_lo * huge.b_lo * 2.0).epsilon(1e-9));
  }

  SUBCASE("collinear v and w with a large coupling bound fail") {
    const int n = 600;
    std::vector<TrajSample> traj(n + 1);
    for (int k = 0; k <= n; ++k) {
      const double t = 6.0 * k / n;
      traj[k].t = t;
      traj[k].v = Vec3(0, 0, std::sin(t));
      traj[k].a = Vec3(0, 0, std::cos(t) - kGravity);  // w = (0,0,cos t), parallel to v
    }
    ExcitationBounds strong = b;
    strong.c_hi = 50.0;
    const auto verdict = diag_sufficient_check(traj, strong, 2.0);
    CHECK_FALSE(verdict.all_ok);
  }

  SUBCASE("shrinking the coupling bound can only turn fail into pass") {
    for (int trial = 0; trial < 50; ++trial) {
      const auto traj = sample_path(TrigPath::random(), 8.0, 800);
      ExcitationBounds loose = b;
      loose.c_hi = 0.05;
      const auto strict = diag_sufficient_check(traj, b, 2.0);
      const auto relaxed = diag_sufficient_check(traj, loose, 2.0);
      for (std::size_t i = 0; i < strict.windows.size(); ++i) {
        if (strict.windows[i].diag_w_ok) CHECK(relaxed.windows[i].diag_w_ok);
        if (strict.windows[i].diag_v_ok) CHECK(relaxed.windows[i].diag_v_ok);
      }
    }
  }
}

TEST_CASE("energy drift condition") {
  ExcitationBounds b;
  b.a_lo = 0.4;
  b.a_hi = 1.0;
  b.b_lo = 0.4;
  b.b_hi = 1.0;
  b.c_hi = 1.0;

  SUBCASE("level uniform motion has zero drift and passes") {
    const int n = 800;
    std::vector<TrajSample> traj(n + 1);
    for (int k = 0; k <= n; ++k) {
      const double t = 8.0 * k / n;
      traj[k].t = t;
      traj[k].x = Vec3(t, 0.0, 0.0);
      traj[k].v = Vec3::UnitX();
    }
    const auto verdict = energy_drift_check(traj, b, 2.0);
    CHECK(verdict.all_ok);
  }

  SUBCASE("free fall has w = 0 and fails the strict inequality") {
    const int n = 400;
    std::vector<TrajSample> traj(n + 1);
    for (int k = 0; k <= n; ++k) {
      const double t = 4.0 * k / n;
      traj[k].t = t;
      traj[k].x = Vec3(0, 0, -0.5 * kGravity * t * t);
      traj[k].v = Vec3(0, 0, -kGravity * t);
      traj[k].a = Vec3(0, 0, -kGravity);
    }
    const auto verdict = energy_drift_check(traj, b, 1.0);
    CHECK_FALSE(verdict.all_ok);
  }

  SUBCASE("drift never exceeds the integral of |w.v| (identity check)") {
    for (int trial = 0; trial < 1000; ++trial) {
      const TrigPath path = TrigPath::random();
      const int n = 400;
      const double T = 4.0;
      double int_wv = 0.0;
      double prev = 0.0;
      for (int k = 0; k <= n; ++k) {
        const auto s = path.at(T * k / n);
        const double f = std::abs(s.w().dot(s.v));
        if (k > 0) int_wv += 0.5 * (T / n) * (prev + f);
        prev = f;
      }
      const auto s0 = path.at(0.0);
      const auto s1 = path.at(T);
      auto H = [](const TrajSample& s) {
        return 0.5 * s.v.squaredNorm() + kGravity * s.x.z();
      };
      // Trapezoid error is O(h^2); allow it on top of the exact inequality.
      CHECK(std::abs(H(s1) - H(s0)) <= int_wv + 1e-3);
    }
  }
}

TEST_CASE("constant-mass excitation windows") {
  SUBCASE("hover integrates g^2 T") {
    const int n = 1500;
    std::vector<TrajSample> traj(n + 1);
    for (int k = 0; k <= n; ++k) traj[k].t = 6.0 * k / n;
    const double T = 2.0;
    const auto verdict = constant_mass_pe(traj, 5.0, T);
    CHECK(verdict.all_ok);
    CHECK(verdict.worst_margin == doctest::Approx(kGravity * kGravity * T).epsilon(1e-6));
  }

  SUBCASE("free fall yields zero excitation") {
    const int n = 500;
    std::vector<TrajSample> traj(n + 1);
    for (int k = 0; k <= n; ++k) {
      traj[k].t = 5.0 * k / n;
      traj[k].a = Vec3(0, 0, -kGravity);
    }
    const auto verdict = constant_mass_pe(traj, 1e-6, 2.0);
    CHECK_FALSE(verdict.all_ok);
    CHECK(verdict.worst_margin == 0.0);
  }

  SUBCASE("raising mu can only turn pass into fail") {
    for (int trial = 0; trial < 50; ++trial) {
      const auto traj = sample_path(TrigPath::random(), 8.0, 800);
      const auto low = constant_mass_pe(traj, 10.0, 2.0);
      const auto high = constant_mass_pe(traj, 50.0, 2.0);
      for (std::size_t i = 0; i < low.windows.size(); ++i) {
        if (high.windows[i].constant_pe_ok) CHECK(low.windows[i].constant_pe_ok);
      }
    }
  }
}

TEST_CASE("hydrostatic validity diagnostic") {
  SUBCASE("static hover is clean") {
    std::vector<TrajSample> traj(101);
    for (int k = 0; k <= 100; ++k) traj[k].t = 0.1 * k;
    const auto rep = hydrostatic_validity(traj, 0.5);
    CHECK(rep.ok);
    CHECK(rep.eps_peak == 0.0);
  }

  SUBCASE("half-gravity acceleration is flagged") {
    std::vector<TrajSample> traj(101);
    for (int k = 0; k <= 100; ++k) {
      traj[k].t = 0.1 * k;
      traj[k].a = Vec3(0.5 * kGravity, 0, 0);
    }
    const auto rep = hydrostatic_validity(traj, 0.5);
    CHECK_FALSE(rep.ok);
    CHECK(rep.eps_peak >= 0.5);
  }

  SUBCASE("quintic rest-to-rest peak jerk matches the closed form") {
    // 1 m in 5 s: jerk(t) = (d/T^3)(60 - 360 u + 360 u^2), peak 60 d / T^3 at the ends.
    const double D = 5.0;
    const int n = 5000;
    std::vector<TrajSample> traj(n + 1);
    for (int k = 0; k <= n; ++k) {
      const double t = D * k / n;
      const double u = t / D;
      traj[k].t = t;
      traj[k].jerk = Vec3((60.0 - 360.0 * u + 360.0 * u * u) / (D * D * D), 0, 0);
    }
    const auto rep = hydrostatic_validity(traj, 0.5);
    CHECK(rep.jerk_peak == doctest::Approx(60.0 / 125.0).epsilon(1e-9));
    CHECK(rep.ok);  // 0.48 m/s^3 < 2 m/s^3 default
  }
}

TEST_CASE("concavity: integral of lambda_min bounds lambda_min of the integral") {
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 200;
    const double T = 2.0;
    std::vector<ExcitationSample> win(n + 1);
    const double w1 = uniform(0.5, 3.0), w2 = uniform(0.5, 3.0), w3 = uniform(0.2, 2.0);
    Mat2 avg = Mat2::Zero();
    for (int k = 0; k <= n; ++k) {
      const double t = T * k / n;
      win[k].t = t;
      Eigen::Vector2d d(1.0 + std::sin(w1 * t), 1.2 + std::cos(w2 * t));
      Eigen::Matrix2d Q;
      const double th = w3 * t;
      Q << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
      win[k].S = Q * d.asDiagonal() * Q.transpose();
    }
    for (int k = 0; k < n; ++k) {
      avg += 0.5 * (T / n) * (win[k].S + win[k + 1].S);
    }
    const auto rep = pe_window_check(win, 0.0, 1e9);
    const Eigen::SelfAdjointEigenSolver<Mat2> es(avg);
    CHECK(rep.int_lmin <= es.eigenvalues().minCoeff() + 1e-9);
  }
}

TEST_CASE("bounds_from_model samples the declared parameter box") {
  const MassModel model = MassModel::viscous_leak();
  VecX lo(2), hi(2), gamma(2);
  lo << 2.0, 0.05;
  hi << 8.0, 0.3;
  gamma << 0.04, 0.002;
  const auto b = ExcitationBounds::from_model(model, lo, hi, gamma, 15.0);
  CHECK(b.a_lo > 0.0);
  CHECK(b.a_lo <= b.a_hi);
  CHECK(b.b_lo <= b.b_hi);
  CHECK(b.c_hi > 0.0);
  b.validate();

  ExcitationBounds bad;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("window-report CSV round trip of the verdict columns") {
  std::vector<TrajSample> traj(3001);
  for (int k = 0; k <= 3000; ++k) {
    const double t = 6.0 * k / 3000.0;
    traj[k].t = t;
    traj[k].a = Vec3(0.2 * std::sin(t), 0, 0);
  }
  std::vector<ExcitationSample> S(traj.size());
  for (std::size_t i = 0; i < S.size(); ++i) {
    S[i].t = traj[i].t;
    S[i].dim = 1;
    S[i].S(0, 0) = traj[i].w().squaredNorm();
  }
  const auto rows = sliding_window_report(traj, S, nullptr, 2.0, 5.0, 1e6, 0.5);
  REQUIRE(!rows.empty());
  write_window_report_csv("window_report_test.csv", rows);

  std::ifstream f("window_report_test.csv");
  std::string header;
  std::getline(f, header);
  CHECK(header.rfind("t_start,int_lmin,int_lmin_pos,S11_int,S22_int,det_int,H_drift,", 0) == 0);
  int count = 0;
  std::string line;
  while (std::getline(f, line)) {
    if (!line.empty()) ++count;
  }
  CHECK(count == static_cast<int>(rows.size()));
  std::remove("window_report_test.csv");
}
