#include <aqualift/inertia_lut.hpp>

#include <aqualift/errors.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <thread>

namespace aqualift {

FillLevel fill_level(double m_hat, const TankGeometry& tank) {
  if (m_hat < tank.empty_mass() * (1.0 - 1e-3)) {
    throw MassBelowEmpty("fill_level: estimated mass " + std::to_string(m_hat) +
                         " kg is below the empty-tank mass");
  }
  const double raw = (m_hat - tank.empty_mass()) / (tank.density() * tank.volume());
  FillLevel out;
  out.sigma = std::clamp(raw, 0.0, 1.0);
  out.clamp_warning = raw < -0.01 || raw > 1.01;
  return out;
}

FluidConfig solve_plane_offset(const VoxelizedTank& vox, double sigma, const Vec3& g_dir) {
  if (sigma < 0.0 || sigma > 1.0) {
    throw ValidationError("solve_plane_offset: sigma must lie in [0, 1]");
  }
  FluidConfig cfg;
  cfg.sigma = sigma;
  cfg.g_dir = g_dir.normalized();
  const Vec3 up = -cfg.g_dir;
  const auto [lo, hi] = vox.support(up);

  if (sigma <= 0.0) {
    cfg.h_star = lo - vox.voxel_size();
    cfg.fluid_volume = 0.0;
    return cfg;
  }
  if (sigma >= 1.0) {
    cfg.h_star = hi + vox.voxel_size();
    cfg.fluid_volume = vox.quad_volume();
    return cfg;
  }

  const double target = sigma * vox.quad_volume();
  double a = lo - vox.voxel_size();
  double b = hi + vox.voxel_size();
  double mid = 0.5 * (a + b);
  for (int it = 0; it < 60; ++it) {
    mid = 0.5 * (a + b);
    if (vox.cut_volume(up, mid) < target) {
      a = mid;
    } else {
      b = mid;
    }
  }
  cfg.h_star = 0.5 * (a + b);
  cfg.fluid_volume = target;
  cfg.volume_residual = std::abs(vox.cut_volume(up, cfg.h_star) - target);
  return cfg;
}

FluidMoments fluid_moments(const VoxelizedTank& vox, const FluidConfig& config) {
  const CutMoments cm = config.sigma >= 1.0
                            ? vox.full()
                            : vox.cut(-config.g_dir.normalized(), config.h_star);
  FluidMoments out;
  out.volume = cm.volume;
  out.centroid = cm.centroid();
  out.J_about_O = vox.tank().density() * cm.inertia_integral();
  return out;
}

LoadInertia load_inertia(const VoxelizedTank& vox, const FluidConfig& config, double m_hat) {
  const double m_T = vox.tank().empty_mass();
  const CutMoments& whole = vox.full();

  // Tank contribution: m_T spread uniformly over the whole cavity.
  const double rho_tank = m_T / whole.volume;
  const Mat3 J_tank = rho_tank * whole.inertia_integral();
  const Vec3 c_tank = whole.centroid();

  LoadInertia out;
  const double m_fluid = m_hat - m_T;
  if (config.sigma <= 0.0 || m_fluid <= 0.0) {
    out.O_cm = c_tank;
    out.J = J_tank - m_T * (c_tank.squaredNorm() * Mat3::Identity() - c_tank * c_tank.transpose());
    return out;
  }

  const CutMoments cm = config.sigma >= 1.0 ? whole : vox.cut(-config.g_dir.normalized(),
                                                              config.h_star);
  const double rho_fluid = m_fluid / cm.volume;  // quadrature-mass normalization
  const Mat3 J_fluid = rho_fluid * cm.inertia_integral();
  const Vec3 c_fluid = cm.centroid();

  out.O_cm = (m_T / m_hat) * c_tank + (m_fluid / m_hat) * c_fluid;
  out.J = J_tank + J_fluid -
          m_hat * (out.O_cm.squaredNorm() * Mat3::Identity() - out.O_cm * out.O_cm.transpose());
  return out;
}

FluidConfig solve_plane_offset(const TankGeometry& tank, double sigma, const Vec3& g_dir,
                               int resolution) {
  return solve_plane_offset(VoxelizedTank(tank, resolution), sigma, g_dir);
}

FluidMoments fluid_moments(const TankGeometry& tank, const FluidConfig& config,
                           int resolution) {
  return fluid_moments(VoxelizedTank(tank, resolution), config);
}

LoadInertia load_inertia(const TankGeometry& tank, const FluidConfig& config, double m_hat,
                         int resolution) {
  return load_inertia(VoxelizedTank(tank, resolution), config, m_hat);
}

Mat3 InertiaLut::node_inertia(int is, int it, int ip) const {
  const double* d = data.data() + node_index(is, it, ip);
  Mat3 J;
  J << d[0], d[1], d[2],
       d[1], d[3], d[4],
       d[2], d[4], d[5];
  return J;
}

Vec3 InertiaLut::node_cm(int is, int it, int ip) const {
  const double* d = data.data() + node_index(is, it, ip);
  return Vec3(d[6], d[7], d[8]);
}

Vec3 InertiaLut::g_dir_at(int it, int ip) const {
  const double theta = M_PI * it / (n_theta - 1);
  const double phi = 2.0 * M_PI * ip / n_phi;
  return Vec3(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
              std::cos(theta));
}

namespace {

void store_node(InertiaLut& lut, int is, int it, int ip, const LoadInertia& li) {
  double* d = lut.data.data() + lut.node_index(is, it, ip);
  d[0] = li.J(0, 0);
  d[1] = li.J(0, 1);
  d[2] = li.J(0, 2);
  d[3] = li.J(1, 1);
  d[4] = li.J(1, 2);
  d[5] = li.J(2, 2);
  d[6] = li.O_cm.x();
  d[7] = li.O_cm.y();
  d[8] = li.O_cm.z();
}

}  // namespace

InertiaLut build_lut(const TankGeometry& tank, int n_sigma, int n_theta, int n_phi,
                     int resolution, int threads) {
  if (n_sigma < 2 || n_theta < 2 || n_phi < 2) {
    throw ValidationError("build_lut: every grid dimension must be >= 2");
  }
  const VoxelizedTank vox(tank, resolution);

  InertiaLut lut;
  lut.n_sigma = n_sigma;
  lut.n_theta = n_theta;
  lut.n_phi = n_phi;
  lut.m_T = tank.empty_mass();
  lut.rho = tank.density();
  lut.V_T = tank.volume();
  lut.tank_hash = tank.hash();
  lut.data.assign(static_cast<std::size_t>(n_sigma) * n_theta * n_phi * 9, 0.0);

  // sigma = 0 and sigma = 1 slices are orientation independent: evaluate the
  // canonical result once and replicate it bit-exactly.
  {
    FluidConfig empty;
    empty.sigma = 0.0;
    const LoadInertia li0 = load_inertia(vox, empty, tank.empty_mass());
    FluidConfig fullc;
    fullc.sigma = 1.0;
    const double m_full = tank.empty_mass() + tank.density() * tank.volume();
    const LoadInertia li1 = load_inertia(vox, fullc, m_full);
    for (int it = 0; it < n_theta; ++it) {
      for (int ip = 0; ip < n_phi; ++ip) {
        store_node(lut, 0, it, ip, li0);
        store_node(lut, n_sigma - 1, it, ip, li1);
      }
    }
  }

  // Interior sigma values over all distinct directions. Poles give one
  // direction regardless of phi: computed at ip = 0 and copied.
  struct Job {
    int it, ip;
  };
  std::vector<Job> jobs;
  for (int it = 0; it < n_theta; ++it) {
    const bool pole = it == 0 || it == n_theta - 1;
    for (int ip = 0; ip < (pole ? 1 : n_phi); ++ip) jobs.push_back({it, ip});
  }

  std::vector<double> residuals(jobs.size(), 0.0);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t w = next.fetch_add(1);
      if (w >= jobs.size()) break;
      const auto [it, ip] = jobs[w];
      const Vec3 g_dir = lut.g_dir_at(it, ip);
      double worst = 0.0;
      for (int is = 1; is + 1 < n_sigma; ++is) {
        const double sigma = lut.sigma_at(is);
        const FluidConfig cfg = solve_plane_offset(vox, sigma, g_dir);
        worst = std::max(worst, cfg.volume_residual);
        const double m_hat = tank.empty_mass() + sigma * tank.density() * tank.volume();
        const LoadInertia li = load_inertia(vox, cfg, m_hat);
        store_node(lut, is, it, ip, li);
      }
      residuals[w] = worst;
    }
  };

  int n_threads = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  n_threads = std::max(1, std::min<int>(n_threads, static_cast<int>(jobs.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (double r : residuals) lut.max_volume_residual = std::max(lut.max_volume_residual, r);

  // Replicate pole rows across phi.
  for (int is = 1; is + 1 < n_sigma; ++is) {
    for (int it : {0, n_theta - 1}) {
      for (int ip = 1; ip < n_phi; ++ip) {
        std::memcpy(lut.data.data() + lut.node_index(is, it, ip),
                    lut.data.data() + lut.node_index(is, it, 0), 9 * sizeof(double));
      }
    }
  }
  return lut;
}

void save_lut(const InertiaLut& lut, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("save_lut: cannot open " + path);
  f.write("ALUT", 4);
  const std::uint32_t header[4] = {1u, lut.n_sigma, lut.n_theta, lut.n_phi};
  f.write(reinterpret_cast<const char*>(header), sizeof(header));
  const double scalars[3] = {lut.m_T, lut.rho, lut.V_T};
  f.write(reinterpret_cast<const char*>(scalars), sizeof(scalars));
  f.write(reinterpret_cast<const char*>(lut.tank_hash.data()), 32);
  f.write(reinterpret_cast<const char*>(lut.data.data()),
          static_cast<std::streamsize>(lut.data.size() * sizeof(double)));
  if (!f) throw ValidationError("save_lut: write failed for " + path);
}

InertiaLut load_lut(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("load_lut: cannot open " + path);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, "ALUT", 4) != 0) {
    throw ParseError("load_lut: bad magic in " + path);
  }
  std::uint32_t header[4];
  f.read(reinterpret_cast<char*>(header), sizeof(header));
  if (!f || header[0] != 1u) throw ParseError("load_lut: unsupported version");

  InertiaLut lut;
  lut.n_sigma = header[1];
  lut.n_theta = header[2];
  lut.n_phi = header[3];
  if (lut.n_sigma < 2 || lut.n_theta < 2 || lut.n_phi < 2) {
    throw ParseError("load_lut: degenerate grid dimensions");
  }
  double scalars[3];
  f.read(reinterpret_cast<char*>(scalars), sizeof(scalars));
  lut.m_T = scalars[0];
  lut.rho = scalars[1];
  lut.V_T = scalars[2];
  f.read(reinterpret_cast<char*>(lut.tank_hash.data()), 32);
  lut.data.resize(static_cast<std::size_t>(lut.n_sigma) * lut.n_theta * lut.n_phi * 9);
  f.read(reinterpret_cast<char*>(lut.data.data()),
         static_cast<std::streamsize>(lut.data.size() * sizeof(double)));
  if (!f) throw ParseError("load_lut: truncated file " + path);
  return lut;
}

LutQuery query(const InertiaLut& lut, double m_hat, const Rotation& R_L) {
  if (m_hat < lut.m_T * (1.0 - 1e-3)) {
    throw MassBelowEmpty("query: estimated mass below the empty-tank mass");
  }
  const double raw = (m_hat - lut.m_T) / (lut.rho * lut.V_T);
  LutQuery out;
  out.sigma = std::clamp(raw, 0.0, 1.0);
  out.clamp_warning = raw < -0.01 || raw > 1.01;

  const Vec3 g_dir = (-(R_L.m.transpose() * Vec3::UnitZ())).normalized();
  const double theta = std::acos(std::clamp(g_dir.z(), -1.0, 1.0));
  double phi = std::atan2(g_dir.y(), g_dir.x());
  if (phi < 0.0) phi += 2.0 * M_PI;

  const double fs = out.sigma * (lut.n_sigma - 1);
  const double ft = theta / M_PI * (lut.n_theta - 1);
  const double fp = phi / (2.0 * M_PI) * lut.n_phi;

  const int is0 = std::min<int>(static_cast<int>(fs), lut.n_sigma - 2);
  const int it0 = std::min<int>(static_cast<int>(ft), lut.n_theta - 2);
  const int ip0 = std::min<int>(static_cast<int>(fp), lut.n_phi - 1);
  const int ip1 = (ip0 + 1) % lut.n_phi;  // azimuthal wrap-around
  const double ws = fs - is0;
  const double wt = ft - it0;
  const double wp = fp - ip0;

  double acc[9] = {0, 0, 0, 0, 0, 0, 0, 0, 0};
  for (int ds = 0; ds < 2; ++ds) {
    for (int dt = 0; dt < 2; ++dt) {
      for (int dp = 0; dp < 2; ++dp) {
        const double w = (ds ? ws : 1.0 - ws) * (dt ? wt : 1.0 - wt) * (dp ? wp : 1.0 - wp);
        if (w == 0.0) continue;
        const double* d =
            lut.data.data() + lut.node_index(is0 + ds, it0 + dt, dp ? ip1 : ip0);
        for (int c = 0; c < 9; ++c) acc[c] += w * d[c];
      }
    }
  }

  out.J << acc[0], acc[1], acc[2],
           acc[1], acc[3], acc[4],
           acc[2], acc[4], acc[5];
  out.O_cm = Vec3(acc[6], acc[7], acc[8]);
  return out;
}

InertiaRateTracker::Result InertiaRateTracker::update(const InertiaLut& lut, double m_hat,
                                                      const Rotation& R_L, double t) {
  const LutQuery q = query(lut, m_hat, R_L);
  Result out;
  out.J = q.J;
  out.O_cm = q.O_cm;
  if (primed_ && t > t_last_) {
    out.Jdot = (q.J - J_last_) / (t - t_last_);
  }
  primed_ = true;
  t_last_ = t;
  J_last_ = q.J;
  return out;
}

}  // namespace aqualift
