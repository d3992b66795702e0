#pragma once

#include <aqualift/manifold.hpp>
#include <aqualift/tank.hpp>
#include <aqualift/types.hpp>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace aqualift {

struct FillLevel {
  double sigma = 0.0;
  bool clamp_warning = false;  // raw value left [0,1] by more than 1%
};

/// sigma = (m_hat - m_T) / (rho V_T), clamped to [0, 1].
/// Throws MassBelowEmpty when m_hat < m_T (1 - 1e-3).
FillLevel fill_level(double m_hat, const TankGeometry& tank);

/// Fluid region descriptor: the cavity below the plane up . x = h, where
/// up = -g_dir is the body-frame "up" direction (g_dir = -R_L^T e3 is the
/// body-frame gravity direction).
struct FluidConfig {
  double sigma = 0.0;
  Vec3 g_dir = -Vec3::UnitZ();
  double h_star = 0.0;
  double fluid_volume = 0.0;     // sigma * (quadrature cavity volume)
  double volume_residual = 0.0;  // |Vol(F_h*) - target|
};

/// Bisection for the plane offset such that the cut volume matches
/// sigma * V_quad. The cut-volume function is continuous and monotone in h,
/// so the bracket always converges; 60 halvings take it far below any
/// geometric tolerance. sigma = 0 and 1 short-circuit to the support bounds.
FluidConfig solve_plane_offset(const VoxelizedTank& vox, double sigma, const Vec3& g_dir);

struct FluidMoments {
  double volume = 0.0;
  Vec3 centroid = Vec3::Zero();
  Mat3 J_about_O = Mat3::Zero();  // rho * int_F (||x||^2 I - x x^T) dV
};

/// Fluid inertia about the tank reference point under the flat-surface model.
FluidMoments fluid_moments(const VoxelizedTank& vox, const FluidConfig& config);

struct LoadInertia {
  Mat3 J = Mat3::Zero();      // about the combined center of mass
  Vec3 O_cm = Vec3::Zero();   // center of mass in the body frame
};

/// Tank + fluid inertia about the combined center of mass (parallel-axis
/// shift from O). Tank mass is spread uniformly over the cavity; component
/// densities are normalized so the quadrature masses match m_T and
/// m_hat - m_T exactly.
LoadInertia load_inertia(const VoxelizedTank& vox, const FluidConfig& config, double m_hat);

/// Convenience overloads that voxelize on the fly.
FluidConfig solve_plane_offset(const TankGeometry& tank, double sigma, const Vec3& g_dir,
                               int resolution = 128);
FluidMoments fluid_moments(const TankGeometry& tank, const FluidConfig& config,
                           int resolution = 128);
LoadInertia load_inertia(const TankGeometry& tank, const FluidConfig& config, double m_hat,
                         int resolution = 128);

/// Precomputed inertia over a (fill level) x (gravity direction) grid.
/// Gravity directions are sampled on a latitude-longitude grid of the unit
/// sphere: theta in [0, pi] (n_theta rows, poles duplicated across phi) and
/// phi in [0, 2 pi) (n_phi columns, wrap-around interpolation).
struct InertiaLut {
  std::uint32_t n_sigma = 0, n_theta = 0, n_phi = 0;
  double m_T = 0.0, rho = 0.0, V_T = 0.0;
  std::array<std::uint8_t, 32> tank_hash{};
  std::vector<double> data;  // 9 doubles per node: J upper triangle + O_cm

  double max_volume_residual = 0.0;  // build diagnostic, not serialized

  std::size_t node_index(int is, int it, int ip) const {
    return ((static_cast<std::size_t>(is) * n_theta + it) * n_phi + ip) * 9;
  }
  Mat3 node_inertia(int is, int it, int ip) const;
  Vec3 node_cm(int is, int it, int ip) const;

  double sigma_at(int is) const { return static_cast<double>(is) / (n_sigma - 1); }
  Vec3 g_dir_at(int it, int ip) const;
};

/// Evaluates load_inertia on every grid node. Deterministic regardless of
/// thread count (each node owns its output slot); threads = 0 uses the
/// hardware concurrency.
InertiaLut build_lut(const TankGeometry& tank, int n_sigma = 21, int n_theta = 13,
                     int n_phi = 24, int resolution = 128, int threads = 0);

/// Binary format: magic "ALUT", u32 version=1, u32 n_sigma, u32 n_theta,
/// u32 n_phi, f64 m_T, f64 rho, f64 V_T, 32-byte tank hash, then row-major
/// (sigma outer, theta, phi inner) records of 6 f64 (upper-triangular J,
/// order xx, xy, xz, yy, yz, zz) + 3 f64 (O_cm), little-endian.
void save_lut(const InertiaLut& lut, const std::string& path);
InertiaLut load_lut(const std::string& path);

struct LutQuery {
  Mat3 J = Mat3::Zero();
  Vec3 O_cm = Vec3::Zero();
  double sigma = 0.0;
  bool clamp_warning = false;
};

/// Trilinear interpolation over (sigma, theta, phi) with azimuthal
/// wrap-around; the gravity direction is -R_L^T e3.
LutQuery query(const InertiaLut& lut, double m_hat, const Rotation& R_L);

/// Adds a backward-difference inertia rate to successive queries.
class InertiaRateTracker {
 public:
  struct Result {
    Mat3 J = Mat3::Zero();
    Mat3 Jdot = Mat3::Zero();
    Vec3 O_cm = Vec3::Zero();
  };

  Result update(const InertiaLut& lut, double m_hat, const Rotation& R_L, double t);

 private:
  bool primed_ = false;
  double t_last_ = 0.0;
  Mat3 J_last_ = Mat3::Zero();
};

}  // namespace aqualift
