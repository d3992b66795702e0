#pragma once

#include <aqualift/types.hpp>

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace aqualift {

enum class TankShape { Box, Cylinder, Sphere, Mesh };

/// Rigid tank cavity in the load body frame. The reference point O is the
/// geometric center of the cavity and coincides with the frame origin for
/// the primitive shapes.
class TankGeometry {
 public:
  static TankGeometry box(double ax, double ay, double az, double empty_mass, double density);
  static TankGeometry cylinder(double radius, double height, double empty_mass,
                               double density);  // axis along z
  static TankGeometry sphere(double radius, double empty_mass, double density);
  /// Arbitrary cavity given by an indicator function. `name` feeds the
  /// content hash (a closure cannot be hashed); the cavity volume is
  /// estimated by voxel counting at construction.
  static TankGeometry mesh(const std::string& name, const Vec3& bbox_min, const Vec3& bbox_max,
                           std::function<bool(const Vec3&)> inside, double empty_mass,
                           double density);

  TankShape shape() const { return shape_; }
  bool contains(const Vec3& p) const { return inside_(p); }
  const Vec3& bbox_min() const { return bbox_min_; }
  const Vec3& bbox_max() const { return bbox_max_; }
  double volume() const { return volume_; }        // V_T, analytic for primitives
  double empty_mass() const { return empty_mass_; }
  double density() const { return density_; }

  /// Canonical one-line description (also the hash preimage).
  std::string describe() const { return description_; }
  std::array<std::uint8_t, 32> hash() const;

 private:
  TankGeometry() = default;
  TankShape shape_ = TankShape::Box;
  Vec3 bbox_min_ = Vec3::Zero(), bbox_max_ = Vec3::Zero();
  std::function<bool(const Vec3&)> inside_;
  double volume_ = 0.0;
  double empty_mass_ = 0.0;
  double density_ = 0.0;
  std::string description_;
};

/// Volume, first moment and raw second moment of a fluid region, all in the
/// body frame about O:
///   volume = int dV, first = int x dV, second = int x x^T dV.
struct CutMoments {
  double volume = 0.0;
  Vec3 first = Vec3::Zero();
  Mat3 second = Mat3::Zero();

  Vec3 centroid() const { return volume > 0.0 ? (first / volume).eval() : Vec3::Zero(); }
  /// int (||x||^2 I - x x^T) dV, the unit-density inertia integrand.
  Mat3 inertia_integral() const {
    return second.trace() * Mat3::Identity() - second;
  }
};

/// Midpoint-rule voxelization of a tank cavity organized as per-axis column
/// runs, so that half-space cuts reduce to closed-form partial sums along the
/// dominant axis of the cut normal. The cut volume is continuous and
/// monotone in the plane offset (the boundary voxel of each column enters
/// with a linear fractional weight), which makes the plane solve a clean
/// bisection.
class VoxelizedTank {
 public:
  VoxelizedTank(const TankGeometry& tank, int resolution);

  const TankGeometry& tank() const { return tank_; }
  int resolution() const { return resolution_; }
  double voxel_size() const { return delta_; }
  double quad_volume() const { return full_.volume; }

  /// Moments of the whole cavity; independent of any direction and computed
  /// by one canonical pass (so sigma = 1 results are bit-identical across
  /// orientations).
  const CutMoments& full() const { return full_; }

  /// Moments of { x in cavity : up . x <= h } for a unit "up" direction.
  CutMoments cut(const Vec3& up, double h) const;

  /// Volume-only version of cut(), used inside the bisection.
  double cut_volume(const Vec3& up, double h) const;

  /// Support interval of up . x over the cavity bounding box.
  std::pair<double, double> support(const Vec3& up) const;

 private:
  struct Run {
    int k0, k1;  // inclusive voxel-index range along the column axis
  };
  struct AxisColumns {
    // column (i, j) over the two cross axes; runs_index[i * nj + j] points
    // into runs[]; column counts are small (1 for convex cavities).
    std::vector<std::uint32_t> offset;  // size ni*nj + 1
    std::vector<Run> runs;
  };

  template <bool WithMoments>
  CutMoments cut_impl(const Vec3& up, double h) const;

  TankGeometry tank_;
  int resolution_ = 0;
  double delta_ = 0.0;
  Vec3 origin_ = Vec3::Zero();  // bbox_min
  int n_[3] = {0, 0, 0};
  AxisColumns cols_[3];
  CutMoments full_;
};

}  // namespace aqualift
