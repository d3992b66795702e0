#include <aqualift/tank.hpp>

#include <aqualift/errors.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace aqualift {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::uint64_t fnv1a64(const std::string& s, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

TankGeometry TankGeometry::box(double ax, double ay, double az, double empty_mass,
                               double density) {
  if (ax <= 0 || ay <= 0 || az <= 0 || empty_mass <= 0 || density <= 0) {
    throw ValidationError("TankGeometry::box: dimensions, mass and density must be positive");
  }
  TankGeometry t;
  t.shape_ = TankShape::Box;
  t.bbox_min_ = Vec3(-0.5 * ax, -0.5 * ay, -0.5 * az);
  t.bbox_max_ = -t.bbox_min_;
  const double hx = 0.5 * ax, hy = 0.5 * ay, hz = 0.5 * az;
  t.inside_ = [hx, hy, hz](const Vec3& p) {
    return std::abs(p.x()) <= hx && std::abs(p.y()) <= hy && std::abs(p.z()) <= hz;
  };
  t.volume_ = ax * ay * az;
  t.empty_mass_ = empty_mass;
  t.density_ = density;
  t.description_ = "box:ax=" + fmt(ax) + ",ay=" + fmt(ay) + ",az=" + fmt(az) +
                   ",m=" + fmt(empty_mass) + ",rho=" + fmt(density);
  return t;
}

TankGeometry TankGeometry::cylinder(double radius, double height, double empty_mass,
                                    double density) {
  if (radius <= 0 || height <= 0 || empty_mass <= 0 || density <= 0) {
    throw ValidationError("TankGeometry::cylinder: all parameters must be positive");
  }
  TankGeometry t;
  t.shape_ = TankShape::Cylinder;
  t.bbox_min_ = Vec3(-radius, -radius, -0.5 * height);
  t.bbox_max_ = Vec3(radius, radius, 0.5 * height);
  const double r2 = radius * radius, hz = 0.5 * height;
  t.inside_ = [r2, hz](const Vec3& p) {
    return p.x() * p.x() + p.y() * p.y() <= r2 && std::abs(p.z()) <= hz;
  };
  t.volume_ = M_PI * radius * radius * height;
  t.empty_mass_ = empty_mass;
  t.density_ = density;
  t.description_ = "cylinder:r=" + fmt(radius) + ",h=" + fmt(height) + ",m=" + fmt(empty_mass) +
                   ",rho=" + fmt(density);
  return t;
}

TankGeometry TankGeometry::sphere(double radius, double empty_mass, double density) {
  if (radius <= 0 || empty_mass <= 0 || density <= 0) {
    throw ValidationError("TankGeometry::sphere: all parameters must be positive");
  }
  TankGeometry t;
  t.shape_ = TankShape::Sphere;
  t.bbox_min_ = Vec3(-radius, -radius, -radius);
  t.bbox_max_ = Vec3(radius, radius, radius);
  const double r2 = radius * radius;
  t.inside_ = [r2](const Vec3& p) { return p.squaredNorm() <= r2; };
  t.volume_ = 4.0 / 3.0 * M_PI * radius * radius * radius;
  t.empty_mass_ = empty_mass;
  t.density_ = density;
  t.description_ = "sphere:r=" + fmt(radius) + ",m=" + fmt(empty_mass) + ",rho=" + fmt(density);
  return t;
}

TankGeometry TankGeometry::mesh(const std::string& name, const Vec3& bbox_min,
                                const Vec3& bbox_max, std::function<bool(const Vec3&)> inside,
                                double empty_mass, double density) {
  if (!inside || empty_mass <= 0 || density <= 0 ||
      !((bbox_max - bbox_min).minCoeff() > 0.0)) {
    throw ValidationError("TankGeometry::mesh: need an indicator, a proper bbox, m > 0, rho > 0");
  }
  TankGeometry t;
  t.shape_ = TankShape::Mesh;
  t.bbox_min_ = bbox_min;
  t.bbox_max_ = bbox_max;
  t.inside_ = std::move(inside);
  t.empty_mass_ = empty_mass;
  t.density_ = density;

  // No closed form: estimate the cavity volume by midpoint counting.
  const Vec3 ext = bbox_max - bbox_min;
  const int res = 96;
  const double delta = ext.maxCoeff() / res;
  long count = 0;
  const int nx = std::max(1, static_cast<int>(std::ceil(ext.x() / delta - 1e-9)));
  const int ny = std::max(1, static_cast<int>(std::ceil(ext.y() / delta - 1e-9)));
  const int nz = std::max(1, static_cast<int>(std::ceil(ext.z() / delta - 1e-9)));
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      for (int k = 0; k < nz; ++k) {
        const Vec3 p = bbox_min + delta * Vec3(i + 0.5, j + 0.5, k + 0.5);
        if (t.inside_(p)) ++count;
      }
    }
  }
  t.volume_ = count * delta * delta * delta;
  t.description_ = "mesh:" + name + ",m=" + fmt(empty_mass) + ",rho=" + fmt(density);
  return t;
}

std::array<std::uint8_t, 32> TankGeometry::hash() const {
  std::array<std::uint8_t, 32> out{};
  constexpr std::uint64_t bases[4] = {14695981039346656037ull, 0x8000000000000000ull ^ 14695981039346656037ull,
                                      0x1234567890abcdefull, 0xfedcba0987654321ull};
  for (int lane = 0; lane < 4; ++lane) {
    const std::uint64_t h = splitmix64(fnv1a64(description_, bases[lane]));
    for (int b = 0; b < 8; ++b) out[8 * lane + b] = static_cast<std::uint8_t>(h >> (8 * b));
  }
  return out;
}

VoxelizedTank::VoxelizedTank(const TankGeometry& tank, int resolution)
    : tank_(tank), resolution_(resolution) {
  if (resolution < 8) throw ValidationError("VoxelizedTank: resolution must be >= 8");
  const Vec3 ext = tank.bbox_max() - tank.bbox_min();
  delta_ = ext.maxCoeff() / resolution;
  origin_ = tank.bbox_min();
  for (int d = 0; d < 3; ++d) {
    n_[d] = std::max(1, static_cast<int>(std::ceil(ext(d) / delta_ - 1e-9)));
  }

  // Column runs for each potential dominant axis.
  for (int a = 0; a < 3; ++a) {
    const int p = (a + 1) % 3, q = (a + 2) % 3;
    auto& ac = cols_[a];
    ac.offset.assign(static_cast<std::size_t>(n_[p]) * n_[q] + 1, 0);
    Vec3 c;
    for (int i = 0; i < n_[p]; ++i) {
      c(p) = origin_(p) + (i + 0.5) * delta_;
      for (int j = 0; j < n_[q]; ++j) {
        c(q) = origin_(q) + (j + 0.5) * delta_;
        bool in_run = false;
        int run_start = 0;
        for (int k = 0; k < n_[a]; ++k) {
          c(a) = origin_(a) + (k + 0.5) * delta_;
          const bool in = tank_.contains(c);
          if (in && !in_run) {
            in_run = true;
            run_start = k;
          } else if (!in && in_run) {
            in_run = false;
            ac.runs.push_back({run_start, k - 1});
            ++ac.offset[static_cast<std::size_t>(i) * n_[q] + j + 1];
          }
        }
        if (in_run) {
          ac.runs.push_back({run_start, n_[a] - 1});
          ++ac.offset[static_cast<std::size_t>(i) * n_[q] + j + 1];
        }
      }
    }
    for (std::size_t s = 1; s < ac.offset.size(); ++s) ac.offset[s] += ac.offset[s - 1];
  }

  // Canonical whole-cavity pass (z columns, all voxels at weight 1).
  full_ = cut_impl<true>(Vec3::UnitZ(), support(Vec3::UnitZ()).second + delta_);
}

std::pair<double, double> VoxelizedTank::support(const Vec3& up) const {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int cx = 0; cx < 2; ++cx) {
    for (int cy = 0; cy < 2; ++cy) {
      for (int cz = 0; cz < 2; ++cz) {
        const Vec3 corner(cx ? tank_.bbox_max().x() : tank_.bbox_min().x(),
                          cy ? tank_.bbox_max().y() : tank_.bbox_min().y(),
                          cz ? tank_.bbox_max().z() : tank_.bbox_min().z());
        const double s = up.dot(corner);
        lo = std::min(lo, s);
        hi = std::max(hi, s);
      }
    }
  }
  return {lo, hi};
}

template <bool WithMoments>
CutMoments VoxelizedTank::cut_impl(const Vec3& up, double h) const {
  // Dominant axis of the cut normal; |up(a)| >= 1/sqrt(3).
  int a = 0;
  up.cwiseAbs().maxCoeff(&a);
  const int p = (a + 1) % 3, q = (a + 2) % 3;
  const double dir = up(a);
  const double s = dir > 0.0 ? 1.0 : -1.0;
  const double z0 = origin_(a) + 0.5 * delta_;
  const auto& ac = cols_[a];

  double W_total = 0.0;
  double F[3] = {0.0, 0.0, 0.0};
  double Spp = 0, Sqq = 0, Saa = 0, Spq = 0, Spa = 0, Sqa = 0;

  // Closed-form power sums over an index range, all weight 1.
  auto accumulate_full = [&](double cp, double cq, int ka, int kb) {
    if (kb < ka) return;
    const double n = kb - ka + 1;
    W_total += n;
    if constexpr (WithMoments) {
      const double sum_k = 0.5 * (static_cast<double>(ka) + kb) * n;
      auto s2 = [](double m) { return m < 0 ? 0.0 : m * (m + 1) * (2 * m + 1) / 6.0; };
      const double sum_k2 = s2(kb) - s2(ka - 1.0);
      const double Sz = n * z0 + delta_ * sum_k;
      const double Szz = n * z0 * z0 + 2.0 * z0 * delta_ * sum_k + delta_ * delta_ * sum_k2;
      F[p] += cp * n;
      F[q] += cq * n;
      F[a] += Sz;
      Spp += cp * cp * n;
      Sqq += cq * cq * n;
      Saa += Szz;
      Spq += cp * cq * n;
      Spa += cp * Sz;
      Sqa += cq * Sz;
    }
  };
  auto accumulate_partial = [&](double cp, double cq, int k, double w) {
    if (w <= 0.0) return;
    W_total += w;
    if constexpr (WithMoments) {
      const double z = z0 + k * delta_;
      F[p] += cp * w;
      F[q] += cq * w;
      F[a] += z * w;
      Spp += cp * cp * w;
      Sqq += cq * cq * w;
      Saa += z * z * w;
      Spq += cp * cq * w;
      Spa += cp * z * w;
      Sqa += cq * z * w;
    }
  };

  for (int i = 0; i < n_[p]; ++i) {
    const double cp = origin_(p) + (i + 0.5) * delta_;
    for (int j = 0; j < n_[q]; ++j) {
      const double cq = origin_(q) + (j + 0.5) * delta_;
      const std::size_t col = static_cast<std::size_t>(i) * n_[q] + j;
      const std::uint32_t r_begin = ac.offset[col], r_end = ac.offset[col + 1];
      if (r_begin == r_end) continue;

      const double b = up(p) * cp + up(q) * cq;
      // weight(k) = clamp(g0 - s k, 0, 1)
      const double g0 = (h - b - dir * z0) / (std::abs(dir) * delta_) + 0.5;

      for (std::uint32_t r = r_begin; r < r_end; ++r) {
        const int r0 = ac.runs[r].k0, r1 = ac.runs[r].k1;
        if (s > 0.0) {
          if (g0 >= r1 + 1.0) {
            accumulate_full(cp, cq, r0, r1);
          } else if (g0 <= r0) {
            // empty
          } else {
            const int k_full_hi = static_cast<int>(std::floor(g0)) - 2;
            accumulate_full(cp, cq, r0, std::min(r1, k_full_hi));
            const int ck_lo = std::max(r0, k_full_hi + 1);
            const int ck_hi = std::min(r1, static_cast<int>(std::floor(g0)) + 1);
            for (int k = ck_lo; k <= ck_hi; ++k) {
              accumulate_partial(cp, cq, k, std::clamp(g0 - k, 0.0, 1.0));
            }
          }
        } else {
          if (g0 + r0 >= 1.0) {
            accumulate_full(cp, cq, r0, r1);
          } else if (g0 + r1 <= 0.0) {
            // empty
          } else {
            const int k_full_lo = static_cast<int>(std::floor(2.0 - g0)) + 1;
            accumulate_full(cp, cq, std::max(r0, k_full_lo), r1);
            const int ck_lo = std::max(r0, static_cast<int>(std::floor(-g0)) - 1);
            const int ck_hi = std::min(r1, k_full_lo - 1);
            for (int k = ck_lo; k <= ck_hi; ++k) {
              accumulate_partial(cp, cq, k, std::clamp(g0 + k, 0.0, 1.0));
            }
          }
        }
      }
    }
  }

  CutMoments out;
  const double vv = delta_ * delta_ * delta_;
  out.volume = W_total * vv;
  if constexpr (WithMoments) {
    out.first = Vec3(F[0], F[1], F[2]) * vv;
    Mat3 sec;
    sec(p, p) = Spp;
    sec(q, q) = Sqq;
    sec(a, a) = Saa;
    sec(p, q) = sec(q, p) = Spq;
    sec(p, a) = sec(a, p) = Spa;
    sec(q, a) = sec(a, q) = Sqa;
    out.second = sec * vv;
  }
  return out;
}

CutMoments VoxelizedTank::cut(const Vec3& up, double h) const {
  return cut_impl<true>(up, h);
}

double VoxelizedTank::cut_volume(const Vec3& up, double h) const {
  return cut_impl<false>(up, h).volume;
}

}  // namespace aqualift
