#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "magray/geometry.hpp"
#include "magray/random.hpp"

namespace magray {

struct GridSpec {
  int n_points = 32;
  int n_dirs = 32;
  double glancing_eps = 1e-3;
  std::vector<double> times;  ///< emission times for spacetime transforms
};

/// A ray of the influx boundary ∂₊SM.
struct BoundaryRay {
  Vec x{};
  Vec v{};
  int point = 0;
  int dir = 0;
};

/// Fan of inward boundary rays: n_points boundary points, n_dirs directions
/// each at angles strictly inside (−π/2, π/2) from the inward normal; rays
/// with g(v, ν) < glancing_eps are dropped. Deterministic.
inline std::vector<BoundaryRay> boundary_fan(const Scenario& sc, const GridSpec& spec) {
  const int n = sc.dim();
  std::vector<BoundaryRay> rays;
  for (int p = 0; p < spec.n_points; ++p) {
    Vec u{};
    if (n == 2) {
      const double th = 2.0 * std::numbers::pi * p / spec.n_points;
      u = Vec{std::cos(th), std::sin(th), 0, 0};
    } else {
      // spiral point set on the sphere
      const double z = 1.0 - (2.0 * p + 1.0) / spec.n_points;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double ph = p * std::numbers::pi * (3.0 - std::sqrt(5.0));
      u[0] = r * std::cos(ph);
      u[1] = r * std::sin(ph);
      u[2] = z;
    }
    const BoundaryPoint bp = boundary_point_along(sc, u);
    for (int d = 0; d < spec.n_dirs; ++d) {
      const double phi = -0.5 * std::numbers::pi + std::numbers::pi * (d + 0.5) / spec.n_dirs;
      Vec tang = bp.tangent_frame[0];
      if (n >= 3) {
        const double az = 2.0 * std::numbers::pi * (d * 0.6180339887498949 - std::floor(d * 0.6180339887498949));
        tang = axpy(std::cos(az), bp.tangent_frame[0], scaled(std::sin(az), bp.tangent_frame[1]));
      }
      const Vec v = axpy(std::cos(phi), bp.nu, scaled(std::sin(phi), tang));
      if (g_inner(sc, bp.x, v, bp.nu) < spec.glancing_eps) continue;
      rays.push_back({bp.x, v, p, d});
    }
  }
  return rays;
}

struct PhasePoint {
  Vec x{};
  Vec v{};
};

/// Deterministic random interior points of SM with |x| ≤ R − collar.
inline std::vector<PhasePoint> interior_samples(const Scenario& sc, std::size_t count, double collar,
                                                std::uint64_t seed) {
  Rng rng(seed);
  std::vector<PhasePoint> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    auto [x, v] = rng.unit_vector(sc, sc.radius() - collar);
    out.push_back({x, v});
  }
  return out;
}

/// Deterministic base points on a polar grid inside |x| ≤ r (n = 2) or
/// random points (n ≥ 3).
inline std::vector<Vec> base_grid(const Scenario& sc, int rings, int per_ring, double r, std::uint64_t seed = 7) {
  std::vector<Vec> out;
  if (sc.dim() == 2) {
    out.push_back(Vec{});
    for (int a = 1; a <= rings; ++a)
      for (int b = 0; b < per_ring; ++b) {
        const double rad = r * a / rings;
        const double th = 2.0 * std::numbers::pi * (b + 0.5 * (a % 2)) / per_ring;
        out.push_back(Vec{rad * std::cos(th), rad * std::sin(th), 0, 0});
      }
    return out;
  }
  Rng rng(seed);
  for (int k = 0; k < rings * per_ring + 1; ++k) out.push_back(rng.in_ball(sc.dim(), r));
  return out;
}

}  // namespace magray
