#pragma once

#include <array>
#include <cmath>
#include <span>
#include <vector>

namespace magray {

namespace detail {

/// ∫_a^b of the Lagrange interpolant through (nodes, vals); exact for the
/// ≤ 4-point interpolants used here (4-point Gauss–Legendre).
inline double interp_integral(std::span<const double> nodes, std::span<const double> vals, double a, double b) {
  static constexpr std::array<double, 4> gx{-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                            0.8611363115940526};
  static constexpr std::array<double, 4> gw{0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                            0.3478548451374538};
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double acc = 0.0;
  for (int q = 0; q < 4; ++q) {
    const double s = mid + half * gx[q];
    double p = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      double l = 1.0;
      for (std::size_t j = 0; j < nodes.size(); ++j)
        if (j != i) l *= (s - nodes[j]) / (nodes[i] - nodes[j]);
      p += vals[i] * l;
    }
    acc += gw[q] * p;
  }
  return acc * half;
}

/// Integral over the final fractional segment [N h, N h + θ], using the cubic
/// through the last three uniform samples and the exit sample.
inline double tail_integral(std::span<const double> f, double h, double theta) {
  const std::size_t N = f.size() - 2;  // index of the last uniform sample
  if (std::abs(theta) < 1e-9 * std::abs(h)) return 0.5 * theta * (f[N] + f[N + 1]);
  std::array<double, 4> nodes{}, vals{};
  std::size_t c = 0;
  for (std::size_t k = N >= 2 ? N - 2 : 0; k <= N; ++k, ++c) {
    nodes[c] = static_cast<double>(k) * h;
    vals[c] = f[k];
  }
  nodes[c] = static_cast<double>(N) * h + theta;
  vals[c] = f[N + 1];
  ++c;
  const double a = static_cast<double>(N) * h;
  return interp_integral(std::span<const double>(nodes.data(), c), std::span<const double>(vals.data(), c), a,
                         a + theta);
}

}  // namespace detail

/// ∫ f ds over a trajectory sampled at s_k = k h (k = 0..N) plus a final
/// sample at N h + θ. Composite Simpson on the uniform part (3/8 rule on the
/// last three intervals when N is odd), cubic interpolation on the tail.
inline double trajectory_integral(std::span<const double> f, double h, double theta) {
  if (f.size() < 2) return 0.0;
  const std::size_t N = f.size() - 2;
  double acc = 0.0;
  if (N == 1) {
    const std::array<double, 3> n3{0.0, h, h + theta};
    acc = std::abs(theta) >= 1e-9 * std::abs(h) ? detail::interp_integral(n3, f.first(3), 0.0, h)
                                                : 0.5 * h * (f[0] + f[1]);
  } else if (N >= 2) {
    std::size_t simpson_end = N % 2 == 0 ? N : N - 3;
    for (std::size_t k = 0; k + 2 <= simpson_end; k += 2) acc += h / 3.0 * (f[k] + 4.0 * f[k + 1] + f[k + 2]);
    if (N % 2 == 1) {
      const std::size_t k = N - 3;
      acc += 3.0 * h / 8.0 * (f[k] + 3.0 * f[k + 1] + 3.0 * f[k + 2] + f[k + 3]);
    }
  }
  return acc + detail::tail_integral(f, h, theta);
}

/// Running integral ∫_0^{s_k} f ds at every sample of the same layout.
inline std::vector<double> cumulative_integral(std::span<const double> f, double h, double theta) {
  std::vector<double> out(f.size(), 0.0);
  if (f.size() < 2) return out;
  const std::size_t N = f.size() - 2;
  for (std::size_t k = 1; k <= N; ++k) {
    if (N == 1) {
      out[1] = 0.5 * h * (f[0] + f[1]);
      if (std::abs(theta) >= 1e-9 * std::abs(h)) {
        const std::array<double, 3> n3{0.0, h, h + theta};
        out[1] = detail::interp_integral(n3, f.first(3), 0.0, h);
      }
    } else if (k % 2 == 0) {
      out[k] = out[k - 2] + h / 3.0 * (f[k - 2] + 4.0 * f[k - 1] + f[k]);
    } else if (k == 1) {
      out[1] = h / 12.0 * (5.0 * f[0] + 8.0 * f[1] - f[2]);
    } else {
      out[k] = out[k - 1] + h / 12.0 * (-f[k - 2] + 8.0 * f[k - 1] + 5.0 * f[k]);
    }
  }
  out[N + 1] = out[N] + detail::tail_integral(f, h, theta);
  return out;
}

/// Composite Simpson on a uniform grid of an odd number of points.
inline double simpson(std::span<const double> f, double h) {
  if (f.size() < 3 || f.size() % 2 == 0) return trajectory_integral(f, h, h);
  double acc = 0.0;
  for (std::size_t k = 0; k + 2 < f.size(); k += 2) acc += f[k] + 4.0 * f[k + 1] + f[k + 2];
  return acc * h / 3.0;
}

}  // namespace magray
