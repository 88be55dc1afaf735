#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "magray/tensor.hpp"

namespace magray {

/// Deterministic sampler. Uses the raw mt19937_64 stream only, so sequences
/// are identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /// Point with |x| ≤ r, uniform in the ball (rejection).
  Vec in_ball(int n, double r) {
    for (;;) {
      Vec x{};
      for (int i = 0; i < n; ++i) x[i] = uniform(-r, r);
      if (norm(x, n) <= r) return x;
    }
  }

  /// Euclidean unit direction, uniform on the sphere (rejection).
  Vec direction(int n) {
    for (;;) {
      Vec v{};
      for (int i = 0; i < n; ++i) v[i] = uniform(-1.0, 1.0);
      const double len = norm(v, n);
      if (len > 1e-3 && len <= 1.0) return scaled(1.0 / len, v);
    }
  }

  /// (x, v) ∈ SM with |x| ≤ r.
  std::pair<Vec, Vec> unit_vector(const Scenario& sc, double r) {
    const Vec x = in_ball(sc.dim(), r);
    const Vec d = direction(sc.dim());
    return {x, scaled(1.0 / g_norm(sc, x, d), d)};
  }

 private:
  std::mt19937_64 eng_;
};

/// Polynomial of total degree ≤ d with coefficients uniform in [−scale, scale].
inline Polynomial random_polynomial(int n, int d, Rng& rng, double scale = 1.0) {
  const auto mons = graded_lex_monomials(n, monomial_count(n, d));
  std::vector<double> c(mons.size());
  for (auto& v : c) v = rng.uniform(-scale, scale);
  return Polynomial::from_graded_lex(n, c);
}

/// Rank-m field with random polynomial components of degree ≤ d.
inline SymTensorField random_tensor(const Scenario& sc, int m, int d, Rng& rng, double scale = 1.0) {
  SymTensorField t = zero_tensor(sc, m);
  const auto& L = layout(sc.dim(), m);
  for (std::size_t k = 0; k < L.size(); ++k)
    t.set_component(L.multi_index(k), ScalarField::from_polynomial(sc.conformal_factor(),
                                                                  random_polynomial(sc.dim(), d, rng, scale)));
  return t;
}

}  // namespace magray
