#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "magray/transforms.hpp"

namespace magray {

/// Vertical Fourier modes c_k, |k| ≤ K, of θ ↦ u(x, cos θ e₁ + sin θ e₂).
struct VerticalSpectrum {
  Vec x{};
  int kmax = 0;
  std::vector<Complex> modes;  ///< modes[k + kmax]
  std::array<Vec, 2> frame{};

  Complex mode(int k) const { return modes[static_cast<std::size_t>(k + kmax)]; }

  /// Sum of |c_k|² over all modes (the fiber mean of |u|²).
  double mass() const {
    double s = 0.0;
    for (const auto& c : modes) s += std::norm(c);
    return s;
  }

  /// u at angle θ reconstructed from the modes.
  double reconstruct(double theta) const {
    Complex acc = 0.0;
    for (int k = -kmax; k <= kmax; ++k) acc += mode(k) * std::polar(1.0, k * theta);
    return acc.real();
  }
};

/// g-orthonormal frame e_a = e^{−λ} ∂_a (Gram–Schmidt of the chart basis).
inline std::array<Vec, 2> vertical_frame(const Scenario& sc, const Vec& x) {
  if (sc.dim() != 2) throw UnsupportedDimensionError("vertical spectra need n = 2");
  const double s = 1.0 / g_norm(sc, x, Vec{1, 0, 0, 0});
  return {Vec{s, 0, 0, 0}, Vec{0, s, 0, 0}};
}

inline Vec fiber_vector(const std::array<Vec, 2>& frame, double theta) {
  return axpy(std::cos(theta), frame[0], scaled(std::sin(theta), frame[1]));
}

/// Spectrum from fiber samples at θ_j = 2πj/N_θ. With K = N_θ/2 the Nyquist
/// coefficient is split evenly between ±K so the modes reproduce the samples
/// exactly.
inline VerticalSpectrum spectrum_from_samples(const Vec& x, const std::array<Vec, 2>& frame,
                                              const std::vector<double>& vals) {
  const int n_theta = static_cast<int>(vals.size());
  VerticalSpectrum sp;
  sp.x = x;
  sp.frame = frame;
  sp.kmax = n_theta / 2;
  sp.modes.assign(static_cast<std::size_t>(2 * sp.kmax + 1), Complex{});
  for (int k = -sp.kmax; k <= sp.kmax; ++k) {
    Complex acc = 0.0;
    for (int j = 0; j < n_theta; ++j) acc += vals[j] * std::polar(1.0, -2.0 * std::numbers::pi * k * j / n_theta);
    acc /= static_cast<double>(n_theta);
    if (std::abs(k) == sp.kmax) acc *= 0.5;
    sp.modes[static_cast<std::size_t>(k + sp.kmax)] = acc;
  }
  return sp;
}

/// Discrete Fourier transform over N_θ equally spaced fiber angles.
inline VerticalSpectrum vertical_spectrum(const Scenario& sc, const SMFunction& u, const Vec& x, int n_theta = 64) {
  if (sc.dim() != 2) throw UnsupportedDimensionError("vertical spectra need n = 2");
  if (n_theta < 2 || n_theta % 2 != 0) throw PreconditionError("N_theta must be even");
  const auto frame = vertical_frame(sc, x);
  std::vector<double> vals(static_cast<std::size_t>(n_theta));
  for (int j = 0; j < n_theta; ++j) vals[j] = u(x, fiber_vector(frame, 2.0 * std::numbers::pi * j / n_theta));
  return spectrum_from_samples(x, frame, vals);
}

/// Largest |k| whose mode amplitude √(|c_k|² + |c_{−k}|²) exceeds tol times the
/// largest fiber L² norm over the grid. The zero function has degree 0.
inline int degree_estimate(const std::vector<VerticalSpectrum>& spectra, double tol = 1e-4) {
  double scale = 0.0;
  for (const auto& sp : spectra) scale = std::max(scale, std::sqrt(sp.mass()));
  if (scale == 0.0) return 0;
  int deg = 0;
  for (const auto& sp : spectra)
    for (int k = sp.kmax; k > deg; --k) {
      const double a = std::sqrt(std::norm(sp.mode(k)) + std::norm(sp.mode(-k)));
      if (a > tol * scale) {
        deg = k;
        break;
      }
    }
  return deg;
}

inline int degree_estimate(const VerticalSpectrum& sp, double tol = 1e-4) {
  return degree_estimate(std::vector<VerticalSpectrum>{sp}, tol);
}

/// max over samples of |G(l_m ξ) − l_{m+1}(dˢξ) − m·l_m(F*ξ)|, G by flow differences.
inline double check_g_lemma(const Scenario& sc, const SymTensorField& xi, const std::vector<PhasePoint>& samples,
                            double delta) {
  const int m = xi.rank();
  const SymTensorField d = dsym(sc, xi);
  const SymTensorField f = fstar(sc, xi);
  const SMFunction lxi = [&](const Vec& x, const Vec& v) { return xi.contract(x, v); };
  double worst = 0.0;
  for (const auto& p : samples) {
    const double lhs = apply_G(sc, lxi, p.x, p.v, delta);
    const double rhs = l_map(sc, d, p.x, p.v) + m * l_map(sc, f, p.x, p.v);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

/// max over samples of |l_m(ξ g^k) − l_{m−2k} ξ|.
inline double check_l_lemma(const Scenario& sc, const SymTensorField& xi, int k, const std::vector<PhasePoint>& samples) {
  const SymTensorField prod = sym_product(xi, metric_power(sc, k));
  double worst = 0.0;
  for (const auto& p : samples)
    worst = std::max(worst, std::abs(l_map(sc, prod, p.x, p.v) - l_map(sc, xi, p.x, p.v)));
  return worst;
}

}  // namespace magray
