#pragma once

#include <vector>

#include "magray/tensor.hpp"
#include "magray/time_profile.hpp"

namespace magray {

/// One time-profiled spatial tensor p(t)·A(x).
struct SpacetimeTerm {
  TimeProfile profile;
  SymTensorField field;
};

/// Symmetric rank-m tensor on ℝ×M, stored by blocks: part(j) is the spatial
/// rank-(m−j) tensor α_j = α(∂_t, …, ∂_t, ·) with j time slots, so that
/// α(V, …, V) = Σ_j C(m,j) (V^t)^j α_j(V^x, …, V^x). Each block is a finite
/// sum of time-profiled spatial fields.
///
/// In symmetric-product notation α = Σ_j C(m,j) α_j·dt^j.
class SpacetimeTensor {
 public:
  SpacetimeTensor() = default;
  SpacetimeTensor(int n, int m) : n_(n), m_(m), parts_(static_cast<std::size_t>(m + 1)) {
    if (m < 0 || m > kMaxRank) throw CapacityError("tensor rank exceeds capacity");
  }

  /// p(t)·A, no dt factors.
  static SpacetimeTensor spatial(TimeProfile p, SymTensorField a) {
    SpacetimeTensor s(a.dim(), a.rank());
    s.add_term(0, std::move(p), std::move(a));
    return s;
  }

  int dim() const { return n_; }
  int rank() const { return m_; }
  const std::vector<SpacetimeTerm>& part(int j) const { return parts_.at(static_cast<std::size_t>(j)); }

  /// Adds p·A to block j (A must have rank m − j). Terms with an identical
  /// profile are merged.
  void add_term(int j, TimeProfile p, SymTensorField a) {
    if (j < 0 || j > m_) throw RankError("dt power out of range");
    if (a.rank() + j != m_) throw RankError("block rank does not match dt power");
    if (p.is_zero() || a.is_zero()) return;
    auto& blk = parts_[static_cast<std::size_t>(j)];
    for (auto& t : blk)
      if (t.profile == p) {
        t.field += a;
        return;
      }
    blk.push_back({std::move(p), std::move(a)});
  }

  /// Every block's spatial field vanishes on ∂M.
  bool vanishes_on_boundary() const {
    for (const auto& blk : parts_)
      for (const auto& t : blk)
        if (!t.field.vanishes_on_boundary()) return false;
    return true;
  }

  /// All profiles compactly supported; [lo, hi] is the union of supports.
  bool compact_support(double& lo, double& hi) const {
    lo = std::numeric_limits<double>::infinity();
    hi = -lo;
    for (const auto& blk : parts_)
      for (const auto& t : blk) {
        if (!t.profile.compact()) return false;
        lo = std::min(lo, t.profile.t0());
        hi = std::max(hi, t.profile.t1());
      }
    return true;
  }

  /// Block j at (t, x) as canonical component values.
  std::vector<double> block_values(int j, double t, const Vec& x) const {
    std::vector<double> out(layout(n_, m_ - j).size(), 0.0);
    for (const auto& term : parts_[static_cast<std::size_t>(j)]) {
      const double p = term.profile(t);
      if (p == 0.0) continue;
      const auto v = term.field.evaluate(x);
      for (std::size_t k = 0; k < out.size(); ++k) out[k] += p * v[k];
    }
    return out;
  }

  /// α(V, …, V) for V = V^t ∂_t + V^x.
  double evaluate(double t, const Vec& x, const STVec& V) const {
    Vec vx{};
    for (int i = 0; i < n_; ++i) vx[i] = V[i + 1];
    double acc = 0.0, vt = 1.0;
    for (int j = 0; j <= m_; ++j, vt *= V[0]) {
      double blk = 0.0;
      for (const auto& term : parts_[static_cast<std::size_t>(j)]) {
        const double p = term.profile(t);
        if (p != 0.0) blk += p * term.field.contract(x, vx);
      }
      acc += detail::binomial(m_, j) * vt * blk;
    }
    return acc;
  }

  SpacetimeTensor& operator+=(const SpacetimeTensor& o) {
    if (o.m_ != m_ || o.n_ != n_) throw RankError("spacetime tensor rank mismatch");
    for (int j = 0; j <= m_; ++j)
      for (const auto& t : o.parts_[static_cast<std::size_t>(j)]) add_term(j, t.profile, t.field);
    return *this;
  }
  SpacetimeTensor& operator*=(double c) {
    for (auto& blk : parts_)
      for (auto& t : blk) t.field *= c;
    return *this;
  }
  friend SpacetimeTensor operator+(SpacetimeTensor a, const SpacetimeTensor& b) { return a += b; }
  friend SpacetimeTensor operator-(SpacetimeTensor a, SpacetimeTensor b) { return a += (b *= -1.0); }
  friend SpacetimeTensor operator*(double c, SpacetimeTensor a) { return a *= c; }

 private:
  int n_ = 0;
  int m_ = 0;
  std::vector<std::vector<SpacetimeTerm>> parts_;
};

/// dt as a rank-1 spacetime tensor.
inline SpacetimeTensor st_dt(const Scenario& sc) {
  SpacetimeTensor s(sc.dim(), 1);
  s.add_term(1, TimeProfile::constant(1.0), constant_tensor(sc, 1.0));
  return s;
}

/// Time-independent spatial tensor viewed on ℝ×M.
inline SpacetimeTensor st_static(const SymTensorField& a) { return SpacetimeTensor::spatial(TimeProfile::constant(1.0), a); }

/// Symmetric product: C_l = Σ_{j+k=l} C(a,j) C(b,k) / C(a+b,l) · A_j B_k.
inline SpacetimeTensor sym_product(const SpacetimeTensor& A, const SpacetimeTensor& B) {
  const int a = A.rank(), b = B.rank();
  SpacetimeTensor C(A.dim(), a + b);
  for (int j = 0; j <= a; ++j)
    for (int k = 0; k <= b; ++k) {
      const double w = detail::binomial(a, j) * detail::binomial(b, k) / detail::binomial(a + b, j + k);
      for (const auto& s : A.part(j))
        for (const auto& t : B.part(k)) C.add_term(j + k, s.profile * t.profile, w * sym_product(s.field, t.field));
    }
  return C;
}

/// ḡ = −(dt + ω)² + g.
inline SpacetimeTensor spacetime_metric_tensor(const Scenario& sc) {
  const SpacetimeTensor dto = st_dt(sc) + st_static(omega_form(sc));
  return -1.0 * sym_product(dto, dto) + st_static(metric_tensor(sc));
}

/// d̄ˢ of a purely spatial term p(t)·U: ∂_t p U dt + p dˢU + m p (dt + ω) F*(U).
inline SpacetimeTensor dsym_spacetime(const Scenario& sc, const TimeProfile& p, const SymTensorField& U) {
  const int m = U.rank();
  SpacetimeTensor r(sc.dim(), m + 1);
  const TimeProfile dp = p.derivative();
  r += sym_product(st_dt(sc), SpacetimeTensor::spatial(dp, U));
  r += SpacetimeTensor::spatial(p, dsym(sc, U));
  if (m > 0) {
    const SpacetimeTensor dto = st_dt(sc) + st_static(omega_form(sc));
    r += static_cast<double>(m) * sym_product(dto, SpacetimeTensor::spatial(p, fstar(sc, U)));
  }
  return r;
}

/// d̄ˢ dt = −dˢω − (dt + ω) F*(ω).
inline SpacetimeTensor dsym_dt(const Scenario& sc) {
  const SymTensorField w = omega_form(sc);
  const SpacetimeTensor dto = st_dt(sc) + st_static(w);
  return -1.0 * (st_static(dsym(sc, w)) + sym_product(dto, st_static(fstar(sc, w))));
}

/// General d̄ˢ by the Leibniz rule on α = Σ_j C(m,j) α_j·dt^j.
inline SpacetimeTensor dsym_spacetime(const Scenario& sc, const SpacetimeTensor& alpha) {
  const int m = alpha.rank();
  SpacetimeTensor r(sc.dim(), m + 1);
  const SpacetimeTensor ddt = dsym_dt(sc);
  for (int j = 0; j <= m; ++j) {
    SpacetimeTensor dtj(sc.dim(), j);  // dt^j
    dtj.add_term(j, TimeProfile::constant(1.0), constant_tensor(sc, 1.0));
    for (const auto& term : alpha.part(j)) {
      const double c = detail::binomial(m, j);
      r += c * sym_product(dsym_spacetime(sc, term.profile, term.field), dtj);
      if (j > 0) {
        SpacetimeTensor dtj1(sc.dim(), j - 1);
        dtj1.add_term(j - 1, TimeProfile::constant(1.0), constant_tensor(sc, 1.0));
        const SpacetimeTensor pa = SpacetimeTensor::spatial(term.profile, term.field);
        r += (c * j) * sym_product(sym_product(pa, dtj1), ddt);
      }
    }
  }
  return r;
}

/// T α at (t, x, v): Σ_j C(m,j) (1 − ω_x(v))^j α_j(t)_x(v, …, v).
inline double t_map(const Scenario& sc, const SpacetimeTensor& alpha, double t, const Vec& x, const Vec& v) {
  if (std::abs(g_norm(sc, x, v) - 1.0) > sc.tol().speed_drift_tol + 1e-14)
    throw PreconditionError("t_map needs a unit vector");
  const double w = dot(omega_at(sc, x), v, sc.dim());
  STVec V{};
  V[0] = 1.0 - w;
  for (int i = 0; i < sc.dim(); ++i) V[i + 1] = v[i];
  return alpha.evaluate(t, x, V);
}

}  // namespace magray
