#pragma once

#include <algorithm>
#include <bit>
#include <numbers>
#include <array>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "magray/geometry.hpp"

namespace magray {

/// Largest tensor rank a field may carry.
inline constexpr int kMaxRank = 6;

using MultiIndex = std::vector<int>;

/// Canonical storage layout of symmetric rank-m tensors in n dimensions:
/// the non-decreasing multi-indices in lexicographic order.
struct ComponentLayout {
  int n = 0;
  int m = 0;
  std::vector<std::array<std::uint8_t, kMaxRank>> index;
  std::vector<double> multiplicity;  ///< number of distinct permutations
  std::vector<int> lookup;           ///< base-n code of a sorted tuple -> ordinal

  std::size_t size() const { return index.size(); }

  int code(std::span<const int> sorted) const {
    int c = 0;
    for (int r = 0; r < m; ++r) c = c * n + sorted[r];
    return c;
  }

  /// Ordinal of an arbitrary (unsorted) index tuple.
  std::size_t ordinal(std::span<const int> idx) const {
    std::array<int, kMaxRank> s{};
    std::copy(idx.begin(), idx.end(), s.begin());
    std::sort(s.begin(), s.begin() + m);
    return static_cast<std::size_t>(lookup[code(std::span<const int>(s.data(), m))]);
  }

  MultiIndex multi_index(std::size_t ord) const {
    MultiIndex r(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) r[k] = index[ord][k];
    return r;
  }
};

inline const ComponentLayout& layout(int n, int m) {
  if (n < 1 || n > kMaxDim) throw CapacityError("dimension out of range");
  if (m < 0 || m > kMaxRank) throw CapacityError("tensor rank exceeds capacity");
  static const auto table = [] {
    std::array<std::array<ComponentLayout, kMaxRank + 1>, kMaxDim + 1> t;
    for (int nn = 1; nn <= kMaxDim; ++nn)
      for (int mm = 0; mm <= kMaxRank; ++mm) {
        ComponentLayout& L = t[nn][mm];
        L.n = nn;
        L.m = mm;
        int total = 1;
        for (int r = 0; r < mm; ++r) total *= nn;
        L.lookup.assign(static_cast<std::size_t>(total), -1);
        std::array<int, kMaxRank> cur{};
        auto rec = [&](auto&& self, int pos, int lo) -> void {
          if (pos == mm) {
            std::array<std::uint8_t, kMaxRank> e{};
            double mult = 1.0;
            for (int r = 1; r <= mm; ++r) mult *= r;
            int run = 1;
            for (int r = 0; r < mm; ++r) {
              e[r] = static_cast<std::uint8_t>(cur[r]);
              if (r > 0 && cur[r] == cur[r - 1]) {
                ++run;
                mult /= run;
              } else {
                run = 1;
              }
            }
            L.lookup[L.code(std::span<const int>(cur.data(), mm))] = static_cast<int>(L.index.size());
            L.index.push_back(e);
            L.multiplicity.push_back(mult);
            return;
          }
          for (int i = lo; i < nn; ++i) {
            cur[pos] = i;
            self(self, pos + 1, i);
          }
        };
        rec(rec, 0, 0);
      }
    return t;
  }();
  return table[n][m];
}

namespace detail {

inline double binomial(int a, int b) {
  if (b < 0 || b > a) return 0.0;
  double r = 1.0;
  for (int k = 1; k <= b; ++k) r = r * (a - b + k) / k;
  return r;
}

/// Components of the symmetrized product of canonical component vectors.
/// Works for any ring element type (double, ScalarField).
template <class T>
std::vector<T> sym_product_components(const std::vector<T>& a, int ma, const std::vector<T>& b, int mb, int n,
                                      const T& zero) {
  const int m = ma + mb;
  const auto& L = layout(n, m);
  const auto& La = layout(n, ma);
  const auto& Lb = layout(n, mb);
  std::vector<T> out(L.size(), zero);
  const double w = 1.0 / binomial(m, ma);
  std::array<int, kMaxRank> ia{}, ib{};
  for (std::size_t o = 0; o < L.size(); ++o) {
    // Average over position subsets of size ma.
    for (unsigned mask = 0; mask < (1u << m); ++mask) {
      if (std::popcount(mask) != ma) continue;
      int pa = 0, pb = 0;
      for (int r = 0; r < m; ++r) {
        if (mask & (1u << r)) ia[pa++] = L.index[o][r];
        else ib[pb++] = L.index[o][r];
      }
      const T& x = a[La.ordinal(std::span<const int>(ia.data(), ma))];
      const T& y = b[Lb.ordinal(std::span<const int>(ib.data(), mb))];
      out[o] += (x * y) * w;
    }
  }
  return out;
}

/// (Tr ξ)_J = h^{ab} ξ_{abJ} for a symmetric contraction matrix h (given as
/// elements of the component ring).
template <class T>
std::vector<T> trace_components(const std::vector<T>& a, int m, int n, const std::array<std::array<T, kMaxDim>, kMaxDim>& h,
                                const T& zero) {
  const auto& L = layout(n, m - 2);
  const auto& La = layout(n, m);
  std::vector<T> out(L.size(), zero);
  std::array<int, kMaxRank> idx{};
  for (std::size_t o = 0; o < L.size(); ++o) {
    for (int r = 0; r < m - 2; ++r) idx[r + 2] = L.index[o][r];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        idx[0] = i;
        idx[1] = j;
        out[o] += h[i][j] * a[La.ordinal(std::span<const int>(idx.data(), m))];
      }
  }
  return out;
}

}  // namespace detail

/// Symmetric rank-m covariant tensor field on M with components in
/// R[x][e^{±λ}], stored on canonical multi-indices.
class SymTensorField {
 public:
  SymTensorField() = default;
  SymTensorField(int n, int m, ConformalFactorPtr cf) : n_(n), m_(m), cf_(std::move(cf)) {
    comps_.assign(layout(n, m).size(), ScalarField(n, cf_));
  }

  static SymTensorField scalar(const ScalarField& f) {
    SymTensorField t(f.dim(), 0, f.conformal_factor());
    t.comps_[0] = f;
    return t;
  }

  int dim() const { return n_; }
  int rank() const { return m_; }
  const ConformalFactorPtr& conformal_factor() const { return cf_; }
  const ComponentLayout& components_layout() const { return layout(n_, m_); }
  bool vanishes_on_boundary() const { return boundary_; }

  const std::vector<ScalarField>& components() const { return comps_; }
  const ScalarField& component(std::span<const int> idx) const { return comps_[ordinal(idx)]; }
  const ScalarField& component(std::initializer_list<int> idx) const {
    return component(std::span<const int>(idx.begin(), idx.size()));
  }
  void set_component(std::span<const int> idx, ScalarField f) {
    comps_[ordinal(idx)] = std::move(f);
    boundary_ = false;
  }
  void set_component(std::initializer_list<int> idx, ScalarField f) {
    set_component(std::span<const int>(idx.begin(), idx.size()), std::move(f));
  }

  bool is_zero() const {
    return std::all_of(comps_.begin(), comps_.end(), [](const ScalarField& f) { return f.is_zero(); });
  }

  int degree() const {
    int d = 0;
    for (const auto& c : comps_) d = std::max(d, c.degree());
    return d;
  }

  /// Canonical component values at x.
  std::vector<double> evaluate(const Vec& x) const {
    const PointEval pe(x, n_, cf_.get(), degree());
    std::vector<double> out(comps_.size());
    for (std::size_t k = 0; k < comps_.size(); ++k) out[k] = comps_[k].evaluate(pe);
    return out;
  }

  /// ξ_x(v, …, v) with no unit-speed check.
  double contract(const Vec& x, const Vec& v) const { return contract_values(evaluate(x), v); }

  double contract_values(const std::vector<double>& vals, const Vec& v) const {
    const auto& L = components_layout();
    double acc = 0.0;
    for (std::size_t k = 0; k < vals.size(); ++k) {
      double p = L.multiplicity[k] * vals[k];
      for (int r = 0; r < m_; ++r) p *= v[L.index[k][r]];
      acc += p;
    }
    return acc;
  }

  /// Largest coefficient magnitude over all components.
  double max_coeff() const {
    double m = 0.0;
    for (const auto& c : comps_) m = std::max(m, c.max_coeff());
    return m;
  }

  SymTensorField& operator+=(const SymTensorField& o) {
    check_same(o);
    for (std::size_t k = 0; k < comps_.size(); ++k) comps_[k] += o.comps_[k];
    boundary_ = boundary_ && o.boundary_;
    return *this;
  }
  SymTensorField& operator-=(const SymTensorField& o) { return *this += -o; }
  SymTensorField& operator*=(double c) {
    for (auto& f : comps_) f *= c;
    return *this;
  }
  SymTensorField operator-() const {
    SymTensorField r = *this;
    for (auto& f : r.comps_) f = -f;
    return r;
  }
  friend SymTensorField operator+(SymTensorField a, const SymTensorField& b) { return a += b; }
  friend SymTensorField operator-(SymTensorField a, const SymTensorField& b) { return a -= b; }
  friend SymTensorField operator*(SymTensorField a, double c) { return a *= c; }
  friend SymTensorField operator*(double c, SymTensorField a) { return a *= c; }

  /// Pointwise product with a scalar function; keeps a boundary certificate.
  friend SymTensorField operator*(const ScalarField& f, SymTensorField a) {
    for (auto& c : a.comps_) c = f * c;
    if (!a.cf_) a.cf_ = f.conformal_factor();
    return a;
  }

  // Flag bookkeeping for the free functions below. Raw component access
  // drops the certificate.
  void set_boundary_certificate(bool b) { boundary_ = b; }
  std::vector<ScalarField>& mutable_components() {
    boundary_ = false;
    return comps_;
  }

 private:
  std::size_t ordinal(std::span<const int> idx) const {
    if (static_cast<int>(idx.size()) != m_) throw RankError("multi-index length does not match rank");
    for (int i : idx)
      if (i < 0 || i >= n_) throw PreconditionError("multi-index entry out of range");
    return layout(n_, m_).ordinal(idx);
  }

  void check_same(const SymTensorField& o) const {
    if (o.m_ != m_ || o.n_ != n_) throw RankError("tensor rank or dimension mismatch");
    if (cf_ && o.cf_ && cf_ != o.cf_) throw PreconditionError("fields belong to different scenarios");
  }

  int n_ = 0;
  int m_ = 0;
  ConformalFactorPtr cf_;
  std::vector<ScalarField> comps_;
  bool boundary_ = false;
};

// ---------------------------------------------------------------------------
// Constructors.

/// The zero field, which trivially vanishes on ∂M.
inline SymTensorField zero_tensor(const Scenario& sc, int m) {
  SymTensorField z(sc.dim(), m, sc.conformal_factor());
  z.set_boundary_certificate(true);
  return z;
}

inline SymTensorField scalar_tensor(const Scenario& sc, const Polynomial& p) {
  return SymTensorField::scalar(ScalarField::from_polynomial(sc.conformal_factor(), p));
}

inline SymTensorField constant_tensor(const Scenario& sc, double c) {
  return SymTensorField::scalar(sc.constant_field(c));
}

/// Σ_i a_i dx^i with polynomial coefficients.
inline SymTensorField one_form(const Scenario& sc, const std::vector<Polynomial>& a) {
  SymTensorField t = zero_tensor(sc, 1);
  for (int i = 0; i < std::min<int>(sc.dim(), static_cast<int>(a.size())); ++i)
    t.set_component({i}, ScalarField::from_polynomial(sc.conformal_factor(), a[i]));
  return t;
}

inline SymTensorField coordinate_form(const Scenario& sc, int i) {
  std::vector<Polynomial> a(static_cast<std::size_t>(sc.dim()), Polynomial(sc.dim()));
  a[i] = Polynomial::constant(sc.dim(), 1.0);
  return one_form(sc, a);
}

inline SymTensorField omega_form(const Scenario& sc) {
  std::vector<Polynomial> a;
  for (int i = 0; i < sc.dim(); ++i) a.push_back(sc.omega(i));
  return one_form(sc, a);
}

inline SymTensorField metric_tensor(const Scenario& sc) {
  SymTensorField t = zero_tensor(sc, 2);
  for (int i = 0; i < sc.dim(); ++i)
    for (int j = i; j < sc.dim(); ++j) t.set_component({i, j}, sc.metric_field(i, j));
  return t;
}

/// (R² − |x|²)·ξ, certified to vanish on ∂M.
inline SymTensorField vanishing_on_boundary(const Scenario& sc, const SymTensorField& xi) {
  SymTensorField r = sc.boundary_factor() * xi;
  r.set_boundary_certificate(true);
  return r;
}

// ---------------------------------------------------------------------------
// Algebra.

/// Full symmetrization of S ⊗ T.
inline SymTensorField sym_product(const SymTensorField& S, const SymTensorField& T) {
  if (S.dim() != T.dim()) throw PreconditionError("dimension mismatch");
  const int m = S.rank() + T.rank();
  if (m > kMaxRank) throw CapacityError("tensor rank exceeds capacity");
  const ConformalFactorPtr cf = S.conformal_factor() ? S.conformal_factor() : T.conformal_factor();
  SymTensorField r(S.dim(), m, cf);
  r.mutable_components() = detail::sym_product_components(S.components(), S.rank(), T.components(), T.rank(),
                                                          S.dim(), ScalarField(S.dim(), cf));
  r.set_boundary_certificate(S.vanishes_on_boundary() || T.vanishes_on_boundary());
  return r;
}

/// g^k as a symmetric tensor of rank 2k (g^0 = 1).
inline SymTensorField metric_power(const Scenario& sc, int k) {
  SymTensorField r = constant_tensor(sc, 1.0);
  const SymTensorField g = metric_tensor(sc);
  for (int i = 0; i < k; ++i) r = sym_product(r, g);
  return r;
}

/// Symmetrized covariant derivative dˢξ:
/// (dˢξ)_{i_0…i_m} = (1/(m+1)) Σ_r (∇ξ)_{i_r; rest}.
inline SymTensorField dsym(const Scenario& sc, const SymTensorField& xi) {
  const int n = sc.dim(), m = xi.rank();
  if (m + 1 > kMaxRank) throw CapacityError("tensor rank exceeds capacity");
  const auto& L = layout(n, m + 1);
  SymTensorField r = zero_tensor(sc, m + 1);
  auto& out = r.mutable_components();
  // ∇ξ_{k;J} = ∂_k ξ_J − Σ_r Γ^p_{k J_r} ξ_{J[r→p]}
  auto nabla = [&](int k, std::span<const int> J) {
    ScalarField v = xi.component(J).derivative(k);
    std::array<int, kMaxRank> Jp{};
    for (int r = 0; r < m; ++r) {
      std::copy(J.begin(), J.end(), Jp.begin());
      for (int p = 0; p < n; ++p) {
        const ScalarField& G = sc.christoffel_field(p, k, J[r]);
        if (G.is_zero()) continue;
        Jp[r] = p;
        v -= G * xi.component(std::span<const int>(Jp.data(), m));
      }
    }
    return v;
  };
  std::array<int, kMaxRank> rest{};
  for (std::size_t o = 0; o < L.size(); ++o) {
    ScalarField acc(n, sc.conformal_factor());
    for (int r = 0; r <= m; ++r) {
      int q = 0;
      for (int s = 0; s <= m; ++s)
        if (s != r) rest[q++] = L.index[o][s];
      acc += nabla(L.index[o][r], std::span<const int>(rest.data(), m));
    }
    out[o] = acc * (1.0 / (m + 1));
  }
  return r;
}

/// F*(ξ)(v_1…v_m) = (1/m) Σ_r ξ(v_1, …, F v_r, …, v_m); F*(f) = f.
inline SymTensorField fstar(const Scenario& sc, const SymTensorField& xi) {
  const int n = sc.dim(), m = xi.rank();
  if (m == 0) return xi;
  const auto& L = layout(n, m);
  SymTensorField r = zero_tensor(sc, m);
  auto& out = r.mutable_components();
  std::array<int, kMaxRank> J{};
  for (std::size_t o = 0; o < L.size(); ++o) {
    ScalarField acc(n, sc.conformal_factor());
    for (int s = 0; s < m; ++s) {
      for (int t = 0; t < m; ++t) J[t] = L.index[o][t];
      for (int p = 0; p < n; ++p) {
        const ScalarField& F = sc.lorentz_field(p, L.index[o][s]);
        if (F.is_zero()) continue;
        J[s] = p;
        acc += F * xi.component(std::span<const int>(J.data(), m));
      }
    }
    out[o] = acc * (1.0 / m);
  }
  r.set_boundary_certificate(xi.vanishes_on_boundary());
  return r;
}

/// Tr_g ξ = g^{ab} ξ_{ab…}.
inline SymTensorField trace(const Scenario& sc, const SymTensorField& xi) {
  const int n = sc.dim(), m = xi.rank();
  if (m < 2) throw RankError("trace needs rank at least 2");
  std::array<std::array<ScalarField, kMaxDim>, kMaxDim> h;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) h[i][j] = sc.inverse_metric_field(i, j);
  SymTensorField r = zero_tensor(sc, m - 2);
  r.mutable_components() = detail::trace_components(xi.components(), m, n, h, ScalarField(n, sc.conformal_factor()));
  r.set_boundary_certificate(xi.vanishes_on_boundary());
  return r;
}

struct TraceSplit {
  SymTensorField tracefree;  ///< Tr_g(tracefree) = 0
  SymTensorField trace;      ///< Tr_g ξ
  SymTensorField g_factor;   ///< η with ξ = tracefree + η·g
};

/// ξ = ξ^tf + η·g with Tr_g ξ^tf = 0. For rank 2, η = Tr_g ξ / n; in general
/// η solves Tr_g(η·g) = Tr_g ξ, a constant-coefficient system on S^{m−2}
/// because the conformal factors of g and g^{-1} cancel.
inline TraceSplit trace_split(const Scenario& sc, const SymTensorField& xi) {
  const int n = sc.dim(), m = xi.rank();
  if (m < 2) throw RankError("trace split needs rank at least 2");
  const auto& Lk = layout(n, m - 2);
  const std::size_t N = Lk.size();

  std::vector<double> delta(layout(n, 2).size(), 0.0);
  std::array<std::array<double, kMaxDim>, kMaxDim> id{};
  for (int i = 0; i < n; ++i) {
    const int ii[2] = {i, i};
    delta[layout(n, 2).ordinal(ii)] = 1.0;
    id[i][i] = 1.0;
  }
  Eigen::MatrixXd A(N, N);
  for (std::size_t c = 0; c < N; ++c) {
    std::vector<double> e(N, 0.0);
    e[c] = 1.0;
    const auto prod = detail::sym_product_components(e, m - 2, delta, 2, n, 0.0);
    const auto tr = detail::trace_components(prod, m, n, id, 0.0);
    for (std::size_t r = 0; r < N; ++r) A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = tr[r];
  }
  const Eigen::MatrixXd Ainv = A.inverse();

  TraceSplit out;
  out.trace = trace(sc, xi);
  out.g_factor = zero_tensor(sc, m - 2);
  auto& eta = out.g_factor.mutable_components();
  for (std::size_t r = 0; r < N; ++r)
    for (std::size_t c = 0; c < N; ++c) {
      const double a = Ainv(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      if (std::abs(a) < 1e-15) continue;
      eta[r] += out.trace.components()[c] * a;
    }
  out.g_factor.set_boundary_certificate(xi.vanishes_on_boundary());
  out.tracefree = xi - sym_product(out.g_factor, metric_tensor(sc));
  out.tracefree.set_boundary_certificate(xi.vanishes_on_boundary());
  return out;
}

/// l_m h(x, v) = h_x(v, …, v) for a unit vector v.
inline double l_map(const Scenario& sc, const SymTensorField& h, const Vec& x, const Vec& v) {
  if (std::abs(g_norm(sc, x, v) - 1.0) > sc.tol().speed_drift_tol + 1e-14)
    throw PreconditionError("l_map needs a unit vector");
  return h.contract(x, v);
}

/// Largest |ξ| component value at 50 boundary points; the certificate check.
inline double boundary_sup(const Scenario& sc, const SymTensorField& xi) {
  double s = 0.0;
  const int n = sc.dim();
  for (int k = 0; k < 50; ++k) {
    Vec u{};
    for (int i = 0; i < n; ++i) u[i] = std::cos(0.7 * k * (i + 1) + 1.3 * i);
    if (n == 2) u = Vec{std::cos(2.0 * std::numbers::pi * k / 50), std::sin(2.0 * std::numbers::pi * k / 50), 0, 0};
    if (norm(u, n) < 1e-9) continue;
    const Vec x = scaled(sc.radius() / norm(u, n), u);
    for (double v : xi.evaluate(x)) s = std::max(s, std::abs(v));
  }
  return s;
}

}  // namespace magray
