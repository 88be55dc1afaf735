#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "magray/errors.hpp"

namespace magray {

/// Largest supported manifold dimension. Points and vectors are stored in
/// fixed-size arrays of this length; entries beyond the scenario dimension
/// stay zero.
inline constexpr int kMaxDim = 4;

/// Largest total degree a polynomial may reach.
inline constexpr int kMaxDegree = 40;

using Exponent = std::array<std::uint8_t, kMaxDim>;
using Vec = std::array<double, kMaxDim>;

inline int total_degree(const Exponent& e) {
  int d = 0;
  for (auto c : e) d += c;
  return d;
}

/// Graded-lex comparison: lower total degree first, then the exponent tuple
/// in descending lexicographic order (x1 before x2 within a degree).
inline bool graded_lex_less(const Exponent& a, const Exponent& b) {
  const int da = total_degree(a), db = total_degree(b);
  if (da != db) return da < db;
  return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
}

/// Monomials of exactly degree `d` in `n` variables, graded-lex order.
inline std::vector<Exponent> monomials_of_degree(int n, int d) {
  std::vector<Exponent> out;
  Exponent e{};
  auto rec = [&](auto&& self, int var, int left) -> void {
    if (var == n - 1) {
      e[var] = static_cast<std::uint8_t>(left);
      out.push_back(e);
      e[var] = 0;
      return;
    }
    for (int k = left; k >= 0; --k) {
      e[var] = static_cast<std::uint8_t>(k);
      self(self, var + 1, left - k);
    }
    e[var] = 0;
  };
  rec(rec, 0, d);
  return out;
}

/// First `count` monomials in graded-lex order.
inline std::vector<Exponent> graded_lex_monomials(int n, std::size_t count) {
  std::vector<Exponent> out;
  for (int d = 0; out.size() < count; ++d) {
    if (d > kMaxDegree) throw CapacityError("polynomial degree exceeds capacity");
    for (const auto& e : monomials_of_degree(n, d)) {
      if (out.size() == count) break;
      out.push_back(e);
    }
  }
  return out;
}

/// Number of monomials of degree <= d in n variables.
inline std::size_t monomial_count(int n, int d) {
  std::size_t c = 1;
  for (int i = 1; i <= n; ++i) c = c * static_cast<std::size_t>(d + i) / static_cast<std::size_t>(i);
  return c;
}

/// Powers x_i^k for k up to a degree bound, shared by every polynomial
/// evaluated at the same point.
struct PowerTable {
  std::array<std::array<double, kMaxDegree + 1>, kMaxDim> p{};
  int degree = 0;

  PowerTable() = default;
  PowerTable(const Vec& x, int n, int deg) : degree(deg) {
    for (int i = 0; i < n; ++i) {
      p[i][0] = 1.0;
      for (int k = 1; k <= deg; ++k) p[i][k] = p[i][k - 1] * x[i];
    }
    for (int i = n; i < kMaxDim; ++i) p[i][0] = 1.0;
  }
};

/// Sparse multivariate polynomial with real coefficients, terms kept in
/// graded-lex order without zero coefficients.
class Polynomial {
 public:
  struct Term {
    Exponent exp{};
    double coeff = 0.0;
  };

  Polynomial() = default;
  explicit Polynomial(int n) : n_(n) { check_dim(n); }

  static Polynomial constant(int n, double c) {
    Polynomial p(n);
    if (c != 0.0) p.terms_.push_back({Exponent{}, c});
    return p;
  }

  static Polynomial variable(int n, int i, double c = 1.0) {
    Exponent e{};
    e[i] = 1;
    return monomial(n, e, c);
  }

  static Polynomial monomial(int n, const Exponent& e, double c) {
    Polynomial p(n);
    if (c != 0.0) p.terms_.push_back({e, c});
    return p;
  }

  /// Dense coefficients indexed by the graded-lex monomial sequence.
  static Polynomial from_graded_lex(int n, std::span<const double> coeffs) {
    Polynomial p(n);
    const auto mons = graded_lex_monomials(n, coeffs.size());
    for (std::size_t k = 0; k < coeffs.size(); ++k)
      if (coeffs[k] != 0.0) p.terms_.push_back({mons[k], coeffs[k]});
    return p;
  }

  /// Inverse of from_graded_lex; trailing zeros are trimmed.
  std::vector<double> to_graded_lex() const {
    if (terms_.empty()) return {};
    const auto mons = graded_lex_monomials(n_, monomial_count(n_, degree()));
    std::vector<double> out(mons.size(), 0.0);
    std::size_t k = 0;
    for (const auto& t : terms_) {
      while (mons[k] != t.exp) ++k;
      out[k] = t.coeff;
    }
    while (!out.empty() && out.back() == 0.0) out.pop_back();
    return out;
  }

  int dim() const { return n_; }
  bool is_zero() const { return terms_.empty(); }
  const std::vector<Term>& terms() const { return terms_; }

  int degree() const { return terms_.empty() ? 0 : total_degree(terms_.back().exp); }

  double coefficient(const Exponent& e) const {
    for (const auto& t : terms_)
      if (t.exp == e) return t.coeff;
    return 0.0;
  }

  double evaluate(const PowerTable& pw) const {
    double acc = 0.0;
    for (const auto& t : terms_) {
      double m = t.coeff;
      for (int i = 0; i < n_; ++i) m *= pw.p[i][t.exp[i]];
      acc += m;
    }
    return acc;
  }

  double operator()(const Vec& x) const {
    if (terms_.empty()) return 0.0;
    return evaluate(PowerTable(x, n_, degree()));
  }

  Polynomial derivative(int k) const {
    Polynomial d(n_);
    for (const auto& t : terms_) {
      if (t.exp[k] == 0) continue;
      Term u = t;
      u.coeff *= t.exp[k];
      u.exp[k] -= 1;
      d.terms_.push_back(u);
    }
    d.normalize();
    return d;
  }

  Polynomial& operator+=(const Polynomial& o) {
    adopt_dim(o);
    terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
    normalize();
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o) { return *this += -o; }
  Polynomial& operator*=(double c) {
    if (c == 0.0) {
      terms_.clear();
      return *this;
    }
    for (auto& t : terms_) t.coeff *= c;
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, double c) { return a *= c; }
  friend Polynomial operator*(double c, Polynomial a) { return a *= c; }
  Polynomial operator-() const {
    Polynomial r = *this;
    for (auto& t : r.terms_) t.coeff = -t.coeff;
    return r;
  }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    Polynomial r(a.n_ != 0 ? a.n_ : b.n_);
    if (a.n_ != 0 && b.n_ != 0 && a.n_ != b.n_) throw PreconditionError("polynomial dimension mismatch");
    r.terms_.reserve(a.terms_.size() * b.terms_.size());
    for (const auto& s : a.terms_)
      for (const auto& t : b.terms_) {
        Term u;
        for (int i = 0; i < kMaxDim; ++i) {
          const int e = s.exp[i] + t.exp[i];
          if (e > kMaxDegree) throw CapacityError("polynomial degree exceeds capacity");
          u.exp[i] = static_cast<std::uint8_t>(e);
        }
        u.coeff = s.coeff * t.coeff;
        r.terms_.push_back(u);
      }
    r.normalize();
    return r;
  }

  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    if (a.terms_.size() != b.terms_.size()) return false;
    for (std::size_t i = 0; i < a.terms_.size(); ++i)
      if (a.terms_[i].exp != b.terms_[i].exp || a.terms_[i].coeff != b.terms_[i].coeff) return false;
    return true;
  }

  /// Largest absolute coefficient.
  double max_coeff() const {
    double m = 0.0;
    for (const auto& t : terms_) m = std::max(m, std::abs(t.coeff));
    return m;
  }

 private:
  static void check_dim(int n) {
    if (n < 0 || n > kMaxDim) throw CapacityError("polynomial dimension out of range");
  }

  void adopt_dim(const Polynomial& o) {
    if (n_ == 0) n_ = o.n_;
    else if (o.n_ != 0 && o.n_ != n_) throw PreconditionError("polynomial dimension mismatch");
  }

  void normalize() {
    std::sort(terms_.begin(), terms_.end(),
              [](const Term& a, const Term& b) { return graded_lex_less(a.exp, b.exp); });
    std::vector<Term> merged;
    merged.reserve(terms_.size());
    for (const auto& t : terms_) {
      if (!merged.empty() && merged.back().exp == t.exp) merged.back().coeff += t.coeff;
      else merged.push_back(t);
    }
    std::erase_if(merged, [](const Term& t) { return t.coeff == 0.0; });
    terms_ = std::move(merged);
  }

  int n_ = 0;
  std::vector<Term> terms_;
};

/// Dense univariate polynomial, coefficients by ascending power.
struct UPoly {
  std::vector<double> c;

  double operator()(double t) const {
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * t + *it;
    return acc;
  }
  UPoly derivative() const {
    UPoly d;
    for (std::size_t k = 1; k < c.size(); ++k) d.c.push_back(c[k] * static_cast<double>(k));
    return d;
  }
  bool is_zero() const {
    return std::all_of(c.begin(), c.end(), [](double v) { return v == 0.0; });
  }
  friend UPoly operator+(const UPoly& a, const UPoly& b) {
    UPoly r;
    r.c.assign(std::max(a.c.size(), b.c.size()), 0.0);
    for (std::size_t k = 0; k < a.c.size(); ++k) r.c[k] += a.c[k];
    for (std::size_t k = 0; k < b.c.size(); ++k) r.c[k] += b.c[k];
    return r;
  }
  friend UPoly operator*(const UPoly& a, const UPoly& b) {
    UPoly r;
    if (a.c.empty() || b.c.empty()) return r;
    r.c.assign(a.c.size() + b.c.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.c.size(); ++i)
      for (std::size_t j = 0; j < b.c.size(); ++j) r.c[i + j] += a.c[i] * b.c[j];
    return r;
  }
  friend UPoly operator*(double s, UPoly a) {
    for (auto& v : a.c) v *= s;
    return a;
  }
};

}  // namespace magray
