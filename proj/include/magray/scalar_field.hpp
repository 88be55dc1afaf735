#pragma once

#include <cmath>
#include <memory>
#include <utility>
#include <vector>

#include "magray/polynomial.hpp"

namespace magray {

/// The exponent λ of a conformal metric e^{2λ}δ, with its gradient cached.
struct ConformalFactor {
  int n = 0;
  Polynomial lambda;
  std::array<Polynomial, kMaxDim> grad;

  ConformalFactor(int dim, Polynomial lam) : n(dim), lambda(std::move(lam)) {
    for (int k = 0; k < n; ++k) grad[k] = lambda.derivative(k);
  }
};

using ConformalFactorPtr = std::shared_ptr<const ConformalFactor>;

/// Everything a field evaluation needs at one chart point: monomial powers
/// and e^{λ(x)}.
struct PointEval {
  Vec x{};
  int n = 0;
  PowerTable pw;
  double exp_lambda = 1.0;

  PointEval() = default;
  PointEval(const Vec& pt, int dim, const ConformalFactor* cf, int degree)
      : x(pt), n(dim), pw(pt, dim, std::max(degree, cf ? cf->lambda.degree() : 0)) {
    if (cf && !cf->lambda.is_zero()) exp_lambda = std::exp(cf->lambda.evaluate(pw));
  }
};

/// Element of the ring R[x][e^{±λ}]: a finite sum Σ_w e^{wλ(x)} P_w(x).
/// Closed under products and exact partial derivatives, which is what the
/// conformal metric family needs (g, g^{-1} and F all live here).
class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(int n, ConformalFactorPtr cf) : n_(n), cf_(std::move(cf)) {}

  static ScalarField from_polynomial(ConformalFactorPtr cf, Polynomial p, int weight = 0) {
    ScalarField f(p.dim(), std::move(cf));
    f.add_part(weight, std::move(p));
    return f;
  }

  static ScalarField constant(int n, ConformalFactorPtr cf, double c, int weight = 0) {
    return from_polynomial(std::move(cf), Polynomial::constant(n, c), weight);
  }

  int dim() const { return n_; }
  const ConformalFactorPtr& conformal_factor() const { return cf_; }
  const std::vector<std::pair<int, Polynomial>>& parts() const { return parts_; }
  bool is_zero() const { return parts_.empty(); }

  int degree() const {
    int d = 0;
    for (const auto& [w, p] : parts_) d = std::max(d, p.degree());
    return d;
  }

  double evaluate(const PointEval& pe) const {
    double acc = 0.0;
    for (const auto& [w, p] : parts_) {
      const double v = p.evaluate(pe.pw);
      acc += w == 0 ? v : v * std::pow(pe.exp_lambda, w);
    }
    return acc;
  }

  double operator()(const Vec& x) const {
    if (parts_.empty()) return 0.0;
    return evaluate(PointEval(x, n_, cf_.get(), degree()));
  }

  ScalarField derivative(int k) const {
    ScalarField d(n_, cf_);
    for (const auto& [w, p] : parts_) {
      Polynomial q = p.derivative(k);
      if (w != 0) q += static_cast<double>(w) * (cf_->grad[k] * p);
      d.add_part(w, std::move(q));
    }
    return d;
  }

  ScalarField& operator+=(const ScalarField& o) {
    adopt(o);
    for (const auto& [w, p] : o.parts_) add_part(w, p);
    return *this;
  }
  ScalarField& operator-=(const ScalarField& o) { return *this += -o; }
  ScalarField& operator*=(double c) {
    if (c == 0.0) parts_.clear();
    for (auto& [w, p] : parts_) p *= c;
    return *this;
  }
  ScalarField operator-() const {
    ScalarField r = *this;
    for (auto& [w, p] : r.parts_) p = -p;
    return r;
  }

  friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
  friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
  friend ScalarField operator*(ScalarField a, double c) { return a *= c; }
  friend ScalarField operator*(double c, ScalarField a) { return a *= c; }

  friend ScalarField operator*(const ScalarField& a, const ScalarField& b) {
    ScalarField r(a.n_ != 0 ? a.n_ : b.n_, a.cf_ ? a.cf_ : b.cf_);
    if (a.cf_ && b.cf_ && a.cf_ != b.cf_) throw PreconditionError("fields belong to different scenarios");
    for (const auto& [wa, pa] : a.parts_)
      for (const auto& [wb, pb] : b.parts_) r.add_part(wa + wb, pa * pb);
    return r;
  }

  /// Largest coefficient magnitude; a cheap size indicator.
  double max_coeff() const {
    double m = 0.0;
    for (const auto& [w, p] : parts_) m = std::max(m, p.max_coeff());
    return m;
  }

 private:
  void adopt(const ScalarField& o) {
    if (n_ == 0) n_ = o.n_;
    if (!cf_) cf_ = o.cf_;
    else if (o.cf_ && o.cf_ != cf_) throw PreconditionError("fields belong to different scenarios");
  }

  void add_part(int w, Polynomial p) {
    if (!cf_ || cf_->lambda.is_zero()) w = 0;
    if (p.is_zero()) return;
    auto it = std::lower_bound(parts_.begin(), parts_.end(), w,
                               [](const auto& part, int key) { return part.first < key; });
    if (it != parts_.end() && it->first == w) {
      it->second += p;
      if (it->second.is_zero()) parts_.erase(it);
    } else {
      parts_.insert(it, {w, std::move(p)});
    }
  }

  int n_ = 0;
  ConformalFactorPtr cf_;
  std::vector<std::pair<int, Polynomial>> parts_;
};

}  // namespace magray
