#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "magray/polynomial.hpp"

namespace magray {

namespace detail {

/// Polynomials P_k(s) with d^k/ds^k e^{-1/(1-s²)} = P_k(s)(1-s²)^{-2k} e^{-1/(1-s²)}.
inline const std::vector<UPoly>& bump_derivative_polys() {
  static const std::vector<UPoly> table = [] {
    std::vector<UPoly> P{UPoly{{1.0}}};
    const UPoly u{{1.0, 0.0, -1.0}};  // 1 - s²
    const UPoly s{{0.0, 1.0}};
    for (int k = 0; k < 12; ++k) {
      const UPoly& p = P.back();
      UPoly next = p.derivative() * (u * u) + (4.0 * k) * (s * u * p) + (-2.0) * (s * p);
      P.push_back(next);
    }
    return P;
  }();
  return table;
}

}  // namespace detail

/// Smooth time dependence Σ_k P_k(t)·B^{(k)}(t) + Q(t), where B is the bump
/// exp(−1/(1−s²)) on [t0, t1] (s the affine rescaling to [−1, 1], B = 0
/// outside). Closed under d/dt and under products with polynomials.
class TimeProfile {
 public:
  TimeProfile() = default;

  static TimeProfile polynomial(UPoly q) {
    TimeProfile p;
    p.plain_ = std::move(q);
    return p;
  }
  static TimeProfile constant(double c) { return polynomial(UPoly{{c}}); }

  /// q(t)·B(t) on [t0, t1].
  static TimeProfile bump(double t0, double t1, UPoly q = UPoly{{1.0}}) {
    if (!(t1 > t0)) throw PreconditionError("bump interval must have t1 > t0");
    TimeProfile p;
    p.bump_ = Interval{t0, t1};
    p.terms_ = {std::move(q)};
    return p;
  }

  bool has_bump() const { return bump_.has_value(); }
  /// Compactly supported iff the polynomial part is zero.
  bool compact() const { return plain_.is_zero(); }
  double t0() const { return bump_ ? bump_->t0 : -std::numeric_limits<double>::infinity(); }
  double t1() const { return bump_ ? bump_->t1 : std::numeric_limits<double>::infinity(); }
  bool is_zero() const {
    if (!plain_.is_zero()) return false;
    for (const auto& q : terms_)
      if (!q.is_zero()) return false;
    return true;
  }

  double operator()(double t) const {
    double v = plain_(t);
    if (!bump_) return v;
    const double a = bump_->t0, b = bump_->t1;
    const double s = (2.0 * t - a - b) / (b - a);
    if (!(std::abs(s) < 1.0)) return v;
    const double u = 1.0 - s * s;
    const double c = 2.0 / (b - a);
    const auto& P = detail::bump_derivative_polys();
    double ck = 1.0;
    for (std::size_t k = 0; k < terms_.size(); ++k, ck *= c) {
      if (terms_[k].is_zero()) continue;
      // exp(−1/u)·u^{−2k} combined so that large k stays finite near |s| → 1.
      const double bk = ck * P[k](s) * std::exp(-1.0 / u - 2.0 * static_cast<double>(k) * std::log(u));
      v += terms_[k](t) * bk;
    }
    return v;
  }

  TimeProfile derivative() const {
    TimeProfile d;
    d.bump_ = bump_;
    d.plain_ = plain_.derivative();
    if (bump_) {
      if (terms_.size() + 1 >= detail::bump_derivative_polys().size())
        throw CapacityError("bump derivative order exceeds capacity");
      d.terms_.assign(terms_.size() + 1, UPoly{});
      for (std::size_t k = 0; k < terms_.size(); ++k) {
        d.terms_[k] = d.terms_[k] + terms_[k].derivative();
        d.terms_[k + 1] = d.terms_[k + 1] + terms_[k];
      }
    }
    d.trim();
    return d;
  }

  TimeProfile& operator+=(const TimeProfile& o) {
    if (o.bump_) {
      if (bump_ && (bump_->t0 != o.bump_->t0 || bump_->t1 != o.bump_->t1))
        throw PreconditionError("time profiles use different bump intervals");
      bump_ = o.bump_;
      if (terms_.size() < o.terms_.size()) terms_.resize(o.terms_.size());
      for (std::size_t k = 0; k < o.terms_.size(); ++k) terms_[k] = terms_[k] + o.terms_[k];
    }
    plain_ = plain_ + o.plain_;
    trim();
    return *this;
  }
  friend TimeProfile operator+(TimeProfile a, const TimeProfile& b) { return a += b; }

  friend TimeProfile operator*(double c, TimeProfile a) {
    a.plain_ = c * a.plain_;
    for (auto& q : a.terms_) q = c * q;
    a.trim();
    return a;
  }

  friend TimeProfile operator*(const TimeProfile& a, const TimeProfile& b) {
    if (!a.terms_.empty() && !b.terms_.empty())
      throw PreconditionError("products of two bump profiles are not supported");
    const TimeProfile& bumpy = a.terms_.empty() ? b : a;
    const TimeProfile& other = a.terms_.empty() ? a : b;
    TimeProfile r;
    r.bump_ = bumpy.bump_;
    r.plain_ = a.plain_ * b.plain_;
    for (const auto& q : bumpy.terms_) r.terms_.push_back(q * other.plain_);
    r.trim();
    return r;
  }

  friend bool operator==(const TimeProfile& a, const TimeProfile& b) {
    auto same = [](const UPoly& p, const UPoly& q) {
      const std::size_t n = std::max(p.c.size(), q.c.size());
      for (std::size_t k = 0; k < n; ++k) {
        const double x = k < p.c.size() ? p.c[k] : 0.0;
        const double y = k < q.c.size() ? q.c[k] : 0.0;
        if (x != y) return false;
      }
      return true;
    };
    if (!same(a.plain_, b.plain_)) return false;
    const bool ab = !a.terms_.empty(), bb = !b.terms_.empty();
    if (ab != bb) return false;
    if (!ab) return true;
    if (a.bump_->t0 != b.bump_->t0 || a.bump_->t1 != b.bump_->t1) return false;
    if (a.terms_.size() != b.terms_.size()) return false;
    for (std::size_t k = 0; k < a.terms_.size(); ++k)
      if (!same(a.terms_[k], b.terms_[k])) return false;
    return true;
  }

  const UPoly& polynomial_part() const { return plain_; }
  const std::vector<UPoly>& bump_terms() const { return terms_; }

 private:
  struct Interval {
    double t0, t1;
  };

  void trim() {
    while (!terms_.empty() && terms_.back().is_zero()) terms_.pop_back();
    while (!plain_.c.empty() && plain_.c.back() == 0.0) plain_.c.pop_back();
    for (auto& q : terms_)
      while (!q.c.empty() && q.c.back() == 0.0) q.c.pop_back();
    if (terms_.empty()) bump_.reset();
  }

  std::optional<Interval> bump_;
  std::vector<UPoly> terms_;  ///< terms_[k] multiplies B^{(k)}
  UPoly plain_;
};

}  // namespace magray
