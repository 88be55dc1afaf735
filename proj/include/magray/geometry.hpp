#pragma once

#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "magray/scenario.hpp"

namespace magray {

// ---------------------------------------------------------------------------
// Small dense helpers on the fixed-size arrays.

inline double dot(const Vec& a, const Vec& b, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

inline double norm(const Vec& a, int n) { return std::sqrt(dot(a, a, n)); }

inline double bilinear(const Mat& m, const Vec& u, const Vec& v, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s += m[i][j] * u[i] * v[j];
  return s;
}

inline Vec apply(const Mat& m, const Vec& v, int n) {
  Vec r{};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) r[i] += m[i][j] * v[j];
  return r;
}

inline Vec axpy(double a, const Vec& x, const Vec& y) {
  Vec r{};
  for (int i = 0; i < kMaxDim; ++i) r[i] = a * x[i] + y[i];
  return r;
}

inline Vec scaled(double a, const Vec& x) {
  Vec r{};
  for (int i = 0; i < kMaxDim; ++i) r[i] = a * x[i];
  return r;
}

inline Mat invert(const Mat& m, int n) {
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim> a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = m[i][j];
  const auto inv = a.inverse().eval();
  Mat r{};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) r[i][j] = inv(i, j);
  return r;
}

// ---------------------------------------------------------------------------
// Metric, Christoffel symbols and the Lorentz map.

struct MetricValue {
  Mat g{};
  Tensor3 dg{};  ///< dg[k][i][j] = ∂_k g_ij
};

namespace detail {

inline void check_chart(const Scenario& sc, const Vec& x) {
  if (norm(x, sc.dim()) > sc.chart_limit() * (1.0 + 1e-12))
    throw DomainEscapeError("point outside the extended chart");
}

struct ConformalAt {
  double lambda = 0.0;
  Vec grad{};
  double e2l = 1.0;  ///< e^{2λ}
};

inline ConformalAt conformal_at(const Scenario& sc, const Vec& x) {
  ConformalAt c;
  if (!sc.conformal_factor()) return c;
  const int n = sc.dim();
  const PowerTable pw(x, n, sc.lambda().degree());
  c.lambda = sc.lambda().evaluate(pw);
  for (int k = 0; k < n; ++k) c.grad[k] = sc.lambda_grad(k).evaluate(pw);
  c.e2l = std::exp(2.0 * c.lambda);
  return c;
}

}  // namespace detail

inline MetricValue metric_eval(const Scenario& sc, const Vec& x) {
  const int n = sc.dim();
  const auto c = detail::conformal_at(sc, x);
  MetricValue m;
  for (int i = 0; i < n; ++i) {
    m.g[i][i] = c.e2l;
    for (int k = 0; k < n; ++k) m.dg[k][i][i] = 2.0 * c.grad[k] * c.e2l;
  }
  return m;
}

/// Γ^i_jk = ½ g^{il}(∂_j g_lk + ∂_k g_lj − ∂_l g_jk), from metric_eval.
inline Tensor3 christoffel(const Scenario& sc, const Vec& x) {
  const int n = sc.dim();
  const auto m = metric_eval(sc, x);
  const Mat gi = invert(m.g, n);
  Tensor3 G{};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double s = 0.0;
        for (int l = 0; l < n; ++l) s += gi[i][l] * (m.dg[j][l][k] + m.dg[k][l][j] - m.dg[l][j][k]);
        G[i][j][k] = 0.5 * s;
      }
  return G;
}

/// (dω)_ij at x.
inline Mat domega_at(const Scenario& sc, const Vec& x) {
  const int n = sc.dim();
  Mat d{};
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      d[i][j] = sc.domega(i, j)(x);
      d[j][i] = -d[i][j];
    }
  return d;
}

inline Vec omega_at(const Scenario& sc, const Vec& x) {
  Vec w{};
  for (int i = 0; i < sc.dim(); ++i) w[i] = sc.omega(i)(x);
  return w;
}

/// F^i_j = −g^{ik}(∂_k ω_j − ∂_j ω_k).
inline Mat lorentz_map(const Scenario& sc, const Vec& x) {
  const int n = sc.dim();
  const Mat gi = invert(metric_eval(sc, x).g, n);
  const Mat d = domega_at(sc, x);
  Mat F{};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += gi[i][k] * d[k][j];
      F[i][j] = -s;
    }
  return F;
}

/// Everything the flow right-hand side needs at one point, using the closed
/// conformal forms (cross-checked against christoffel() in the tests).
struct LocalGeometry {
  double e2l = 1.0;
  Vec grad_lambda{};
  Mat F{};
};

inline LocalGeometry local_geometry(const Scenario& sc, const Vec& x) {
  const int n = sc.dim();
  const PowerTable pw(x, n, sc.degree_bound());
  LocalGeometry lg;
  if (sc.conformal_factor()) {
    lg.e2l = std::exp(2.0 * sc.lambda().evaluate(pw));
    for (int k = 0; k < n; ++k) lg.grad_lambda[k] = sc.lambda_grad(k).evaluate(pw);
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double d = sc.domega(i, j).evaluate(pw) / lg.e2l;
      lg.F[i][j] = -d;
      lg.F[j][i] = d;
    }
  return lg;
}

/// g_x(u, v).
inline double g_inner(const Scenario& sc, const Vec& x, const Vec& u, const Vec& v) {
  return detail::conformal_at(sc, x).e2l * dot(u, v, sc.dim());
}

inline double g_norm(const Scenario& sc, const Vec& x, const Vec& v) {
  return std::sqrt(g_inner(sc, x, v, v));
}

// ---------------------------------------------------------------------------
// Boundary geometry.

struct BoundaryValue {
  double rho = 0.0;
  Vec grad{};  ///< g-gradient of ρ
  Vec drho{};  ///< coordinate differential ∂_iρ
};

/// ρ = e^{λ}(R² − |x|²)/(2R): positive inside, zero on ∂M, with g-gradient
/// equal to the inward unit normal on ∂M for both families.
inline BoundaryValue boundary_defining(const Scenario& sc, const Vec& x) {
  const int n = sc.dim();
  const double R = sc.radius();
  const auto c = detail::conformal_at(sc, x);
  const double el = std::exp(c.lambda);
  const double q = (R * R - dot(x, x, n)) / (2.0 * R);
  BoundaryValue b;
  b.rho = el * q;
  for (int i = 0; i < n; ++i) {
    b.drho[i] = el * (c.grad[i] * q - x[i] / R);
    b.grad[i] = b.drho[i] / c.e2l;
  }
  return b;
}

/// Covariant Hessian ∇²ρ_ij = ∂_i∂_jρ − Γ^k_ij ∂_kρ.
inline Mat boundary_hessian(const Scenario& sc, const Vec& x) {
  const int n = sc.dim();
  const double R = sc.radius();
  const auto c = detail::conformal_at(sc, x);
  const double el = std::exp(c.lambda);
  const double q = (R * R - dot(x, x, n)) / (2.0 * R);
  const auto b = boundary_defining(sc, x);
  const Tensor3 G = christoffel(sc, x);
  Mat H{};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double lij = sc.conformal_factor() ? sc.lambda_grad(i).derivative(j)(x) : 0.0;
      const double qi = -x[i] / R, qj = -x[j] / R, qij = i == j ? -1.0 / R : 0.0;
      double h = el * (c.grad[j] * (c.grad[i] * q + qi) + lij * q + c.grad[i] * qj + qij);
      for (int k = 0; k < n; ++k) h -= G[k][i][j] * b.drho[k];
      H[i][j] = h;
    }
  return H;
}

struct BoundaryPoint {
  Vec x{};
  Vec nu{};
  std::vector<Vec> tangent_frame;
};

/// Boundary point at chart position x (|ρ(x)| within precondition_tol).
inline BoundaryPoint make_boundary_point(const Scenario& sc, const Vec& x) {
  const int n = sc.dim();
  const auto b = boundary_defining(sc, x);
  if (std::abs(b.rho) > sc.tol().precondition_tol) throw PreconditionError("point is not on the boundary");
  BoundaryPoint bp;
  bp.x = x;
  bp.nu = scaled(1.0 / g_norm(sc, x, b.grad), b.grad);
  // Gram–Schmidt of the coordinate basis against ν, in the g inner product.
  std::vector<Vec> basis{bp.nu};
  for (int k = 0; k < n && static_cast<int>(basis.size()) < n; ++k) {
    Vec e{};
    e[k] = 1.0;
    for (const auto& f : basis) e = axpy(-g_inner(sc, x, e, f), f, e);
    const double len = g_norm(sc, x, e);
    if (len < 1e-8) continue;
    basis.push_back(scaled(1.0 / len, e));
  }
  bp.tangent_frame.assign(basis.begin() + 1, basis.end());
  return bp;
}

/// Boundary point on the ray from the origin through u.
inline BoundaryPoint boundary_point_along(const Scenario& sc, const Vec& u) {
  const double len = norm(u, sc.dim());
  if (len == 0.0) throw PreconditionError("direction must be nonzero");
  return make_boundary_point(sc, scaled(sc.radius() / len, u));
}

/// Second fundamental form Π(v,v) = −∇²ρ(v,v).
inline double second_fundamental_form(const Scenario& sc, const Vec& x, const Vec& v) {
  return -bilinear(boundary_hessian(sc, x), v, v, sc.dim());
}

struct ConvexityResult {
  double margin = 0.0;
  bool ok = false;
};

/// margin = Π(v,v) − g(F(v), ν) for a unit tangent v at a boundary point.
inline ConvexityResult strict_convexity_check(const Scenario& sc, const BoundaryPoint& bp, const Vec& v) {
  const double tol = sc.tol().precondition_tol;
  if (std::abs(boundary_defining(sc, bp.x).rho) > tol) throw PreconditionError("point is not on the boundary");
  if (std::abs(g_inner(sc, bp.x, v, bp.nu)) > tol) throw PreconditionError("vector is not tangent to the boundary");
  if (std::abs(g_norm(sc, bp.x, v) - 1.0) > tol) throw PreconditionError("vector is not unit");
  const Vec Fv = apply(lorentz_map(sc, bp.x), v, sc.dim());
  ConvexityResult r;
  r.margin = second_fundamental_form(sc, bp.x, v) - g_inner(sc, bp.x, Fv, bp.nu);
  r.ok = r.margin > 0.0;
  return r;
}

// ---------------------------------------------------------------------------
// Spacetime ℝ×M with ḡ = −(dt+ω)² + g. Index 0 is t, index i+1 is x^i.

inline constexpr int kMaxSpacetimeDim = kMaxDim + 1;
using STVec = std::array<double, kMaxSpacetimeDim>;
using STMat = std::array<STVec, kMaxSpacetimeDim>;
using STTensor3 = std::array<STMat, kMaxSpacetimeDim>;

inline STMat spacetime_metric(const Scenario& sc, const Vec& x) {
  const int n = sc.dim();
  const Mat g = metric_eval(sc, x).g;
  const Vec w = omega_at(sc, x);
  STMat G{};
  G[0][0] = -1.0;
  for (int i = 0; i < n; ++i) {
    G[0][i + 1] = G[i + 1][0] = -w[i];
    for (int j = 0; j < n; ++j) G[i + 1][j + 1] = g[i][j] - w[i] * w[j];
  }
  return G;
}

inline double spacetime_inner(const STMat& G, const STVec& a, const STVec& b, int n) {
  double s = 0.0;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) s += G[i][j] * a[i] * b[j];
  return s;
}

/// Christoffel symbols Γ̄^a_bc of ḡ from the closed formulas: Γ̄^t_tt = Γ̄^i_tt = 0,
/// Γ̄^t_ti = ½(dω)_ij ω^j, Γ̄^i_tj = ½(dω)^i_j,
/// Γ̄^i_jk = Γ^i_jk + ½(ω_j (dω)^i_k + ω_k (dω)^i_j),
/// Γ̄^t_ij = (dˢω)_ij + ½(ω_i (dω)_jk + ω_j (dω)_ik) ω^k.
inline STTensor3 spacetime_christoffel(const Scenario& sc, const Vec& x) {
  const int n = sc.dim();
  const Mat gi = invert(metric_eval(sc, x).g, n);
  const Mat d = domega_at(sc, x);
  const Vec w = omega_at(sc, x);
  const Tensor3 G = christoffel(sc, x);
  int wdeg = 0;
  for (int i = 0; i < n; ++i) wdeg = std::max(wdeg, sc.omega(i).degree());
  const PowerTable pw(x, n, wdeg);

  Vec wu{};  // ω^i
  Mat du{};  // (dω)^i_j
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      wu[i] += gi[i][k] * w[k];
      for (int j = 0; j < n; ++j) du[i][j] += gi[i][k] * d[k][j];
    }

  // (dˢω)_ij = ½(∂_iω_j + ∂_jω_i) − Γ^k_ij ω_k
  Mat ds{};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.5 * (sc.omega_partial(i, j).evaluate(pw) + sc.omega_partial(j, i).evaluate(pw));
      for (int k = 0; k < n; ++k) s -= G[k][i][j] * w[k];
      ds[i][j] = s;
    }

  STTensor3 T{};
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += d[i][j] * wu[j];
    T[0][0][i + 1] = T[0][i + 1][0] = 0.5 * s;
    for (int j = 0; j < n; ++j) T[i + 1][0][j + 1] = T[i + 1][j + 1][0] = 0.5 * du[i][j];
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        T[i + 1][j + 1][k + 1] = G[i][j][k] + 0.5 * (w[j] * du[i][k] + w[k] * du[i][j]);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += (w[i] * d[j][k] + w[j] * d[i][k]) * wu[k];
      T[0][i + 1][j + 1] = ds[i][j] + 0.5 * s;
    }
  return T;
}

// ---------------------------------------------------------------------------
// Validation.

/// Rejects scenarios whose metric fails positivity on a sample grid or whose
/// boundary fails strict magnetic convexity on a boundary sample grid.
inline void validate_scenario(const Scenario& sc) {
  const int n = sc.dim();
  const double L = sc.chart_limit();
  constexpr int kGrid = 20;
  std::array<int, kMaxDim> idx{};
  const long total = static_cast<long>(std::pow(kGrid, n));
  for (long c = 0; c < total; ++c) {
    long r = c;
    Vec x{};
    for (int i = 0; i < n; ++i) {
      idx[i] = static_cast<int>(r % kGrid);
      r /= kGrid;
      x[i] = -L + 2.0 * L * idx[i] / (kGrid - 1);
    }
    if (norm(x, n) > L) continue;
    const Mat g = metric_eval(sc, x).g;
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim> a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = g[i][j];
    Eigen::LLT<decltype(a)> llt(a);
    if (llt.info() != Eigen::Success || !std::isfinite(g[0][0]))
      throw ScenarioError("metric is not positive definite on the sample grid");
  }

  for (const auto& [bp, v] : [&] {
         std::vector<std::pair<BoundaryPoint, Vec>> out;
         constexpr int kPts = 64;
         if (n == 2) {
           for (int k = 0; k < kPts; ++k) {
             const double th = 2.0 * std::numbers::pi * k / kPts;
             auto bp = boundary_point_along(sc, Vec{std::cos(th), std::sin(th), 0, 0});
             out.emplace_back(bp, bp.tangent_frame[0]);
             out.emplace_back(bp, scaled(-1.0, bp.tangent_frame[0]));
           }
         } else {
           // Fibonacci-like spread of points; a few tangent directions each.
           for (int k = 0; k < kPts; ++k) {
             Vec u{};
             for (int i = 0; i < n; ++i) u[i] = std::cos(2.0 * std::numbers::pi * (k + 0.5) * (i + 1) * 0.6180339887498949 + i);
             if (norm(u, n) < 1e-6) continue;
             auto bp = boundary_point_along(sc, u);
             for (const auto& e : bp.tangent_frame) {
               out.emplace_back(bp, e);
               out.emplace_back(bp, scaled(-1.0, e));
             }
             for (std::size_t a = 0; a + 1 < bp.tangent_frame.size(); ++a) {
               Vec m = scaled(std::sqrt(0.5), axpy(1.0, bp.tangent_frame[a], bp.tangent_frame[a + 1]));
               out.emplace_back(bp, m);
               out.emplace_back(bp, scaled(-1.0, m));
             }
           }
         }
         return out;
       }()) {
    if (!strict_convexity_check(sc, bp, v).ok) throw ScenarioError("boundary is not strictly magnetic convex");
  }
}

inline ScenarioPtr make_scenario(ScenarioSpec spec) {
  auto sc = std::make_shared<const Scenario>(std::move(spec));
  validate_scenario(*sc);
  return sc;
}

}  // namespace magray
