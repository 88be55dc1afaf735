#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "magray/flow.hpp"
#include "magray/grid.hpp"
#include "magray/parallel.hpp"
#include "magray/spacetime.hpp"

namespace magray {

/// Function on SM.
using SMFunction = std::function<double(const Vec& x, const Vec& v)>;
/// Function on ℝ×SM.
using STFunction = std::function<double(double t, const Vec& x, const Vec& v)>;
/// Function on ℝ×SM evaluated for several times at one (x, v); out[k] = f(t[k], x, v).
using STBatchFunction = std::function<void(std::span<const double> t, const Vec& x, const Vec& v, std::span<double> out)>;

inline STBatchFunction batched(STFunction f) {
  return [f = std::move(f)](std::span<const double> t, const Vec& x, const Vec& v, std::span<double> out) {
    for (std::size_t k = 0; k < t.size(); ++k) out[k] = f(t[k], x, v);
  };
}

struct TransformOptions {
  double h = 0.0;   ///< 0 means the scenario's step
  int threads = 1;
};

/// Traced rays reused by several integrands.
struct RayBundle {
  std::vector<BoundaryRay> rays;
  std::vector<Trajectory> paths;
  double h = 0.0;
};

inline RayBundle trace_rays(const Scenario& sc, std::vector<BoundaryRay> rays, TransformOptions opt = {}) {
  RayBundle b;
  b.h = opt.h > 0.0 ? opt.h : sc.tol().step;
  b.paths.resize(rays.size());
  FlowOptions fo;
  fo.h = b.h;
  parallel_for(rays.size(), opt.threads, [&](std::size_t i) { b.paths[i] = exit_time(sc, rays[i].x, rays[i].v, fo); });
  b.rays = std::move(rays);
  return b;
}

/// ∫ f along one traced trajectory.
inline double integrate_path(const Trajectory& tr, const SMFunction& f) {
  std::vector<double> vals(tr.samples.size());
  for (std::size_t k = 0; k < vals.size(); ++k) vals[k] = f(tr.samples[k].x, tr.samples[k].v);
  return trajectory_integral(vals, tr.h, tr.tail());
}

/// (I f)(x, v) = ∫_0^τ f(φ_s(x, v)) ds for every ray of the bundle.
inline std::vector<double> xray_I(const RayBundle& bundle, const SMFunction& f, int threads = 1) {
  std::vector<double> out(bundle.paths.size());
  parallel_for(out.size(), threads, [&](std::size_t i) { out[i] = integrate_path(bundle.paths[i], f); });
  return out;
}

inline std::vector<double> xray_I(const Scenario& sc, const SMFunction& f, const std::vector<BoundaryRay>& rays,
                                  TransformOptions opt = {}) {
  return xray_I(trace_rays(sc, rays, opt), f, opt.threads);
}

/// l_m p + l_{m−1} q as a function on SM.
inline SMFunction pair_integrand(const SymTensorField& p, const SymTensorField& q) {
  if (p.rank() != q.rank() + 1) throw RankError("I_m needs ranks m and m − 1");
  return [&p, &q](const Vec& x, const Vec& v) { return p.contract(x, v) + q.contract(x, v); };
}

/// I_m[p, q] = I(l_m p + l_{m−1} q).
inline std::vector<double> xray_Im(const RayBundle& bundle, const SymTensorField& p, const SymTensorField& q,
                                   int threads = 1) {
  return xray_I(bundle, pair_integrand(p, q), threads);
}

inline std::vector<double> xray_Im(const Scenario& sc, const SymTensorField& p, const SymTensorField& q,
                                   const std::vector<BoundaryRay>& rays, TransformOptions opt = {}) {
  return xray_Im(trace_rays(sc, rays, opt), p, q, opt.threads);
}

/// (ℒ f)(t, x, v) for every ray and emission time; result[ray][time]. The
/// lifted time along a ray is t + (t(s) − t0), since ∂_t is Killing.
inline std::vector<std::vector<double>> lightray_L(const Scenario& sc, const RayBundle& bundle, const STBatchFunction& f,
                                                   const std::vector<double>& times, int threads = 1) {
  std::vector<std::vector<double>> out(bundle.paths.size(), std::vector<double>(times.size(), 0.0));
  parallel_for(out.size(), threads, [&](std::size_t i) {
    const Trajectory& tr = bundle.paths[i];
    const auto lift = lift_null(sc, 0.0, tr);
    const std::size_t S = tr.samples.size(), T = times.size();
    std::vector<double> vals(S * T), ts(T), row(T);
    for (std::size_t k = 0; k < S; ++k) {
      for (std::size_t j = 0; j < T; ++j) ts[j] = times[j] + lift[k];
      f(ts, tr.samples[k].x, tr.samples[k].v, row);
      for (std::size_t j = 0; j < T; ++j) vals[j * S + k] = row[j];
    }
    for (std::size_t j = 0; j < T; ++j)
      out[i][j] = trajectory_integral(std::span<const double>(vals.data() + j * S, S), tr.h, tr.tail());
  });
  return out;
}

/// T α as a batched function on ℝ×SM: the spatial contractions are computed
/// once per (x, v) and combined with the time profiles for each time.
inline STBatchFunction t_map_function(const Scenario& sc, const SpacetimeTensor& alpha) {
  return [&sc, &alpha](std::span<const double> t, const Vec& x, const Vec& v, std::span<double> out) {
    const int m = alpha.rank();
    const double w = 1.0 - dot(omega_at(sc, x), v, sc.dim());
    std::fill(out.begin(), out.end(), 0.0);
    double wj = 1.0;
    for (int j = 0; j <= m; ++j, wj *= w) {
      const double c = detail::binomial(m, j) * wj;
      for (const auto& term : alpha.part(j)) {
        const double sp = c * term.field.contract(x, v);
        if (sp == 0.0) continue;
        for (std::size_t k = 0; k < t.size(); ++k) out[k] += sp * term.profile(t[k]);
      }
    }
  };
}

/// ℒ_m α = ℒ(T α).
inline std::vector<std::vector<double>> lightray_Lm(const Scenario& sc, const RayBundle& bundle,
                                                    const SpacetimeTensor& alpha, const std::vector<double>& times,
                                                    int threads = 1) {
  return lightray_L(sc, bundle, t_map_function(sc, alpha), times, threads);
}

// ---------------------------------------------------------------------------
// Transport solutions and the generating vector fields.

struct TransportSolutionGrid {
  std::vector<PhasePoint> points;
  std::vector<double> values;
  double h = 0.0;
  std::string source;
};

/// u(x, v) = ∫_0^{τ(x,v)} f(φ_s(x, v)) ds at one point.
inline double transport_value(const Scenario& sc, const SMFunction& f, const Vec& x, const Vec& v, double h = 0.0) {
  FlowOptions fo;
  fo.h = h;
  return integrate_path(exit_time(sc, x, v, fo), f);
}

inline TransportSolutionGrid transport_solve(const Scenario& sc, const SMFunction& f, std::vector<PhasePoint> points,
                                             TransformOptions opt = {}, std::string source = {}) {
  TransportSolutionGrid g;
  g.h = opt.h > 0.0 ? opt.h : sc.tol().step;
  g.values.resize(points.size());
  parallel_for(points.size(), opt.threads,
               [&](std::size_t i) { g.values[i] = transport_value(sc, f, points[i].x, points[i].v, g.h); });
  g.points = std::move(points);
  g.source = std::move(source);
  return g;
}

/// u(t, x, v) = ∫_0^τ f(φ_s(t, x, v)) ds for several t at one (x, v).
inline std::vector<double> transport_value_st(const Scenario& sc, const STBatchFunction& f, std::span<const double> times,
                                              const Vec& x, const Vec& v, double h = 0.0) {
  FlowOptions fo;
  fo.h = h;
  RayBundle b;
  b.paths.push_back(exit_time(sc, x, v, fo));
  const auto r = lightray_L(sc, b, f, std::vector<double>(times.begin(), times.end()));
  return r[0];
}

namespace detail {

inline RayState checked_shift(const Scenario& sc, const Vec& x, const Vec& v, double s) {
  RayState st = propagate(sc, RayState{x, v, 0.0, 0.0}, s, std::abs(s));
  if (boundary_defining(sc, st.x).rho < 0.0) throw StencilError("flow stencil leaves M");
  return st;
}

}  // namespace detail

/// G u by central flow differences of width δ.
inline double apply_G(const Scenario& sc, const SMFunction& u, const Vec& x, const Vec& v, double delta) {
  const RayState p = detail::checked_shift(sc, x, v, delta);
  const RayState m = detail::checked_shift(sc, x, v, -delta);
  return (u(p.x, p.v) - u(m.x, m.v)) / (2.0 * delta);
}

/// X u = (1 − ω(v)) ∂_t u + G u, with central differences in t and along the flow.
inline double apply_X(const Scenario& sc, const STFunction& u, double t, const Vec& x, const Vec& v, double delta) {
  const double w = 1.0 - dot(omega_at(sc, x), v, sc.dim());
  const double dt = (u(t + delta, x, v) - u(t - delta, x, v)) / (2.0 * delta);
  const RayState p = detail::checked_shift(sc, x, v, delta);
  const RayState m = detail::checked_shift(sc, x, v, -delta);
  const double gu = (u(t, p.x, p.v) - u(t, m.x, m.v)) / (2.0 * delta);
  return w * dt + gu;
}

/// d/ds|₀ u(φ_s(t, x, v)) by differencing along the lifted null flow.
inline double apply_X_direct(const Scenario& sc, const STFunction& u, double t, const Vec& x, const Vec& v,
                             double delta) {
  const RayState p = flow_phi(sc, t, x, v, delta);
  const RayState m = flow_phi(sc, t, x, v, -delta);
  return (u(p.t, p.x, p.v) - u(m.t, m.x, m.v)) / (2.0 * delta);
}

// ---------------------------------------------------------------------------
// Time Fourier reduction.

using Complex = std::complex<double>;

/// ∫_a^b e^{−i·freq·t} g(t) dt by composite Simpson on `nodes` (odd) points.
inline std::vector<Complex> time_fourier(const std::vector<double>& samples, double a, double b,
                                         const std::vector<double>& freqs) {
  const std::size_t N = samples.size();
  const double h = (b - a) / static_cast<double>(N - 1);
  std::vector<Complex> out;
  for (double fr : freqs) {
    std::vector<double> re(N), im(N);
    for (std::size_t k = 0; k < N; ++k) {
      const double t = a + h * static_cast<double>(k);
      re[k] = std::cos(fr * t) * samples[k];
      im[k] = -std::sin(fr * t) * samples[k];
    }
    out.emplace_back(simpson(re, h), simpson(im, h));
  }
  return out;
}

/// Uniform time nodes over [a, b].
inline std::vector<double> time_nodes(double a, double b, std::size_t count) {
  std::vector<double> t(count);
  for (std::size_t k = 0; k < count; ++k) t[k] = a + (b - a) * static_cast<double>(k) / static_cast<double>(count - 1);
  return t;
}

using ComplexSMFunction = std::function<Complex(const Vec& x, const Vec& v)>;

/// sup over the samples of |G û + i·freq·(1 − ω(v)) û + f̂|.
inline double attenuated_residual(const Scenario& sc, const ComplexSMFunction& uhat, const ComplexSMFunction& fhat,
                                  double freq, const std::vector<PhasePoint>& points, double delta) {
  double sup = 0.0;
  for (const auto& pt : points) {
    const RayState p = detail::checked_shift(sc, pt.x, pt.v, delta);
    const RayState m = detail::checked_shift(sc, pt.x, pt.v, -delta);
    const Complex gu = (uhat(p.x, p.v) - uhat(m.x, m.v)) / (2.0 * delta);
    const double w = 1.0 - dot(omega_at(sc, pt.x), pt.v, sc.dim());
    const Complex r = gu + Complex(0.0, freq * w) * uhat(pt.x, pt.v) + fhat(pt.x, pt.v);
    sup = std::max(sup, std::abs(r));
  }
  return sup;
}

}  // namespace magray
