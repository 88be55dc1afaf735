#pragma once

#include <cmath>
#include <vector>

#include "magray/geometry.hpp"
#include "magray/quadrature.hpp"

namespace magray {

struct RayState {
  Vec x{};
  Vec v{};
  double t = 0.0;
  double s = 0.0;
};

/// Unit-speed monitoring record: how often v was renormalized and the largest
/// drift | |v|_g − 1 | seen before renormalizing.
struct DriftLog {
  int renormalizations = 0;
  double max_drift = 0.0;
};

struct Trajectory {
  /// States at s = k·h (k = 0..N) followed by the boundary state.
  std::vector<RayState> samples;
  double h = 0.0;  ///< signed step (negative for backward integration)
  double exit_time = 0.0;  ///< arclength to the boundary (τ forward, σ backward)
  RayState exit_state;
  bool glancing = false;
  DriftLog drift;

  std::size_t uniform_count() const { return samples.size() - 1; }
  /// Signed length of the final fractional step.
  double tail() const { return samples.back().s - samples[samples.size() - 2].s; }
};

namespace detail {

struct Deriv {
  Vec dx{};
  Vec dv{};
};

/// ẋ = v, v̇ = −Γ(v, v) + F v. For g = e^{2λ}δ, Γ(v,v)^i = 2 v^i (∇λ·v) − |v|²_δ ∂_iλ.
inline Deriv magnetic_rhs(const Scenario& sc, const Vec& x, const Vec& v, double field_sign) {
  const int n = sc.dim();
  check_chart(sc, x);
  const LocalGeometry lg = local_geometry(sc, x);
  Deriv d;
  d.dx = v;
  const double lv = dot(lg.grad_lambda, v, n);
  const double vv = dot(v, v, n);
  for (int i = 0; i < n; ++i) {
    double a = -(2.0 * v[i] * lv - vv * lg.grad_lambda[i]);
    for (int j = 0; j < n; ++j) a += field_sign * lg.F[i][j] * v[j];
    d.dv[i] = a;
  }
  return d;
}

inline RayState rk4(const Scenario& sc, const RayState& s0, double h, double field_sign) {
  auto add = [](const RayState& a, const Deriv& d, double c) {
    RayState r = a;
    r.x = axpy(c, d.dx, a.x);
    r.v = axpy(c, d.dv, a.v);
    return r;
  };
  const Deriv k1 = magnetic_rhs(sc, s0.x, s0.v, field_sign);
  const RayState a = add(s0, k1, 0.5 * h);
  const Deriv k2 = magnetic_rhs(sc, a.x, a.v, field_sign);
  const RayState b = add(s0, k2, 0.5 * h);
  const Deriv k3 = magnetic_rhs(sc, b.x, b.v, field_sign);
  const RayState c = add(s0, k3, h);
  const Deriv k4 = magnetic_rhs(sc, c.x, c.v, field_sign);
  RayState r = s0;
  for (int i = 0; i < kMaxDim; ++i) {
    r.x[i] += h / 6.0 * (k1.dx[i] + 2.0 * k2.dx[i] + 2.0 * k3.dx[i] + k4.dx[i]);
    r.v[i] += h / 6.0 * (k1.dv[i] + 2.0 * k2.dv[i] + 2.0 * k3.dv[i] + k4.dv[i]);
  }
  r.s = s0.s + h;
  check_chart(sc, r.x);
  return r;
}

}  // namespace detail

/// One classical RK4 step of the Lorentz force equation D_s ẋ = F(ẋ).
/// field_sign = −1 integrates the reversed field (F → −F).
inline RayState step_magnetic(const Scenario& sc, const RayState& state, double h, DriftLog* log = nullptr,
                              double field_sign = 1.0) {
  RayState r = detail::rk4(sc, state, h, field_sign);
  const double speed = g_norm(sc, r.x, r.v);
  const double drift = std::abs(speed - 1.0);
  if (log) log->max_drift = std::max(log->max_drift, drift);
  if (drift > sc.tol().speed_drift_tol) {
    r.v = scaled(1.0 / speed, r.v);
    if (log) ++log->renormalizations;
  }
  return r;
}

/// Free propagation by s (either sign) in steps of at most h, without any
/// boundary checks.
inline RayState propagate(const Scenario& sc, RayState state, double s, double h, DriftLog* log = nullptr,
                          double field_sign = 1.0) {
  const double dir = s < 0 ? -1.0 : 1.0;
  const double len = std::abs(s);
  const auto steps = static_cast<long>(std::floor(len / h + 1e-9));
  const double s0 = state.s;
  for (long k = 0; k < steps; ++k) state = step_magnetic(sc, state, dir * h, log, field_sign);
  const double rest = len - static_cast<double>(steps) * h;
  if (rest > 1e-15 * std::max(1.0, len)) state = step_magnetic(sc, state, dir * rest, log, field_sign);
  state.s = s0 + s;
  return state;
}

struct FlowOptions {
  double h = 0.0;           ///< 0 means the scenario's step
  double field_sign = 1.0;  ///< −1 reverses the magnetic field
  bool record = true;       ///< keep the uniform samples
};

/// Integrates from (x, v) in direction `dir` (+1 forward, −1 backward) until
/// the boundary is crossed, then locates the crossing by bisection over a
/// fractional RK4 step from the last sample.
inline Trajectory integrate_to_boundary(const Scenario& sc, const Vec& x, const Vec& v, int dir,
                                        FlowOptions opt = {}) {
  const auto& tol = sc.tol();
  const double h = (opt.h > 0.0 ? opt.h : tol.step) * (dir < 0 ? -1.0 : 1.0);
  const auto b0 = boundary_defining(sc, x);
  if (b0.rho < -tol.precondition_tol) throw PreconditionError("start point lies outside M");
  if (std::abs(g_norm(sc, x, v) - 1.0) > tol.precondition_tol) throw PreconditionError("start vector is not unit");

  Trajectory tr;
  tr.h = h;
  RayState cur{x, v, 0.0, 0.0};
  tr.samples.push_back(cur);

  auto transversal = [&](const RayState& st) {
    const auto b = boundary_defining(sc, st.x);
    const Vec nu = scaled(1.0 / g_norm(sc, st.x, b.grad), b.grad);
    return g_inner(sc, st.x, st.v, nu);
  };

  // Starting on the boundary pointing outwards (in the direction of travel):
  // nothing to integrate.
  if (b0.rho <= tol.boundary_tol && dir * transversal(cur) <= 0.0) {
    tr.exit_time = 0.0;
    tr.exit_state = cur;
    tr.samples.push_back(cur);
    tr.glancing = std::abs(transversal(cur)) < tol.glancing_eps;
    return tr;
  }
  const bool started_on_boundary = b0.rho <= tol.boundary_tol;
  const double start_trans = std::abs(transversal(cur));

  const double budget = tol.trap_budget * sc.radius();
  RayState lo, hi;
  double hb = 0.0;
  for (;;) {
    if (std::abs(cur.s) > budget) throw TrappedRayError("ray did not leave M within the arclength budget");
    RayState next = step_magnetic(sc, cur, h, &tr.drift, opt.field_sign);
    const double rn = boundary_defining(sc, next.x).rho;
    if (rn < 0.0) {
      lo = cur;
      hb = h;
      break;
    }
    if (rn < 4.0 * std::abs(h)) {
      // Near the boundary a short excursion outside could fit inside one step.
      const RayState half = step_magnetic(sc, cur, 0.5 * h, nullptr, opt.field_sign);
      if (boundary_defining(sc, half.x).rho < 0.0) {
        lo = cur;
        hb = 0.5 * h;
        break;
      }
    }
    cur = next;
    if (opt.record) tr.samples.push_back(cur);
  }
  if (!opt.record) {
    tr.samples.clear();
    tr.samples.push_back(lo);
  }

  // Bisection on the fractional step θ ∈ (0, hb].
  double a = 0.0, b = hb;
  hi = step_magnetic(sc, lo, hb, nullptr, opt.field_sign);
  RayState best = lo;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (a + b);
    if (mid == a || mid == b) break;
    const RayState ms = step_magnetic(sc, lo, mid, nullptr, opt.field_sign);
    const double rm = boundary_defining(sc, ms.x).rho;
    if (rm >= 0.0) {
      a = mid;
      best = ms;
      if (rm <= 0.01 * tol.boundary_tol) break;
    } else {
      b = mid;
      hi = ms;
    }
  }
  if (a == 0.0) best = lo;
  // Prefer the inside endpoint; fall back to the outside one if it is closer.
  const double rb = boundary_defining(sc, best.x).rho;
  const double rh = boundary_defining(sc, hi.x).rho;
  RayState exit = rb <= -rh ? best : hi;
  if (std::abs(boundary_defining(sc, exit.x).rho) > tol.boundary_tol)
    throw PreconditionError("boundary crossing could not be resolved to boundary_tol");

  tr.exit_state = exit;
  tr.samples.push_back(exit);
  tr.exit_time = std::abs(exit.s);
  const double tr_exit = std::abs(transversal(exit));
  tr.glancing = tr_exit < tol.glancing_eps || (started_on_boundary && start_trans < tol.glancing_eps);
  return tr;
}

/// τ(x, v) with the boundary state.
inline Trajectory exit_time(const Scenario& sc, const Vec& x, const Vec& v, FlowOptions opt = {}) {
  return integrate_to_boundary(sc, x, v, +1, opt);
}

/// σ(x, v): the same equation integrated with negative step.
inline Trajectory enter_time(const Scenario& sc, const Vec& x, const Vec& v, FlowOptions opt = {}) {
  return integrate_to_boundary(sc, x, v, -1, opt);
}

/// t(s) = t0 + s − ∫_0^s ω(ẋ) dσ at every sample of the trajectory.
inline std::vector<double> lift_null(const Scenario& sc, double t0, const Trajectory& tr) {
  std::vector<double> f(tr.samples.size());
  for (std::size_t k = 0; k < f.size(); ++k) {
    const auto& st = tr.samples[k];
    f[k] = 1.0 - dot(omega_at(sc, st.x), st.v, sc.dim());
  }
  auto t = cumulative_integral(f, tr.h, tr.tail());
  for (auto& v : t) v += t0;
  return t;
}

/// Trajectory with the lifted time written into each sample.
inline Trajectory lifted(const Scenario& sc, double t0, Trajectory tr) {
  const auto t = lift_null(sc, t0, tr);
  for (std::size_t k = 0; k < t.size(); ++k) tr.samples[k].t = t[k];
  tr.exit_state.t = t.back();
  return tr;
}

struct ScatteringResult {
  Vec x{};
  Vec v{};
  double exit_time = 0.0;
};

/// α(x, v) = (γ(τ), γ̇(τ)) for an inward, non-glancing boundary vector.
inline ScatteringResult scattering(const Scenario& sc, const Vec& x, const Vec& v, double field_sign = 1.0) {
  const auto b = boundary_defining(sc, x);
  if (std::abs(b.rho) > sc.tol().boundary_tol + sc.tol().precondition_tol)
    throw PreconditionError("scattering needs a boundary point");
  const Vec nu = scaled(1.0 / g_norm(sc, x, b.grad), b.grad);
  if (g_inner(sc, x, v, nu) < sc.tol().glancing_eps) throw GlancingError("direction is glancing or outgoing");
  FlowOptions opt;
  opt.field_sign = field_sign;
  opt.record = false;
  const auto tr = exit_time(sc, x, v, opt);
  return {tr.exit_state.x, tr.exit_state.v, tr.exit_time};
}

/// Normalized null flow φ_s(t, x, v) = (t(s), φ_s(x, v)); s must keep the
/// curve inside M.
inline RayState flow_phi(const Scenario& sc, double t, const Vec& x, const Vec& v, double s) {
  const double h = sc.tol().step;
  const double dir = s < 0 ? -1.0 : 1.0;
  const auto steps = static_cast<long>(std::floor(std::abs(s) / h + 1e-9));
  const double rest = std::abs(s) - static_cast<double>(steps) * h;
  Trajectory tr;
  tr.h = dir * h;
  RayState cur{x, v, t, 0.0};
  tr.samples.push_back(cur);
  auto inside = [&](const RayState& st) {
    if (boundary_defining(sc, st.x).rho < -sc.tol().precondition_tol)
      throw PreconditionError("flow parameter leaves M");
  };
  inside(cur);
  for (long k = 0; k < steps; ++k) {
    cur = step_magnetic(sc, cur, dir * h);
    inside(cur);
    tr.samples.push_back(cur);
  }
  RayState last = rest > 0.0 ? step_magnetic(sc, cur, dir * rest) : cur;
  inside(last);
  last.s = s;
  tr.samples.push_back(last);
  const auto ts = lift_null(sc, t, tr);
  last.t = ts.back();
  return last;
}

}  // namespace magray
