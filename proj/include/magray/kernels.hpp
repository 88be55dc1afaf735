#pragma once

#include <optional>
#include <string>
#include <vector>

#include "magray/spacetime.hpp"

namespace magray {

/// [p, q] = [dˢξ + (m−2) F*(η) g, dˢη + (m−1) F*(ξ)] with the generators kept.
struct PotentialPair {
  int m = 0;
  SymTensorField p;
  SymTensorField q;
  SymTensorField xi;
  std::optional<SymTensorField> eta;
  std::string tag = "potential_pair";
};

/// ξ of rank m−1 and η of rank m−2 (absent for m ≤ 1), both vanishing on ∂M.
inline PotentialPair potential_pair(const Scenario& sc, const SymTensorField& xi,
                                    const std::optional<SymTensorField>& eta = std::nullopt) {
  const int m = xi.rank() + 1;
  if (!xi.vanishes_on_boundary()) throw ContractError("potential pair generator xi must vanish on the boundary");
  if (eta && !eta->vanishes_on_boundary())
    throw ContractError("potential pair generator eta must vanish on the boundary");
  if (m >= 2 && !eta) throw RankError("potential pairs of rank m >= 2 need eta of rank m - 2");
  if (m <= 1 && eta) throw RankError("potential pairs of rank m <= 1 take no eta");
  if (eta && eta->rank() != m - 2) throw RankError("eta must have rank m - 2");

  PotentialPair r;
  r.m = m;
  r.xi = xi;
  r.eta = eta;
  r.p = dsym(sc, xi);
  if (m <= 1) {
    r.q = zero_tensor(sc, 0);
    return r;
  }
  if (m > 2) r.p += static_cast<double>(m - 2) * sym_product(fstar(sc, *eta), metric_tensor(sc));
  r.q = dsym(sc, *eta) + static_cast<double>(m - 1) * fstar(sc, xi);
  return r;
}

/// The general family Σ_k (dˢξ_{m−2k−1} g^k + (m−2k−2) F*(ξ_{m−2k−2}) g^{k+1},
/// dˢξ_{m−2k−2} g^k + (m−2k−1) F*(ξ_{m−2k−1}) g^k), with gens[i] = ξ_i of rank i
/// (i = 0..m−1). Missing ranks are zero.
inline std::pair<SymTensorField, SymTensorField> potential_family(const Scenario& sc, int m,
                                                                  const std::vector<SymTensorField>& gens) {
  auto gen = [&](int i) -> std::optional<SymTensorField> {
    if (i < 0 || i >= static_cast<int>(gens.size())) return std::nullopt;
    return gens[static_cast<std::size_t>(i)];
  };
  SymTensorField p = zero_tensor(sc, m), q = zero_tensor(sc, m - 1);
  for (int k = 0; k <= (m - 1) / 2; ++k) {
    const SymTensorField gk = metric_power(sc, k);
    if (auto a = gen(m - 2 * k - 1)) {
      p += sym_product(dsym(sc, *a), gk);
      q += static_cast<double>(m - 2 * k - 1) * sym_product(fstar(sc, *a), gk);
    }
    if (auto b = gen(m - 2 * k - 2)) {
      p += static_cast<double>(m - 2 * k - 2) * sym_product(fstar(sc, *b), metric_power(sc, k + 1));
      q += sym_product(dsym(sc, *b), gk);
    }
  }
  return {p, q};
}

/// The collapsed generators ξ = Σ_k ξ_{m−2k−1} g^k, η = Σ_k ξ_{m−2k−2} g^k.
inline std::pair<SymTensorField, SymTensorField> collapse_family(const Scenario& sc, int m,
                                                                 const std::vector<SymTensorField>& gens) {
  SymTensorField xi = zero_tensor(sc, m - 1), eta = zero_tensor(sc, std::max(m - 2, 0));
  for (int k = 0; k <= (m - 1) / 2; ++k) {
    const int a = m - 2 * k - 1, b = m - 2 * k - 2;
    if (a >= 0 && a < static_cast<int>(gens.size())) xi += sym_product(gens[a], metric_power(sc, k));
    if (b >= 0 && b < static_cast<int>(gens.size())) eta += sym_product(gens[b], metric_power(sc, k));
  }
  return {xi, eta};
}

struct SpacetimeKernelElement {
  int m = 0;
  SpacetimeTensor alpha;
  SpacetimeTensor beta;
  std::optional<SpacetimeTensor> xi;
  std::string tag = "spacetime_kernel";
};

/// d̄ˢβ + ξ ḡ with β of rank m−1 vanishing on ∂M and ξ of rank m−2; both
/// compactly supported in time.
inline SpacetimeKernelElement spacetime_kernel(const Scenario& sc, const SpacetimeTensor& beta,
                                               const std::optional<SpacetimeTensor>& xi = std::nullopt) {
  const int m = beta.rank() + 1;
  if (!beta.vanishes_on_boundary()) throw ContractError("spacetime kernel generator beta must vanish on the boundary");
  double lo, hi;
  if (!beta.compact_support(lo, hi)) throw ContractError("beta must be compactly supported in time");
  if (xi) {
    if (xi->rank() != m - 2) throw RankError("xi must have rank m - 2");
    if (!xi->compact_support(lo, hi)) throw ContractError("xi must be compactly supported in time");
  }
  SpacetimeKernelElement e;
  e.m = m;
  e.beta = beta;
  e.xi = xi;
  e.alpha = dsym_spacetime(sc, beta);
  if (xi) e.alpha += sym_product(*xi, spacetime_metric_tensor(sc));
  return e;
}

/// α = d̄ˢ(−β_{m−1} − β_{m−2}(dt + ω)) − (∂_t β_{m−2} + (m−2) F*(β_{m−2})) ḡ for
/// purely spatial p(t)·B generators.
inline SpacetimeTensor reassembled_kernel(const Scenario& sc, const SpacetimeTerm& b1, const SpacetimeTerm& b2) {
  const int m = b1.field.rank() + 1;
  const SpacetimeTensor B1 = SpacetimeTensor::spatial(b1.profile, b1.field);
  const SpacetimeTensor B2 = SpacetimeTensor::spatial(b2.profile, b2.field);
  const SpacetimeTensor dto = st_dt(sc) + st_static(omega_form(sc));
  SpacetimeTensor inner = -1.0 * B1 - sym_product(B2, dto);
  SpacetimeTensor coef = SpacetimeTensor::spatial(b2.profile.derivative(), b2.field);
  if (m > 2) coef += static_cast<double>(m - 2) * SpacetimeTensor::spatial(b2.profile, fstar(sc, b2.field));
  return dsym_spacetime(sc, inner) - sym_product(coef, spacetime_metric_tensor(sc));
}

/// The same tensor written as α₁ dt + α₂ with
/// α₁ = −dˢβ_{m−2} − (m−1)F*(β_{m−1}) − ∂_tβ_{m−1} + ∂_tβ_{m−2} ω,
/// α₂ = −dˢβ_{m−1} − (m−1)ω F*(β_{m−1}) − ω dˢβ_{m−2} − (m−2)F*(β_{m−2}) g − ∂_tβ_{m−2}(g − ω²).
inline SpacetimeTensor expanded_kernel(const Scenario& sc, const SpacetimeTerm& b1, const SpacetimeTerm& b2) {
  const int m = b1.field.rank() + 1;
  const SymTensorField w = omega_form(sc), g = metric_tensor(sc);
  const TimeProfile& p1 = b1.profile;
  const TimeProfile& p2 = b2.profile;
  const TimeProfile d1 = p1.derivative(), d2 = p2.derivative();
  auto S = [](const TimeProfile& p, const SymTensorField& a) { return SpacetimeTensor::spatial(p, a); };

  SpacetimeTensor a1 = -1.0 * S(p2, dsym(sc, b2.field));
  a1 += -static_cast<double>(m - 1) * S(p1, fstar(sc, b1.field));
  a1 += -1.0 * S(d1, b1.field);
  a1 += S(d2, sym_product(b2.field, w));

  SpacetimeTensor a2 = -1.0 * S(p1, dsym(sc, b1.field));
  a2 += -static_cast<double>(m - 1) * S(p1, sym_product(w, fstar(sc, b1.field)));
  a2 += -1.0 * S(p2, sym_product(w, dsym(sc, b2.field)));
  if (m > 2) a2 += -static_cast<double>(m - 2) * S(p2, sym_product(fstar(sc, b2.field), g));
  a2 += -1.0 * S(d2, sym_product(b2.field, g - sym_product(w, w)));

  return sym_product(a1, st_dt(sc)) + a2;
}

}  // namespace magray
