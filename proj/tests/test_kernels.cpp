#include <gtest/gtest.h>

#include <cmath>

#include "magray/suite.hpp"
#include "common.hpp"

using namespace magray;
using testing_support::vec2;

namespace {

SymTensorField vanishing(const Scenario& sc, int m, Rng& rng) {
  return vanishing_on_boundary(sc, random_tensor(sc, m, 2, rng));
}

}  // namespace

TEST(PotentialPair, Contracts) {
  const auto sc = testing_support::uniform(0.5);
  Rng rng(71);
  EXPECT_THROW(potential_pair(*sc, random_tensor(*sc, 1, 1, rng), vanishing(*sc, 0, rng)), ContractError);
  EXPECT_THROW(potential_pair(*sc, vanishing(*sc, 1, rng), random_tensor(*sc, 0, 1, rng)), ContractError);
  EXPECT_THROW(potential_pair(*sc, vanishing(*sc, 1, rng)), RankError);
  EXPECT_THROW(potential_pair(*sc, vanishing(*sc, 0, rng), vanishing(*sc, 0, rng)), RankError);
  EXPECT_THROW(potential_pair(*sc, vanishing(*sc, 2, rng), vanishing(*sc, 2, rng)), RankError);
}

TEST(PotentialPair, RanksAndTag) {
  const auto sc = testing_support::conformal();
  Rng rng(72);
  const auto p1 = potential_pair(*sc, vanishing(*sc, 0, rng));
  EXPECT_EQ(p1.m, 1);
  EXPECT_EQ(p1.p.rank(), 1);
  EXPECT_EQ(p1.q.rank(), 0);
  EXPECT_TRUE(p1.q.is_zero());
  const auto p3 = potential_pair(*sc, vanishing(*sc, 2, rng), vanishing(*sc, 1, rng));
  EXPECT_EQ(p3.p.rank(), 3);
  EXPECT_EQ(p3.q.rank(), 2);
  EXPECT_EQ(p3.tag, "potential_pair");
}

TEST(PotentialPair, IntegrandIsAFlowDerivative) {
  // G(l_{m−1}ξ + l_{m−2}η) = l_m p + l_{m−1} q.
  Rng rng(73);
  for (const auto& sc : {testing_support::uniform(0.5), testing_support::conformal()})
    for (int m = 1; m <= 3; ++m) {
      const auto xi = vanishing(*sc, m - 1, rng);
      std::optional<SymTensorField> eta;
      if (m >= 2) eta = vanishing(*sc, m - 2, rng);
      const auto pp = potential_pair(*sc, xi, eta);
      const SMFunction w = [&](const Vec& x, const Vec& v) { return xi.contract(x, v) + (eta ? eta->contract(x, v) : 0.0); };
      for (const auto& pt : interior_samples(*sc, 10, 0.05, 74)) {
        const double g = apply_G(*sc, w, pt.x, pt.v, 1e-3);
        EXPECT_NEAR(g, pp.p.contract(pt.x, pt.v) + pp.q.contract(pt.x, pt.v), 1e-5) << m;
      }
    }
}

TEST(PotentialPair, TransportSolutionIsMinusThePotential) {
  Rng rng(75);
  const auto sc = testing_support::uniform(0.25);
  const auto xi = vanishing(*sc, 1, rng), eta = vanishing(*sc, 0, rng);
  const auto pp = potential_pair(*sc, xi, eta);
  const SMFunction f = [&](const Vec& x, const Vec& v) { return pp.p.contract(x, v) + pp.q.contract(x, v); };
  for (const auto& pt : interior_samples(*sc, 10, 0.1, 76))
    EXPECT_NEAR(transport_value(*sc, f, pt.x, pt.v), -(xi.contract(pt.x, pt.v) + eta.contract(pt.x, pt.v)), 1e-7);
}

TEST(Family, CollapsesToASinglePair) {
  const auto sc = testing_support::conformal();
  Rng rng(77);
  for (int m = 2; m <= 4; ++m) {
    std::vector<SymTensorField> gens;
    for (int i = 0; i < m; ++i) gens.push_back(vanishing(*sc, i, rng));
    const auto [p, q] = potential_family(*sc, m, gens);
    const auto [xi, eta] = collapse_family(*sc, m, gens);
    const auto pp = potential_pair(*sc, xi, eta);
    for (int trial = 0; trial < 5; ++trial) {
      const auto [x, v] = rng.unit_vector(*sc, 0.9);
      EXPECT_NEAR(p.contract(x, v), pp.p.contract(x, v), 1e-11) << m;
      EXPECT_NEAR(q.contract(x, v), pp.q.contract(x, v), 1e-11) << m;
    }
  }
}

TEST(SpacetimeKernel, Contracts) {
  const auto sc = testing_support::uniform(0.5);
  Rng rng(78);
  SpacetimeTensor open(2, 1), raw(2, 1);
  open.add_term(0, TimeProfile::constant(1.0), vanishing(*sc, 1, rng));
  raw.add_term(0, TimeProfile::bump(-1, 1), random_tensor(*sc, 1, 1, rng));
  EXPECT_THROW(spacetime_kernel(*sc, open), ContractError);
  EXPECT_THROW(spacetime_kernel(*sc, raw), ContractError);
  SpacetimeTensor beta(2, 1), wrong(2, 1);
  beta.add_term(0, TimeProfile::bump(-1, 1), vanishing(*sc, 1, rng));
  wrong.add_term(0, TimeProfile::bump(-1, 1), random_tensor(*sc, 1, 1, rng));
  EXPECT_THROW(spacetime_kernel(*sc, beta, wrong), RankError);
  EXPECT_EQ(spacetime_kernel(*sc, beta).alpha.rank(), 2);
}

TEST(SpacetimeKernel, TMapIsLiftedFlowDerivative) {
  // T(d̄ˢβ) = X(Tβ) along the lifted null flow.
  const auto sc = testing_support::conformal();
  Rng rng(79);
  SpacetimeTensor beta(2, 2);
  beta.add_term(0, TimeProfile::bump(-1, 1, UPoly{{1.0, 0.5}}), vanishing(*sc, 2, rng));
  beta.add_term(1, TimeProfile::bump(-1, 1), vanishing(*sc, 1, rng));
  beta.add_term(2, TimeProfile::bump(-0.5, 1.5), vanishing(*sc, 0, rng));
  const auto a = dsym_spacetime(*sc, beta);
  const STFunction Tb = [&](double t, const Vec& x, const Vec& v) { return t_map(*sc, beta, t, x, v); };
  for (const auto& pt : interior_samples(*sc, 10, 0.1, 80)) {
    const double t = rng.uniform(-0.8, 0.8);
    EXPECT_NEAR(apply_X_direct(*sc, Tb, t, pt.x, pt.v, 1e-3), t_map(*sc, a, t, pt.x, pt.v), 1e-5);
  }
}

TEST(SpacetimeKernel, ReassemblyMatchesExpandedForm) {
  Rng rng(81);
  for (const auto& sc : {testing_support::uniform(0.5), testing_support::conformal()})
    for (int m = 2; m <= 3; ++m) {
      const SpacetimeTerm b1{TimeProfile::bump(-1, 1, UPoly{{1.0, 0.2}}), random_tensor(*sc, m - 1, 2, rng)};
      const SpacetimeTerm b2{TimeProfile::bump(-1, 1, UPoly{{0.5}}), random_tensor(*sc, m - 2, 2, rng)};
      const auto r = reassembled_kernel(*sc, b1, b2), e = expanded_kernel(*sc, b1, b2);
      for (int trial = 0; trial < 5; ++trial) {
        const Vec x = rng.in_ball(2, 0.9);
        STVec V{};
        for (int k = 0; k < 3; ++k) V[k] = rng.uniform(-1, 1);
        const double t = rng.uniform(-0.9, 0.9);
        EXPECT_NEAR(r.evaluate(t, x, V), e.evaluate(t, x, V), 1e-11) << m;
      }
    }
}

TEST(Suite, RegistryCoversEverySuite) {
  const auto& reg = suite_registry();
  for (const char* s : {"geometry", "flows", "identities", "kernels", "degree"}) EXPECT_TRUE(reg.count(s)) << s;
  EXPECT_NO_THROW(find_check("kernels.annihilation"));
  EXPECT_THROW(find_check("kernels.nonexistent"), PreconditionError);
  EXPECT_THROW(run_suite("nonexistent", *testing_support::uniform(0.0), SuiteOptions{}), PreconditionError);
}

TEST(Suite, TamperedToleranceFailsInAControlledWay) {
  SuiteOptions o;
  o.tol_scale = 1e-12;
  const auto r = checks::degree_property(*testing_support::uniform(0.0), o);
  EXPECT_FALSE(r.pass);
  EXPECT_TRUE(r.gating);
  EXPECT_EQ(r.id, "degree.degree_property");
}
