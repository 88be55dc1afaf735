#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "magray/geometry.hpp"
#include "magray/random.hpp"
#include "common.hpp"

using namespace magray;
using testing_support::vec2;

TEST(Metric, EuclideanIsIdentityWithZeroChristoffel) {
  const auto sc = testing_support::uniform(0.0);
  const Vec x = vec2(0.3, -0.2);
  const auto m = metric_eval(*sc, x);
  const auto G = christoffel(*sc, x);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      EXPECT_EQ(m.g[i][j], i == j ? 1.0 : 0.0);
      for (int k = 0; k < 2; ++k) {
        EXPECT_EQ(m.dg[k][i][j], 0.0);
        EXPECT_EQ(G[i][j][k], 0.0);
      }
    }
}

TEST(Metric, ConformalChristoffelMatchesClosedForm) {
  // λ = 0.1(x² + y²) + 0.05x, so ∂λ = (0.2x + 0.05, 0.2y) and
  // Γ^i_jk = δ^i_j λ_k + δ^i_k λ_j − δ_jk λ_i.
  const auto sc = testing_support::conformal();
  Rng rng(3);
  for (int trial = 0; trial < 25; ++trial) {
    const Vec x = rng.in_ball(2, 1.0);
    const double dl[2] = {0.2 * x[0] + 0.05, 0.2 * x[1]};
    const double lam = 0.1 * (x[0] * x[0] + x[1] * x[1]) + 0.05 * x[0];
    const auto m = metric_eval(*sc, x);
    EXPECT_NEAR(m.g[0][0], std::exp(2 * lam), 1e-14);
    EXPECT_EQ(m.g[0][1], 0.0);
    const auto G = christoffel(*sc, x);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) {
          const double want = (i == j) * dl[k] + (i == k) * dl[j] - (j == k) * dl[i];
          EXPECT_NEAR(G[i][j][k], want, 1e-13);
        }
  }
}

TEST(Lorentz, UniformFieldIsRotation) {
  // dω = b dx¹∧dx², F = b J with J the rotation by +90°.
  for (double b : {0.25, 0.5, -0.3}) {
    const auto sc = testing_support::uniform(b);
    const auto F = lorentz_map(*sc, vec2(0.1, 0.4));
    EXPECT_NEAR(F[0][0], 0.0, 1e-15);
    EXPECT_NEAR(F[0][1], -b, 1e-15);
    EXPECT_NEAR(F[1][0], b, 1e-15);
    EXPECT_NEAR(F[1][1], 0.0, 1e-15);
  }
}

TEST(Lorentz, ConformalFieldMatchesHandComputation) {
  // dω_12 = ∂₁ω₂ − ∂₂ω₁ = 0.15 − (−0.15 + 0.05x) = 0.3 − 0.05x; F^1_2 = −e^{−2λ} dω_12.
  const auto sc = testing_support::conformal();
  Rng rng(4);
  for (int trial = 0; trial < 25; ++trial) {
    const Vec x = rng.in_ball(2, 1.0);
    const double lam = 0.1 * (x[0] * x[0] + x[1] * x[1]) + 0.05 * x[0];
    const double d = 0.3 - 0.05 * x[0];
    const auto F = lorentz_map(*sc, x);
    EXPECT_NEAR(F[0][1], -std::exp(-2 * lam) * d, 1e-14);
    EXPECT_NEAR(F[1][0], std::exp(-2 * lam) * d, 1e-14);
  }
}

TEST(Lorentz, IsAntisymmetricForTheMetric) {
  const auto sc = testing_support::conformal();
  Rng rng(5);
  for (int trial = 0; trial < 25; ++trial) {
    const Vec x = rng.in_ball(2, 1.0);
    const Vec u = rng.direction(2), w = rng.direction(2);
    const auto F = lorentz_map(*sc, x);
    EXPECT_NEAR(g_inner(*sc, x, apply(F, u, 2), w) + g_inner(*sc, x, u, apply(F, w, 2)), 0.0, 1e-14);
  }
}

TEST(Boundary, DefiningFunctionValues) {
  const auto sc = testing_support::uniform(0.0);
  EXPECT_DOUBLE_EQ(boundary_defining(*sc, Vec{}).rho, 0.5);
  EXPECT_NEAR(boundary_defining(*sc, vec2(0.6, 0.8)).rho, 0.0, 1e-15);
  EXPECT_LT(boundary_defining(*sc, vec2(0.8, 0.8)).rho, 0.0);
}

TEST(Boundary, GradientIsInwardUnitNormalOnBoundary) {
  for (const auto& sc : {testing_support::uniform(0.5), testing_support::conformal()})
    for (int k = 0; k < 12; ++k) {
      const double th = 2 * std::numbers::pi * k / 12;
      const Vec x = vec2(std::cos(th), std::sin(th));
      const auto b = boundary_defining(*sc, x);
      EXPECT_NEAR(g_norm(*sc, x, b.grad), 1.0, 1e-13);
      EXPECT_LT(dot(b.grad, x, 2), 0.0);
    }
}

TEST(Boundary, DifferentialMatchesFiniteDifference) {
  const auto sc = testing_support::conformal();
  Rng rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const Vec x = rng.in_ball(2, 0.9);
    const auto b = boundary_defining(*sc, x);
    for (int k = 0; k < 2; ++k) {
      Vec p = x, m = x;
      p[k] += 1e-6;
      m[k] -= 1e-6;
      EXPECT_NEAR(b.drho[k], (boundary_defining(*sc, p).rho - boundary_defining(*sc, m).rho) / 2e-6, 1e-8);
    }
  }
}

TEST(Convexity, FlatDiskHasUnitMargin) {
  const auto sc = testing_support::uniform(0.0);
  const auto bp = boundary_point_along(*sc, vec2(1, 0));
  const auto r = strict_convexity_check(*sc, bp, bp.tangent_frame[0]);
  EXPECT_TRUE(r.ok);
  EXPECT_NEAR(r.margin, 1.0, 1e-14);
}

TEST(Convexity, UniformFieldMarginIsOneMinusOrPlusB) {
  const double b = 0.5;
  const auto sc = testing_support::uniform(b);
  const auto bp = boundary_point_along(*sc, vec2(0.3, -0.8));
  const Vec t = bp.tangent_frame[0];
  const double m1 = strict_convexity_check(*sc, bp, t).margin;
  const double m2 = strict_convexity_check(*sc, bp, scaled(-1.0, t)).margin;
  EXPECT_NEAR(std::min(m1, m2), 1 - b, 1e-13);
  EXPECT_NEAR(std::max(m1, m2), 1 + b, 1e-13);
}

TEST(Convexity, RejectsNonTangentVector) {
  const auto sc = testing_support::uniform(0.0);
  const auto bp = boundary_point_along(*sc, vec2(1, 0));
  EXPECT_THROW(strict_convexity_check(*sc, bp, bp.nu), PreconditionError);
}

TEST(Scenario, ValidationRejectsBadInput) {
  EXPECT_THROW(make_scenario(uniform_field_spec(1.5)), ScenarioError);  // margin 1 − b < 0
  auto s = uniform_field_spec(0.0);
  s.n = 5;
  EXPECT_THROW(make_scenario(s), CapacityError);
  auto e = uniform_field_spec(0.0);
  e.lambda = Polynomial::variable(2, 0, 0.1);
  EXPECT_THROW(make_scenario(e), ScenarioError);
  auto r = uniform_field_spec(0.0);
  r.radius = -1.0;
  EXPECT_THROW(make_scenario(r), ScenarioError);
}

TEST(Spacetime, MetricHasStationaryForm) {
  // ḡ = −(dt + ω)² + g
  const auto sc = testing_support::conformal();
  const Vec x = vec2(0.2, -0.5);
  const auto G = spacetime_metric(*sc, x);
  const Vec w = omega_at(*sc, x);
  const auto g = metric_eval(*sc, x).g;
  EXPECT_NEAR(G[0][0], -1.0, 1e-15);
  for (int i = 0; i < 2; ++i) {
    EXPECT_NEAR(G[0][i + 1], -w[i], 1e-15);
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(G[i + 1][j + 1], g[i][j] - w[i] * w[j], 1e-15);
  }
}

TEST(Spacetime, ChristoffelMatchesMetricDifferences) {
  const auto sc = testing_support::conformal();
  const Vec x = vec2(0.3, 0.1);
  const auto C = spacetime_christoffel(*sc, x);
  // Γ̄^a_bc = ½ ḡ^{ad}(∂_b ḡ_dc + ∂_c ḡ_db − ∂_d ḡ_bc) with ∂_t = 0; check the
  // lowered form Γ̄_dbc = ḡ_da Γ̄^a_bc.
  const double h = 1e-5;
  std::array<STMat, 3> dG{};
  for (int k = 0; k < 2; ++k) {
    Vec p = x, m = x;
    p[k] += h;
    m[k] -= h;
    const auto Gp = spacetime_metric(*sc, p), Gm = spacetime_metric(*sc, m);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) dG[k + 1][a][b] = (Gp[a][b] - Gm[a][b]) / (2 * h);
  }
  const auto G = spacetime_metric(*sc, x);
  for (int d = 0; d < 3; ++d)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c) {
        double lowered = 0;
        for (int a = 0; a < 3; ++a) lowered += G[d][a] * C[a][b][c];
        const double want = 0.5 * (dG[b][d][c] + dG[c][d][b] - dG[d][b][c]);
        EXPECT_NEAR(lowered, want, 1e-8) << d << b << c;
      }
}
