#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "magray/flow.hpp"
#include "magray/random.hpp"
#include "common.hpp"

using namespace magray;
using testing_support::vec2;

TEST(Flow, StraightLineIsExact) {
  const auto sc = testing_support::uniform(0.0);
  const Vec x0 = vec2(-0.3, 0.1), v0 = vec2(0.6, 0.8);
  const auto tr = exit_time(*sc, x0, v0);
  for (const auto& st : tr.samples) {
    EXPECT_NEAR(st.x[0], x0[0] + st.s * v0[0], 1e-13);
    EXPECT_NEAR(st.x[1], x0[1] + st.s * v0[1], 1e-13);
  }
}

TEST(Flow, UniformFieldFollowsCircularOrbit) {
  // b = 0.5 from the origin along e₁: x(s) = (2 sin(s/2), 2(1 − cos(s/2))).
  const auto sc = testing_support::uniform(0.5);
  RayState st{Vec{}, vec2(1, 0), 0, 0};
  double worst = 0;
  for (int k = 1; k <= 10; ++k) {
    st = propagate(*sc, st, 0.1, 1e-3);
    const double s = 0.1 * k;
    worst = std::max(worst, std::hypot(st.x[0] - 2 * std::sin(s / 2), st.x[1] - 2 * (1 - std::cos(s / 2))));
    EXPECT_NEAR(st.v[0], std::cos(s / 2), 1e-10);
    EXPECT_NEAR(st.v[1], std::sin(s / 2), 1e-10);
  }
  EXPECT_LE(worst, 1e-10);
}

TEST(ExitTime, ChordsOfTheFlatDisk) {
  const auto sc = testing_support::uniform(0.0);
  EXPECT_NEAR(exit_time(*sc, Vec{}, vec2(1, 0)).exit_time, 1.0, 1e-9);
  EXPECT_NEAR(exit_time(*sc, vec2(-1, 0), vec2(1, 0)).exit_time, 2.0, 1e-9);
  EXPECT_NEAR(enter_time(*sc, Vec{}, vec2(1, 0)).exit_time, 1.0, 1e-9);
  // off-centre chord: from (0, 0.6) along e₁ the exit is at (0.8, 0.6)
  EXPECT_NEAR(exit_time(*sc, vec2(0, 0.6), vec2(1, 0)).exit_time, 0.8, 1e-9);
}

TEST(ExitTime, CircleCircleIntersection) {
  const auto sc = testing_support::uniform(0.5);
  const auto tr = exit_time(*sc, Vec{}, vec2(1, 0));
  EXPECT_NEAR(tr.exit_time, 2 * std::acos(7.0 / 8.0), 1e-8);
  EXPECT_NEAR(norm(tr.exit_state.x, 2), 1.0, 1e-12);
  EXPECT_FALSE(tr.glancing);
}

TEST(ExitTime, BoundaryTangentIsGlancingWithZeroLength) {
  const auto sc = testing_support::uniform(0.0);
  const auto tr = exit_time(*sc, vec2(1, 0), vec2(0, 1));
  EXPECT_EQ(tr.exit_time, 0.0);
  EXPECT_TRUE(tr.glancing);
}

TEST(ExitTime, Preconditions) {
  const auto sc = testing_support::uniform(0.0);
  EXPECT_THROW(exit_time(*sc, vec2(1.05, 0), vec2(1, 0)), PreconditionError);
  EXPECT_THROW(exit_time(*sc, Vec{}, vec2(2, 0)), PreconditionError);
}

TEST(Scattering, DiameterMapsToOppositePoint) {
  const auto sc = testing_support::uniform(0.0);
  const auto r = scattering(*sc, vec2(-1, 0), vec2(1, 0));
  EXPECT_NEAR(r.x[0], 1.0, 1e-12);
  EXPECT_NEAR(r.x[1], 0.0, 1e-12);
  EXPECT_NEAR(r.v[0], 1.0, 1e-12);
  EXPECT_NEAR(r.exit_time, 2.0, 1e-9);
  EXPECT_THROW(scattering(*sc, vec2(-1, 0), vec2(-1, 0)), GlancingError);
}

TEST(Scattering, ReversedFieldRetracesTheRay) {
  // (x, v) ↦ (x', v') under ω, then (x', −v') ↦ (x, −v) under −ω.
  for (const auto& sc : {testing_support::uniform(0.5), testing_support::conformal()}) {
    Rng rng(41);
    for (int trial = 0; trial < 6; ++trial) {
      const double th = rng.uniform(0, 2 * std::numbers::pi), phi = rng.uniform(-1.2, 1.2);
      const auto bp = boundary_point_along(*sc, vec2(std::cos(th), std::sin(th)));
      const Vec v = axpy(std::cos(phi), bp.nu, scaled(std::sin(phi), bp.tangent_frame[0]));
      const auto f = scattering(*sc, bp.x, v);
      const auto b = scattering(*sc, f.x, scaled(-1.0, f.v), -1.0);
      EXPECT_NEAR(b.x[0], bp.x[0], 1e-9);
      EXPECT_NEAR(b.x[1], bp.x[1], 1e-9);
      EXPECT_NEAR(b.v[0], -v[0], 1e-8);
      EXPECT_NEAR(b.v[1], -v[1], 1e-8);
      EXPECT_NEAR(b.exit_time, f.exit_time, 1e-9);
    }
  }
}

TEST(Flow, UnitSpeedIsPreserved) {
  const auto sc = testing_support::conformal();
  Rng rng(42);
  for (int trial = 0; trial < 10; ++trial) {
    const auto [x, v] = rng.unit_vector(*sc, 0.9);
    const auto tr = exit_time(*sc, x, v);
    EXPECT_LE(tr.drift.max_drift, 1e-8);
    for (const auto& st : tr.samples) EXPECT_NEAR(g_norm(*sc, st.x, st.v), 1.0, 1e-8);
  }
}

TEST(NullLift, UniformFieldTimeFromOrigin) {
  // ω(ẋ) = (1 − cos bs)/2 along the orbit, so t(s) = s/2 + sin(bs)/(2b).
  const double b = 0.5;
  const auto sc = testing_support::uniform(b);
  const auto tr = exit_time(*sc, Vec{}, vec2(1, 0));
  const auto t = lift_null(*sc, 0.25, tr);
  for (std::size_t k = 0; k < t.size(); k += 97) {
    const double s = tr.samples[k].s;
    EXPECT_NEAR(t[k], 0.25 + s / 2 + std::sin(b * s) / (2 * b), 1e-11);
  }
  const double S = tr.exit_time;
  EXPECT_NEAR(t.back(), 0.25 + S / 2 + std::sin(b * S) / (2 * b), 1e-11);
}

TEST(NullLift, FlatTimeEqualsArclength) {
  const auto sc = testing_support::uniform(0.0);
  const auto tr = lifted(*sc, 1.0, exit_time(*sc, vec2(0.2, 0.1), vec2(0, 1)));
  for (const auto& st : tr.samples) EXPECT_NEAR(st.t, 1.0 + st.s, 1e-13);
}

TEST(NullLift, FlowPhiAgreesWithLift) {
  const auto sc = testing_support::conformal();
  const Vec x = vec2(0.1, -0.2);
  const Vec v = scaled(1.0 / g_norm(*sc, x, vec2(0.6, 0.8)), vec2(0.6, 0.8));
  const auto tr = exit_time(*sc, x, v);
  const auto t = lift_null(*sc, 0.0, tr);
  const std::size_t k = 400;
  const auto p = flow_phi(*sc, 0.0, x, v, tr.samples[k].s);
  EXPECT_NEAR(p.t, t[k], 1e-10);
  EXPECT_NEAR(p.x[0], tr.samples[k].x[0], 1e-12);
}

TEST(Flow, TrappedRayIsReported) {
  const auto sc = io::load_scenario(io::load(std::string(MAGRAY_SAMPLE_DIR) + "/scenario_trapping.json"));
  EXPECT_THROW(exit_time(*sc, Vec{}, vec2(1, 0)), TrappedRayError);
}

TEST(Flow, LeavingTheChartIsReported) {
  const auto sc = testing_support::uniform(0.0);
  EXPECT_THROW(propagate(*sc, RayState{Vec{}, vec2(1, 0), 0, 0}, 3.0, 1e-2), DomainEscapeError);
}
