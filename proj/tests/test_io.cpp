#include <gtest/gtest.h>

#include <charconv>
#include <cmath>
#include <limits>

#include "magray/random.hpp"
#include "common.hpp"

using namespace magray;
using testing_support::vec2;

namespace {

const std::string kSamples = MAGRAY_SAMPLE_DIR;

int schema_line(const std::string& text) {
  try {
    io::parse_scenario(io::parse_text(text, "t.json"));
  } catch (const SchemaError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST(Format, SeventeenSignificantDigitsScientific) {
  EXPECT_EQ(io::format_double(1.0), "1.0000000000000000e+00");
  EXPECT_EQ(io::format_double(-0.5), "-5.0000000000000000e-01");
  EXPECT_EQ(io::format_double(0.0), "0.0000000000000000e+00");
  EXPECT_EQ(io::csv_row({1.0, 2.0}), "1.0000000000000000e+00,2.0000000000000000e+00");
}

TEST(Format, RoundTripsExactly) {
  Rng rng(91);
  for (int k = 0; k < 2000; ++k) {
    const double v = std::ldexp(rng.uniform(-1, 1), static_cast<int>(rng.uniform(-300, 300)));
    const std::string s = io::format_double(v);
    double back = 0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    EXPECT_EQ(back, v) << s;
  }
  const double tiny = std::numeric_limits<double>::denorm_min();
  const std::string s = io::format_double(tiny);
  double back = 0;
  std::from_chars(s.data(), s.data() + s.size(), back);
  EXPECT_EQ(back, tiny);
}

TEST(Json, MalformedInputReportsLine) {
  try {
    io::load(kSamples + "/malformed.json");
    FAIL() << "expected a schema error";
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.line(), 5);
    EXPECT_NE(std::string(e.what()).find("malformed.json:5:"), std::string::npos);
  }
}

TEST(Json, SemanticErrorsPointAtTheKey) {
  EXPECT_EQ(schema_line("{\n  \"n\": 2,\n  \"metric\": {\n    \"family\": \"sphere\"\n  }\n}"), 4);
  EXPECT_EQ(schema_line("{\n  \"n\": 7,\n  \"metric\": {\"family\": \"euclidean\"}\n}"), 2);
  EXPECT_EQ(schema_line("{\n  \"metric\": {\"family\": \"euclidean\"}\n}"), 1);
  EXPECT_EQ(schema_line("{\"n\": 2,\n \"metric\": {\"family\": \"euclidean\", \"lambda_coeffs\": [0, 1]}}"), 2);
  EXPECT_EQ(schema_line("{\"n\": 2, \"metric\": {\"family\": \"euclidean\"},\n\n \"omega\": {\"coeffs\": [[0]]}}"), 3);
  EXPECT_EQ(schema_line("{\"n\": 2, \"metric\": {\"family\": \"euclidean\"},\n \"radius\": -1}"), 2);
}

TEST(Scenario, ShippedUniformFieldsMatchTheDirectConstruction) {
  for (const auto& [name, b] : std::vector<std::pair<std::string, double>>{{"flat", 0.0}, {"field025", 0.25}, {"field05", 0.5}}) {
    const auto sc = testing_support::shipped(name);
    EXPECT_EQ(sc->name(), name);
    const auto direct = testing_support::uniform(b);
    Rng rng(92);
    for (int k = 0; k < 5; ++k) {
      const Vec x = rng.in_ball(2, 1.0);
      const auto F = lorentz_map(*sc, x), G = lorentz_map(*direct, x);
      EXPECT_EQ(F[0][1], G[0][1]);
      EXPECT_EQ(omega_at(*sc, x)[0], omega_at(*direct, x)[0]);
    }
  }
}

TEST(Scenario, ShippedConformalMatchesPolynomials) {
  const auto sc = testing_support::shipped("conformal");
  const auto direct = testing_support::conformal();
  Rng rng(93);
  for (int k = 0; k < 5; ++k) {
    const Vec x = rng.in_ball(2, 1.0);
    EXPECT_NEAR(metric_eval(*sc, x).g[0][0], metric_eval(*direct, x).g[0][0], 1e-15);
    EXPECT_NEAR(omega_at(*sc, x)[1], omega_at(*direct, x)[1], 1e-15);
  }
  EXPECT_EQ(sc->tol().step, 1e-3);
}

TEST(Scenario, InvalidGeometryIsAScenarioError) {
  const auto d = io::parse_text(
      R"({"n": 2, "metric": {"family": "euclidean"}, "omega": {"coeffs": [[0, 0, -0.75], [0, 0.75, 0]]}})", "strong.json");
  EXPECT_THROW(io::load_scenario(d), ScenarioError);
}

TEST(Tensor, OneBasedIndicesAndBoundaryFactor) {
  const auto sc = testing_support::uniform(0.0);
  const auto d = io::parse_text(R"({"rank": 2, "components": {"1,2": [0.5], "2,2": [0, 1]}, "vanish_on_boundary": true})");
  const auto t = io::parse_tensor(d, d.root, *sc);
  EXPECT_TRUE(t.vanishes_on_boundary());
  const Vec x = vec2(0.3, 0.4);
  const double q = 1 - 0.25;
  EXPECT_NEAR(t.component({0, 1})(x), 0.5 * q, 1e-15);
  EXPECT_NEAR(t.component({1, 1})(x), 0.3 * q, 1e-15);
  EXPECT_EQ(t.component({0, 0})(x), 0.0);
}

TEST(Tensor, BadIndicesAreSchemaErrors) {
  const auto sc = testing_support::uniform(0.0);
  for (const char* text : {R"({"rank": 2, "components": {"1,3": [1]}})", R"({"rank": 2, "components": {"1": [1]}})",
                           R"({"rank": 1, "components": {"0": [1]}})", R"({"rank": 1, "components": {"x": [1]}})",
                           R"({"rank": 9, "components": {}})", R"({"rank": 1, "components": {"1": "a"}})"}) {
    const auto d = io::parse_text(text);
    EXPECT_THROW(io::parse_tensor(d, d.root, *sc), SchemaError) << text;
  }
}

TEST(Field, ShapesAreRecognised) {
  const auto sc = testing_support::uniform(0.5);
  EXPECT_EQ(io::parse_field(io::load(kSamples + "/field_one.json"), *sc).kind, "tensor");
  const auto pp = io::parse_field(io::load(kSamples + "/potential_pair_m2.json"), *sc);
  EXPECT_EQ(pp.kind, "potential_pair");
  ASSERT_TRUE(pp.p && pp.q);
  EXPECT_EQ(pp.p->rank(), 2);
  const auto st = io::parse_field(io::load(kSamples + "/spacetime_kernel_m2.json"), *sc);
  EXPECT_EQ(st.kind, "spacetime_kernel");
  ASSERT_TRUE(st.spacetime);
  EXPECT_EQ(st.spacetime->rank(), 2);
  EXPECT_THROW(io::sm_function(st), SchemaError);
}

TEST(Field, ContractViolationsBecomeInputErrors) {
  const auto sc = testing_support::uniform(0.5);
  const auto d = io::parse_text(R"({"potential_pair": {"xi": {"rank": 0, "components": {"": [1]}}}})", "pp.json");
  EXPECT_THROW(io::parse_field(d, *sc), SchemaError);
  const auto e = io::parse_text(R"({"pair": {"p": {"rank": 2, "components": {}}, "q": {"rank": 0, "components": {}}}})");
  EXPECT_THROW(io::parse_field(e, *sc), SchemaError);
}

TEST(Ray, DirectionIsNormalised) {
  const auto sc = testing_support::conformal();
  const auto d = io::parse_text(R"({"x": [0.2, 0.1], "v": [3, 4], "direction": "backward"})");
  const auto r = io::parse_ray(d, *sc);
  EXPECT_NEAR(g_norm(*sc, r.x, r.v), 1.0, 1e-15);
  EXPECT_NEAR(r.v[1] / r.v[0], 4.0 / 3.0, 1e-15);
  EXPECT_EQ(r.direction, -1);
  const auto out = io::parse_text(R"({"x": [2, 0], "v": [1, 0]})");
  EXPECT_THROW(io::parse_ray(out, *sc), SchemaError);
  const auto zero = io::parse_text(R"({"x": [0, 0], "v": [0, 0]})");
  EXPECT_THROW(io::parse_ray(zero, *sc), SchemaError);
}

TEST(Grid, ParsesFanAndInterior) {
  const auto g = io::parse_grid(io::load(kSamples + "/grid_fan32.json"));
  EXPECT_EQ(g.fan.n_points, 32);
  EXPECT_EQ(g.fan.n_dirs, 32);
  EXPECT_EQ(g.fan.times.size(), 8u);
  EXPECT_EQ(g.interior.n_theta, 64);
  EXPECT_THROW(io::parse_grid(io::parse_text(R"({"interior": {"n_theta": 7}})")), SchemaError);
  EXPECT_THROW(io::parse_grid(io::parse_text(R"({"n_points": 0})")), SchemaError);
}
