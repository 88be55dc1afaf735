#pragma once

#include <string>

#include "magray/io.hpp"

namespace testing_support {

inline magray::ScenarioPtr shipped(const std::string& name) {
  return magray::io::load_scenario(magray::io::load(std::string(MAGRAY_SCENARIO_DIR) + "/" + name + ".json"));
}

inline magray::ScenarioPtr uniform(double b, const std::string& name = "uniform") {
  return magray::make_scenario(magray::uniform_field_spec(b, 1.0, name));
}

/// λ = 0.1|x|² + 0.05x¹, ω = (−0.15x² + 0.05x¹x², 0.15x¹ + 0.05(x²)²).
inline magray::ScenarioSpec conformal_spec() {
  using magray::Polynomial;
  magray::ScenarioSpec s;
  s.name = "conformal";
  s.n = 2;
  s.family = magray::MetricFamily::conformal;
  const Polynomial x = Polynomial::variable(2, 0), y = Polynomial::variable(2, 1);
  s.lambda = 0.1 * (x * x) + 0.1 * (y * y) + 0.05 * x;
  s.omega = {-0.15 * y + 0.05 * (x * y), 0.15 * x + 0.05 * (y * y)};
  return s;
}

inline magray::ScenarioPtr conformal() { return magray::make_scenario(conformal_spec()); }

inline magray::Vec vec2(double a, double b) { return magray::Vec{a, b, 0, 0}; }

}  // namespace testing_support
