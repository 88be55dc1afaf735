#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "magray/grid.hpp"
#include "magray/kernels.hpp"
#include "magray/suite.hpp"

namespace magray::io {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Number formatting: 17 significant digits, scientific, locale-free.

inline std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific, 16);
  return std::string(buf, r.ptr);
}

/// Comma-separated row of formatted numbers.
inline std::string csv_row(const std::vector<double>& vals) {
  std::string s;
  for (std::size_t k = 0; k < vals.size(); ++k) {
    if (k) s += ',';
    s += format_double(vals[k]);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Documents with line-anchored diagnostics.

/// A parsed JSON file together with its text, so that schema violations can
/// point at the offending line.
struct Document {
  std::string path;
  std::string text;
  json root;

  /// Line of the first occurrence of "key" in the text (1 if not found).
  int line_of(const std::string& key) const {
    const auto pos = text.find('"' + key + '"');
    if (pos == std::string::npos) return 1;
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
  }

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    const int line = line_of(key);
    throw SchemaError(path + ":" + std::to_string(line) + ": " + msg, line);
  }
};

inline Document parse_text(std::string text, std::string path = "<input>") {
  Document d;
  d.path = std::move(path);
  d.text = std::move(text);
  try {
    d.root = json::parse(d.text);
  } catch (const json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte, d.text.size());
    const int line = 1 + static_cast<int>(std::count(d.text.begin(), d.text.begin() + static_cast<std::ptrdiff_t>(upto), '\n'));
    throw SchemaError(d.path + ":" + std::to_string(line) + ": malformed JSON", line);
  }
  return d;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError(path + ": cannot open file", 0);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Document load(const std::string& path) { return parse_text(read_file(path), path); }

namespace detail {

inline const json& require(const Document& d, const json& obj, const std::string& key) {
  if (!obj.is_object()) d.fail(key, "expected an object holding \"" + key + "\"");
  const auto it = obj.find(key);
  if (it == obj.end()) d.fail(key, "missing required key \"" + key + "\"");
  return *it;
}

inline double number(const Document& d, const json& v, const std::string& key) {
  if (!v.is_number()) d.fail(key, "\"" + key + "\" must be a number");
  return v.get<double>();
}

inline int integer(const Document& d, const json& v, const std::string& key) {
  if (!v.is_number_integer()) d.fail(key, "\"" + key + "\" must be an integer");
  return v.get<int>();
}

inline std::vector<double> numbers(const Document& d, const json& v, const std::string& key) {
  if (!v.is_array()) d.fail(key, "\"" + key + "\" must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) d.fail(key, "\"" + key + "\" must contain only numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

inline Polynomial polynomial(const Document& d, const json& v, int n, const std::string& key) {
  const auto c = numbers(d, v, key);
  try {
    return Polynomial::from_graded_lex(n, c);
  } catch (const Error& e) {
    d.fail(key, e.what());
  }
}

inline double optional_number(const Document& d, const json& obj, const std::string& key, double fallback) {
  const auto it = obj.find(key);
  return it == obj.end() ? fallback : number(d, *it, key);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Scenario.

/// {"name", "n", "metric": {"family": "euclidean" | "conformal", "lambda_coeffs": [..]},
///  "omega": {"coeffs": [[..], ..]}, "radius", "tolerances": {..}}; polynomial
/// coefficients are dense in graded-lex order.
inline ScenarioSpec parse_scenario(const Document& d) {
  using namespace detail;
  const json& r = d.root;
  if (!r.is_object()) d.fail("n", "scenario must be a JSON object");
  ScenarioSpec s;
  s.name = r.value("name", std::string("scenario"));
  s.n = integer(d, require(d, r, "n"), "n");
  if (s.n < 2 || s.n > kMaxDim) d.fail("n", "\"n\" must lie in [2, " + std::to_string(kMaxDim) + "]");
  const json& met = require(d, r, "metric");
  const std::string fam = met.value("family", std::string("euclidean"));
  if (fam == "euclidean") s.family = MetricFamily::euclidean;
  else if (fam == "conformal") s.family = MetricFamily::conformal;
  else d.fail("family", "unknown metric family \"" + fam + "\"");
  s.lambda = Polynomial(s.n);
  if (met.contains("lambda_coeffs")) s.lambda = polynomial(d, met["lambda_coeffs"], s.n, "lambda_coeffs");
  if (s.family == MetricFamily::euclidean && !s.lambda.is_zero())
    d.fail("lambda_coeffs", "the euclidean family takes no conformal exponent");
  s.omega.assign(static_cast<std::size_t>(s.n), Polynomial(s.n));
  if (r.contains("omega")) {
    const json& w = require(d, r["omega"], "coeffs");
    if (!w.is_array() || static_cast<int>(w.size()) != s.n) d.fail("coeffs", "\"omega.coeffs\" must hold n coefficient lists");
    for (int i = 0; i < s.n; ++i) s.omega[static_cast<std::size_t>(i)] = polynomial(d, w[static_cast<std::size_t>(i)], s.n, "coeffs");
  }
  s.radius = optional_number(d, r, "radius", 1.0);
  if (!(s.radius > 0.0)) d.fail("radius", "\"radius\" must be positive");
  if (r.contains("tolerances")) {
    const json& t = r["tolerances"];
    if (!t.is_object()) d.fail("tolerances", "\"tolerances\" must be an object");
    auto& tol = s.tolerances;
    tol.step = optional_number(d, t, "step", tol.step);
    tol.boundary_tol = optional_number(d, t, "boundary_tol", tol.boundary_tol);
    tol.glancing_eps = optional_number(d, t, "glancing_eps", tol.glancing_eps);
    tol.speed_drift_tol = optional_number(d, t, "speed_drift_tol", tol.speed_drift_tol);
    tol.precondition_tol = optional_number(d, t, "precondition_tol", tol.precondition_tol);
    tol.trap_budget = optional_number(d, t, "trap_budget", tol.trap_budget);
    tol.chart_margin = optional_number(d, t, "chart_margin", tol.chart_margin);
    if (!(tol.step > 0.0)) d.fail("step", "\"step\" must be positive");
  }
  return s;
}

/// Parsed and validated scenario; validation failures keep the file name.
inline ScenarioPtr load_scenario(const Document& d) {
  ScenarioSpec spec = parse_scenario(d);
  try {
    return make_scenario(std::move(spec));
  } catch (const ScenarioError& e) {
    throw ScenarioError(d.path + ": " + e.what());
  }
}

inline json tolerances_json(const Tolerances& t) {
  return {{"step", t.step},
          {"boundary_tol", t.boundary_tol},
          {"glancing_eps", t.glancing_eps},
          {"speed_drift_tol", t.speed_drift_tol},
          {"precondition_tol", t.precondition_tol},
          {"trap_budget", t.trap_budget},
          {"chart_margin", t.chart_margin}};
}

// ---------------------------------------------------------------------------
// Tensor fields.

/// {"rank": m, "components": {"i,j,..": [coeffs]}, "vanish_on_boundary": bool}
/// with 1-based indices. With vanish_on_boundary the listed field is the
/// generator ζ and the result is (R² − |x|²)·ζ, certified to vanish on ∂M.
inline SymTensorField parse_tensor(const Document& d, const json& v, const Scenario& sc) {
  using namespace detail;
  const int n = sc.dim();
  const int m = integer(d, require(d, v, "rank"), "rank");
  if (m < 0 || m > kMaxRank) d.fail("rank", "\"rank\" must lie in [0, " + std::to_string(kMaxRank) + "]");
  SymTensorField t = zero_tensor(sc, m);
  const json& comps = require(d, v, "components");
  if (!comps.is_object()) d.fail("components", "\"components\" must be an object keyed by index lists");
  for (const auto& [key, coeffs] : comps.items()) {
    std::vector<int> idx;
    std::stringstream ss(key);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      int k = 0;
      const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), k);
      if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size() || k < 1 || k > n)
        d.fail(key, "bad component index \"" + key + "\"");
      idx.push_back(k - 1);
    }
    if (m == 0 && key.empty()) idx.clear();
    if (static_cast<int>(idx.size()) != m) d.fail(key, "component \"" + key + "\" does not match rank");
    t.set_component(std::span<const int>(idx.data(), idx.size()),
                    ScalarField::from_polynomial(sc.conformal_factor(), polynomial(d, coeffs, n, key)));
  }
  if (v.value("vanish_on_boundary", false)) return vanishing_on_boundary(sc, t);
  return t;
}

inline TimeProfile parse_profile(const Document& d, const json& v) {
  using namespace detail;
  const std::string kind = v.value("kind", std::string("polynomial"));
  UPoly q{{1.0}};
  if (v.contains("poly")) q.c = numbers(d, v["poly"], "poly");
  if (kind == "polynomial") return TimeProfile::polynomial(q);
  if (kind == "bump") {
    const double t0 = number(d, require(d, v, "t0"), "t0");
    const double t1 = number(d, require(d, v, "t1"), "t1");
    if (!(t1 > t0)) d.fail("t1", "bump needs t1 > t0");
    return TimeProfile::bump(t0, t1, q);
  }
  d.fail("kind", "unknown time profile kind \"" + kind + "\"");
}

/// {"rank": m, "parts": [{"j": dt power, "field": tensor, "time_profile": {..}}]}.
inline SpacetimeTensor parse_spacetime(const Document& d, const json& v, const Scenario& sc) {
  using namespace detail;
  const int m = integer(d, require(d, v, "rank"), "rank");
  if (m < 0 || m > kMaxRank) d.fail("rank", "\"rank\" out of range");
  SpacetimeTensor s(sc.dim(), m);
  const json& parts = require(d, v, "parts");
  if (!parts.is_array()) d.fail("parts", "\"parts\" must be an array");
  for (const auto& p : parts) {
    const int j = integer(d, require(d, p, "j"), "j");
    const SymTensorField f = parse_tensor(d, require(d, p, "field"), sc);
    const TimeProfile prof = p.contains("time_profile") ? parse_profile(d, p["time_profile"]) : TimeProfile::constant(1.0);
    if (j < 0 || j > m || f.rank() + j != m) d.fail("j", "part rank plus dt power must equal the tensor rank");
    s.add_term(j, prof, f);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Field files for the transforms.

/// What a field file describes: a function on SM (I, Im, transport, spectrum)
/// or on ℝ×SM (L, Lm).
struct FieldSpec {
  std::string kind;  ///< "tensor" | "pair" | "potential_pair" | "spacetime" | "spacetime_kernel"
  std::optional<SymTensorField> tensor;
  std::optional<SymTensorField> p, q;
  std::optional<PotentialPair> pair;
  std::optional<SpacetimeTensor> spacetime;
};

/// Accepted shapes:
///  {"tensor": T}                          l_m T
///  {"pair": {"p": T, "q": T}}             l_m p + l_{m−1} q
///  {"potential_pair": {"xi": T, "eta": T}}  the pair built from generators
///  {"spacetime": S}                       T S
///  {"spacetime_kernel": {"beta": S, "xi": S}}  T(d̄ˢβ + ξḡ)
inline FieldSpec parse_field(const Document& d, const Scenario& sc) {
  using namespace detail;
  const json& r = d.root;
  FieldSpec f;
  try {
    if (r.contains("tensor")) {
      f.kind = "tensor";
      f.tensor = parse_tensor(d, r["tensor"], sc);
    } else if (r.contains("pair")) {
      f.kind = "pair";
      f.p = parse_tensor(d, require(d, r["pair"], "p"), sc);
      f.q = parse_tensor(d, require(d, r["pair"], "q"), sc);
      if (f.p->rank() != f.q->rank() + 1) d.fail("q", "pair ranks must be m and m - 1");
    } else if (r.contains("potential_pair")) {
      f.kind = "potential_pair";
      const json& g = r["potential_pair"];
      const SymTensorField xi = parse_tensor(d, require(d, g, "xi"), sc);
      std::optional<SymTensorField> eta;
      if (g.contains("eta")) eta = parse_tensor(d, g["eta"], sc);
      f.pair = potential_pair(sc, xi, eta);
      f.p = f.pair->p;
      f.q = f.pair->q;
    } else if (r.contains("spacetime")) {
      f.kind = "spacetime";
      f.spacetime = parse_spacetime(d, r["spacetime"], sc);
    } else if (r.contains("spacetime_kernel")) {
      f.kind = "spacetime_kernel";
      const json& g = r["spacetime_kernel"];
      const SpacetimeTensor beta = parse_spacetime(d, require(d, g, "beta"), sc);
      std::optional<SpacetimeTensor> xi;
      if (g.contains("xi")) xi = parse_spacetime(d, g["xi"], sc);
      f.spacetime = spacetime_kernel(sc, beta, xi).alpha;
    } else {
      d.fail("tensor", "field file needs one of tensor, pair, potential_pair, spacetime, spacetime_kernel");
    }
  } catch (const SchemaError&) {
    throw;
  } catch (const Error& e) {
    // Contract and rank violations in well-formed JSON are input errors too.
    throw SchemaError(d.path + ":1: " + e.what(), 1);
  }
  return f;
}

/// The field as a function on SM (throws for spacetime fields).
inline SMFunction sm_function(const FieldSpec& f) {
  if (f.tensor) return [t = *f.tensor](const Vec& x, const Vec& v) { return t.contract(x, v); };
  if (f.p && f.q) {
    return [p = *f.p, q = *f.q](const Vec& x, const Vec& v) { return p.contract(x, v) + q.contract(x, v); };
  }
  throw SchemaError("field is not a function on SM", 1);
}

// ---------------------------------------------------------------------------
// Grid and ray specifications.

/// Interior sampling for transport and spectrum outputs.
struct InteriorGrid {
  int rings = 3;
  int per_ring = 8;
  double radius_fraction = 0.8;
  int n_dirs = 16;
  int n_theta = 64;
};

struct GridFile {
  GridSpec fan;
  InteriorGrid interior;
};

/// {"n_points", "n_dirs", "glancing_eps", "times": [..], "interior": {..}}.
inline GridFile parse_grid(const Document& d) {
  using namespace detail;
  const json& r = d.root;
  if (!r.is_object()) d.fail("n_points", "grid must be a JSON object");
  GridFile g;
  if (r.contains("n_points")) g.fan.n_points = integer(d, r["n_points"], "n_points");
  if (r.contains("n_dirs")) g.fan.n_dirs = integer(d, r["n_dirs"], "n_dirs");
  g.fan.glancing_eps = optional_number(d, r, "glancing_eps", g.fan.glancing_eps);
  if (r.contains("times")) g.fan.times = numbers(d, r["times"], "times");
  if (g.fan.n_points < 1) d.fail("n_points", "\"n_points\" must be positive");
  if (g.fan.n_dirs < 1) d.fail("n_dirs", "\"n_dirs\" must be positive");
  if (r.contains("interior")) {
    const json& in = r["interior"];
    if (in.contains("rings")) g.interior.rings = integer(d, in["rings"], "rings");
    if (in.contains("per_ring")) g.interior.per_ring = integer(d, in["per_ring"], "per_ring");
    g.interior.radius_fraction = optional_number(d, in, "radius_fraction", g.interior.radius_fraction);
    if (in.contains("n_dirs")) g.interior.n_dirs = integer(d, in["n_dirs"], "n_dirs");
    if (in.contains("n_theta")) g.interior.n_theta = integer(d, in["n_theta"], "n_theta");
    if (g.interior.n_theta < 2 || g.interior.n_theta % 2) d.fail("n_theta", "\"n_theta\" must be even");
    if (!(g.interior.radius_fraction > 0.0 && g.interior.radius_fraction < 1.0))
      d.fail("radius_fraction", "\"radius_fraction\" must lie in (0, 1)");
  }
  return g;
}

struct RaySpec {
  Vec x{};
  Vec v{};
  double t0 = 0.0;
  int direction = +1;
};

/// {"x": [..], "v": [..], "t0": t, "direction": "forward" | "backward"}; v is
/// rescaled to unit g-length.
inline RaySpec parse_ray(const Document& d, const Scenario& sc) {
  using namespace detail;
  const json& r = d.root;
  RaySpec s;
  const auto x = numbers(d, require(d, r, "x"), "x");
  const auto v = numbers(d, require(d, r, "v"), "v");
  const auto n = static_cast<std::size_t>(sc.dim());
  if (x.size() != n) d.fail("x", "\"x\" must have n entries");
  if (v.size() != n) d.fail("v", "\"v\" must have n entries");
  std::copy(x.begin(), x.end(), s.x.begin());
  std::copy(v.begin(), v.end(), s.v.begin());
  if (norm(s.v, sc.dim()) == 0.0) d.fail("v", "\"v\" must be nonzero");
  if (boundary_defining(sc, s.x).rho < -sc.tol().precondition_tol) d.fail("x", "\"x\" lies outside M");
  s.v = scaled(1.0 / g_norm(sc, s.x, s.v), s.v);
  s.t0 = optional_number(d, r, "t0", 0.0);
  const std::string dir = r.value("direction", std::string("forward"));
  if (dir == "forward") s.direction = +1;
  else if (dir == "backward") s.direction = -1;
  else d.fail("direction", "\"direction\" must be forward or backward");
  return s;
}

// ---------------------------------------------------------------------------
// Reports.

inline json check_json(const CheckResult& r) {
  json m = json::object();
  for (const auto& [k, v] : r.metrics) m[k] = v;
  return {{"id", r.id},
          {"scenario", r.scenario},
          {"description", r.description},
          {"observed", r.observed},
          {"tolerance", r.tolerance},
          {"pass", r.pass},
          {"gating", r.gating},
          {"applicable", r.applicable},
          {"metrics", m},
          {"note", r.note}};
}

}  // namespace magray::io
