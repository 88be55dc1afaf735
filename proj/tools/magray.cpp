// Command line front end: trace, transform, transport, spectrum, suite.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include "magray/magray.hpp"

using namespace magray;
using nlohmann::json;

namespace {

enum Exit { kPass = 0, kSuiteFailure = 1, kInputError = 2, kTrapped = 3 };

/// Git blob hash: SHA-1 over "blob <size>\0" followed by the content.
std::string git_blob_sha1(const std::string& content) {
  const std::string header = "blob " + std::to_string(content.size()) + std::string(1, '\0');
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr);
  EVP_DigestUpdate(ctx, header.data(), header.size());
  EVP_DigestUpdate(ctx, content.data(), content.size());
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SchemaError(path + ": cannot write file", 0);
  out << text;
}

/// Writes `text` to `path` (stdout when empty) and returns what was written.
void emit(const std::string& path, const std::string& text) {
  if (path.empty()) std::cout << text;
  else write_text(path, text);
}

json file_entry(const io::Document& d) { return {{"path", d.path}, {"sha1", git_blob_sha1(d.text)}}; }

/// <out>.manifest.json next to the output; skipped for stdout.
void write_manifest(const std::string& out, const std::string& text, json m) {
  if (out.empty()) return;
  m["output"] = {{"path", out}, {"sha1", git_blob_sha1(text)}};
  write_text(out + ".manifest.json", m.dump(2) + "\n");
}

std::string csv_header(const std::vector<std::string>& cols) {
  std::string s;
  for (std::size_t k = 0; k < cols.size(); ++k) s += (k ? "," : "") + cols[k];
  return s + "\n";
}

std::vector<std::string> coord_cols(const char* prefix, int n) {
  std::vector<std::string> c;
  for (int i = 1; i <= n; ++i) c.push_back(prefix + std::to_string(i));
  return c;
}

void append(std::vector<double>& row, const Vec& a, int n) {
  for (int i = 0; i < n; ++i) row.push_back(a[static_cast<std::size_t>(i)]);
}

struct Common {
  std::string scenario;
  std::string field;
  std::string grid;
  std::string out;
  int threads = 1;
  double tol_scale = 1.0;
};

struct Loaded {
  io::Document doc;
  ScenarioPtr sc;
};

Loaded load_scenario(const std::string& path) {
  if (path.empty()) throw SchemaError("--scenario is required", 0);
  Loaded l{io::load(path), nullptr};
  l.sc = io::load_scenario(l.doc);
  return l;
}

io::GridFile load_grid(const std::string& path, std::optional<io::Document>& doc) {
  if (path.empty()) return {};
  doc = io::load(path);
  return io::parse_grid(*doc);
}

json base_manifest(const std::string& cmd, const Loaded& s) {
  return {{"command", cmd},
          {"scenario", file_entry(s.doc)},
          {"tolerances", io::tolerances_json(s.sc->tol())},
          {"number_format", "scientific, 17 significant digits"}};
}

// ---------------------------------------------------------------------------

int cmd_trace(const Common& c, const std::string& ray_path) {
  const Loaded s = load_scenario(c.scenario);
  const io::Document rd = io::load(ray_path);
  const io::RaySpec ray = io::parse_ray(rd, *s.sc);
  const Scenario& sc = *s.sc;
  const int n = sc.dim();
  const Trajectory tr =
      lifted(sc, ray.t0, ray.direction > 0 ? exit_time(sc, ray.x, ray.v) : enter_time(sc, ray.x, ray.v));

  std::vector<std::string> cols{"s", "t"};
  for (auto& k : coord_cols("x", n)) cols.push_back(k);
  for (auto& k : coord_cols("v", n)) cols.push_back(k);
  cols.push_back("rho");
  std::string text = csv_header(cols);
  for (const auto& st : tr.samples) {
    std::vector<double> row{st.s, st.t};
    append(row, st.x, n);
    append(row, st.v, n);
    row.push_back(boundary_defining(sc, st.x).rho);
    text += io::csv_row(row) + "\n";
  }
  emit(c.out, text);
  json m = base_manifest("trace", s);
  m["ray"] = file_entry(rd);
  m["exit_time"] = tr.exit_time;
  m["glancing"] = tr.glancing;
  m["samples"] = tr.samples.size();
  m["renormalizations"] = tr.drift.renormalizations;
  m["max_speed_drift"] = tr.drift.max_drift;
  write_manifest(c.out, text, m);
  std::fprintf(stderr, "exit_time %s\n", io::format_double(tr.exit_time).c_str());
  return kPass;
}

int cmd_transform(const Common& c, const std::string& kind) {
  const Loaded s = load_scenario(c.scenario);
  const Scenario& sc = *s.sc;
  if (c.field.empty()) throw SchemaError("--field is required", 0);
  const io::Document fd = io::load(c.field);
  const io::FieldSpec f = io::parse_field(fd, sc);
  std::optional<io::Document> gd;
  io::GridFile g = load_grid(c.grid, gd);
  const int n = sc.dim();
  const bool spacetime = kind == "L" || kind == "Lm";
  if (spacetime && g.fan.times.empty()) g.fan.times = {0.0};

  // Kind-specific shape requirements.
  if (kind == "Im" && !(f.p && f.q)) throw SchemaError(c.field + ":1: kind Im needs a pair or potential_pair", 1);
  if (kind == "I" && f.spacetime) throw SchemaError(c.field + ":1: kind I needs a function on SM", 1);
  if (kind == "Lm" && !f.spacetime) throw SchemaError(c.field + ":1: kind Lm needs a spacetime tensor", 1);

  TransformOptions opt;
  opt.threads = c.threads;
  const RayBundle bundle = trace_rays(sc, boundary_fan(sc, g.fan), opt);

  std::vector<std::vector<double>> values;
  if (!spacetime) {
    const auto v = xray_I(bundle, io::sm_function(f), c.threads);
    for (double x : v) values.push_back({x});
  } else if (f.spacetime) {
    values = lightray_Lm(sc, bundle, *f.spacetime, g.fan.times, c.threads);
  } else {
    const SMFunction u = io::sm_function(f);
    values = lightray_L(sc, bundle, batched([u](double, const Vec& x, const Vec& v) { return u(x, v); }), g.fan.times,
                        c.threads);
  }

  std::vector<std::string> cols{"ray", "point", "dir"};
  for (auto& k : coord_cols("x", n)) cols.push_back(k);
  for (auto& k : coord_cols("v", n)) cols.push_back(k);
  cols.push_back("exit_time");
  if (spacetime)
    for (std::size_t j = 0; j < g.fan.times.size(); ++j) cols.push_back("value_t" + std::to_string(j));
  else
    cols.push_back("value");
  std::string text = csv_header(cols);
  double max_abs = 0.0;
  for (std::size_t i = 0; i < bundle.rays.size(); ++i) {
    const auto& r = bundle.rays[i];
    std::string line = std::to_string(i) + "," + std::to_string(r.point) + "," + std::to_string(r.dir) + ",";
    std::vector<double> row;
    append(row, r.x, n);
    append(row, r.v, n);
    row.push_back(bundle.paths[i].exit_time);
    for (double x : values[i]) {
      row.push_back(x);
      max_abs = std::max(max_abs, std::abs(x));
    }
    text += line + io::csv_row(row) + "\n";
  }
  emit(c.out, text);

  json m = base_manifest("transform", s);
  m["kind"] = kind;
  m["field"] = file_entry(fd);
  m["field_kind"] = f.kind;
  if (gd) m["grid"] = file_entry(*gd);
  m["fan"] = {{"n_points", g.fan.n_points}, {"n_dirs", g.fan.n_dirs}, {"glancing_eps", g.fan.glancing_eps}};
  if (spacetime) m["times"] = g.fan.times;
  m["step"] = bundle.h;
  m["rays"] = bundle.rays.size();
  m["max_abs_value"] = max_abs;
  write_manifest(c.out, text, m);
  std::fprintf(stderr, "rays %zu max_abs_value %s\n", bundle.rays.size(), io::format_double(max_abs).c_str());
  return kPass;
}

/// Interior base points and, for each, the fiber directions at θ_j = 2πj/N.
std::vector<Vec> interior_points(const Scenario& sc, const io::InteriorGrid& ig) {
  return base_grid(sc, ig.rings, ig.per_ring, ig.radius_fraction * sc.radius());
}

int cmd_transport(const Common& c) {
  const Loaded s = load_scenario(c.scenario);
  const Scenario& sc = *s.sc;
  if (sc.dim() != 2) throw UnsupportedDimensionError("transport output grids need n = 2");
  if (c.field.empty()) throw SchemaError("--field is required", 0);
  const io::Document fd = io::load(c.field);
  const io::FieldSpec f = io::parse_field(fd, sc);
  std::optional<io::Document> gd;
  const io::GridFile g = load_grid(c.grid, gd);

  std::vector<PhasePoint> pts;
  for (const Vec& x : interior_points(sc, g.interior)) {
    const auto frame = vertical_frame(sc, x);
    for (int j = 0; j < g.interior.n_dirs; ++j)
      pts.push_back({x, fiber_vector(frame, 2.0 * std::numbers::pi * j / g.interior.n_dirs)});
  }
  TransformOptions opt;
  opt.threads = c.threads;
  const auto sol = transport_solve(sc, io::sm_function(f), pts, opt, f.kind);

  std::string text = csv_header({"x1", "x2", "v1", "v2", "u"});
  for (std::size_t i = 0; i < sol.points.size(); ++i) {
    std::vector<double> row;
    append(row, sol.points[i].x, 2);
    append(row, sol.points[i].v, 2);
    row.push_back(sol.values[i]);
    text += io::csv_row(row) + "\n";
  }
  emit(c.out, text);
  json m = base_manifest("transport", s);
  m["field"] = file_entry(fd);
  if (gd) m["grid"] = file_entry(*gd);
  m["points"] = sol.points.size();
  m["step"] = sol.h;
  write_manifest(c.out, text, m);
  return kPass;
}

int cmd_spectrum(const Common& c, bool of_transport) {
  const Loaded s = load_scenario(c.scenario);
  const Scenario& sc = *s.sc;
  if (c.field.empty()) throw SchemaError("--field is required", 0);
  const io::Document fd = io::load(c.field);
  const io::FieldSpec f = io::parse_field(fd, sc);
  std::optional<io::Document> gd;
  const io::GridFile g = load_grid(c.grid, gd);
  const SMFunction src = io::sm_function(f);
  const SMFunction u =
      of_transport ? SMFunction([&](const Vec& x, const Vec& v) { return transport_value(sc, src, x, v); }) : src;

  const auto xs = interior_points(sc, g.interior);
  std::vector<VerticalSpectrum> spectra(xs.size());
  parallel_for(xs.size(), c.threads, [&](std::size_t i) { spectra[i] = vertical_spectrum(sc, u, xs[i], g.interior.n_theta); });
  const double mode_tol = 1e-4 * c.tol_scale;
  const int deg = degree_estimate(spectra, mode_tol);

  std::string text = csv_header({"point", "x1", "x2", "k", "re", "im", "abs"});
  for (std::size_t i = 0; i < spectra.size(); ++i)
    for (int k = -spectra[i].kmax; k <= spectra[i].kmax; ++k) {
      const Complex ck = spectra[i].mode(k);
      text += std::to_string(i) + "," + io::csv_row({xs[i][0], xs[i][1]}) + "," + std::to_string(k) + "," +
              io::csv_row({ck.real(), ck.imag(), std::abs(ck)}) + "\n";
    }
  emit(c.out, text);

  json rep = {{"degree", deg},
              {"mode_tol", mode_tol},
              {"n_theta", g.interior.n_theta},
              {"points", xs.size()},
              {"function", of_transport ? "transport solution of " + f.kind : f.kind}};
  const std::string rep_text = rep.dump(2) + "\n";
  if (!c.out.empty()) write_text(c.out + ".degree.json", rep_text);
  json m = base_manifest("spectrum", s);
  m["field"] = file_entry(fd);
  if (gd) m["grid"] = file_entry(*gd);
  m["degree_report"] = {{"path", c.out.empty() ? "" : c.out + ".degree.json"}, {"sha1", git_blob_sha1(rep_text)}};
  write_manifest(c.out, text, m);
  std::fprintf(stderr, "degree %d\n", deg);
  return kPass;
}

std::vector<std::string> shipped_scenarios() {
  std::vector<std::string> out;
#ifdef MAGRAY_SCENARIO_DIR
  for (const char* name : {"flat", "field025", "field05", "conformal"})
    out.push_back(std::string(MAGRAY_SCENARIO_DIR) + "/" + name + ".json");
#endif
  return out;
}

int cmd_suite(const Common& c, const std::string& suite, std::vector<std::string> scenarios) {
  if (scenarios.empty()) scenarios = shipped_scenarios();
  if (scenarios.empty()) throw SchemaError("no scenarios given", 0);
  SuiteOptions opt;
  opt.tol_scale = c.tol_scale;
  opt.threads = c.threads;
  std::optional<io::Document> gd;
  if (!c.grid.empty()) opt.grid = load_grid(c.grid, gd).fan;

  json report = {{"suite", suite}, {"tol_scale", c.tol_scale}, {"scenarios", json::array()}, {"checks", json::array()}};
  bool ok = true;
  for (const auto& path : scenarios) {
    const Loaded s = load_scenario(path);
    report["scenarios"].push_back(file_entry(s.doc));
    const auto results = run_suite(suite, *s.sc, opt);
    ok = ok && suite_passed(results);
    for (const auto& r : results) {
      report["checks"].push_back(io::check_json(r));
      const char* verdict = !r.applicable ? "SKIP" : r.pass ? "PASS" : r.gating ? "FAIL" : "INFO";
      std::printf("%s %-30s %-10s observed=%s tolerance=%s%s%s\n", verdict, r.id.c_str(), r.scenario.c_str(),
                  io::format_double(r.observed).c_str(), io::format_double(r.tolerance).c_str(),
                  r.note.empty() ? "" : " note=", r.note.c_str());
    }
  }
  report["passed"] = ok;
  if (!c.out.empty()) write_text(c.out, report.dump(2) + "\n");
  return ok ? kPass : kSuiteFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"magray: magnetic and light ray transforms on the ball"};
  app.require_subcommand(1);
  Common c;
  auto common = [&c](CLI::App* s, bool field, bool grid) {
    s->add_option("--scenario", c.scenario, "scenario JSON")->check(CLI::ExistingFile);
    if (field) s->add_option("--field", c.field, "field JSON")->check(CLI::ExistingFile);
    if (grid) s->add_option("--grid", c.grid, "grid JSON")->check(CLI::ExistingFile);
    s->add_option("--out", c.out, "output path (stdout when omitted)");
    s->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
    s->add_option("--tol-scale", c.tol_scale, "multiplier for pass thresholds")->check(CLI::PositiveNumber);
  };

  std::string ray, kind, suite;
  std::vector<std::string> suite_scenarios;
  bool of_transport = false;

  auto* trace = app.add_subcommand("trace", "trace one magnetic geodesic to the boundary");
  common(trace, false, false);
  trace->add_option("ray", ray, "ray spec JSON")->required()->check(CLI::ExistingFile);

  auto* transform = app.add_subcommand("transform", "I, Im, L or Lm over a boundary fan");
  common(transform, true, true);
  transform->add_option("kind", kind, "I | Im | L | Lm")->required()->check(CLI::IsMember({"I", "Im", "L", "Lm"}));

  auto* transport = app.add_subcommand("transport", "transport solution u on an interior grid");
  common(transport, true, true);

  auto* spectrum = app.add_subcommand("spectrum", "vertical Fourier modes and degree estimate");
  common(spectrum, true, true);
  spectrum->add_flag("--transport", of_transport, "analyse the transport solution of the field instead");

  auto* suite_cmd = app.add_subcommand("suite", "run a property suite");
  suite_cmd->add_option("name", suite, "geometry | flows | identities | kernels | degree")
      ->required()
      ->check(CLI::IsMember({"geometry", "flows", "identities", "kernels", "degree"}));
  suite_cmd->add_option("--scenario", suite_scenarios, "scenario JSON (repeatable; default: shipped set)")
      ->check(CLI::ExistingFile);
  suite_cmd->add_option("--grid", c.grid, "boundary fan JSON")->check(CLI::ExistingFile);
  suite_cmd->add_option("--out", c.out, "report JSON");
  suite_cmd->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
  suite_cmd->add_option("--tol-scale", c.tol_scale, "multiplier for pass thresholds")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kInputError;
  }

  try {
    if (*trace) return cmd_trace(c, ray);
    if (*transform) return cmd_transform(c, kind);
    if (*transport) return cmd_transport(c);
    if (*spectrum) return cmd_spectrum(c, of_transport);
    if (*suite_cmd) return cmd_suite(c, suite, suite_scenarios);
  } catch (const TrappedRayError& e) {
    std::fprintf(stderr, "trapped ray: %s\n", e.what());
    return kTrapped;
  } catch (const SchemaError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return kInputError;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kInputError;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return kInputError;
  }
  return kInputError;
}
