#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

using nlohmann::json;

namespace {

const std::string kCli = MAGRAY_CLI;
const std::string kSc = MAGRAY_SCENARIO_DIR;
const std::string kS = MAGRAY_SAMPLE_DIR;
const std::string kOut = MAGRAY_OUT_DIR;

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run run(const std::string& tag, const std::string& args) {
  const std::string o = kOut + "/" + tag + ".stdout", e = kOut + "/" + tag + ".stderr";
  const int status = std::system((kCli + " " + args + " >" + o + " 2>" + e).c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(o);
  r.err = slurp(e);
  return r;
}

std::vector<std::vector<std::string>> csv(const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(path));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(cell);
    rows.push_back(row);
  }
  return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t k = 0; k < header.size(); ++k)
    if (header[k] == name) return k;
  ADD_FAILURE() << "no column " << name;
  return 0;
}

double final_s(const std::string& path) {
  const auto rows = csv(path);
  return std::stod(rows.back()[column(rows[0], "s")]);
}

}  // namespace

TEST(CliTrace, FlatChordEndsAtOne) {
  const auto r = run("chord", "trace " + kS + "/ray_origin.json --scenario " + kSc + "/flat.json --out " + kOut + "/chord.csv");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(final_s(kOut + "/chord.csv"), 1.0, 1e-9);
}

TEST(CliTrace, UniformFieldArcEndsAtCircleIntersection) {
  const auto r = run("arc", "trace " + kS + "/ray_origin.json --scenario " + kSc + "/field05.json --out " + kOut + "/arc.csv");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(final_s(kOut + "/arc.csv"), 2 * std::acos(7.0 / 8.0), 1e-8);
}

TEST(CliTrace, OutputIsByteIdenticalAcrossRuns) {
  const std::string args = "trace " + kS + "/ray_origin.json --scenario " + kSc + "/conformal.json --out ";
  ASSERT_EQ(run("det1", args + kOut + "/det1.csv").code, 0);
  ASSERT_EQ(run("det2", args + kOut + "/det2.csv").code, 0);
  EXPECT_EQ(slurp(kOut + "/det1.csv"), slurp(kOut + "/det2.csv"));
}

TEST(CliTrace, MalformedJsonIsAnInputErrorWithLine) {
  const auto r = run("malformed", "trace " + kS + "/ray_origin.json --scenario " + kS + "/malformed.json");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("malformed.json:5:"), std::string::npos) << r.err;
}

TEST(CliTrace, SchemaViolationIsAnInputErrorWithLine) {
  const auto r = run("badfamily", "trace " + kS + "/ray_origin.json --scenario " + kS + "/bad_family.json");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("bad_family.json:4:"), std::string::npos) << r.err;
}

TEST(CliTrace, TrappedRayExitsWithThree) {
  const auto r = run("trapped", "trace " + kS + "/ray_origin.json --scenario " + kS + "/scenario_trapping.json");
  EXPECT_EQ(r.code, 3) << r.err;
}

TEST(CliTransform, PotentialPairIsInTheKernel) {
  const auto r = run("im", "transform Im --scenario " + kSc + "/field05.json --field " + kS + "/potential_pair_m2.json --grid " +
                               kS + "/grid_small.json --out " + kOut + "/im.csv");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto m = json::parse(slurp(kOut + "/im.csv.manifest.json"));
  EXPECT_LE(m["max_abs_value"].get<double>(), 1e-6);
  EXPECT_EQ(m["kind"], "Im");
  EXPECT_EQ(m["tolerances"]["step"].get<double>(), 1e-3);
  EXPECT_EQ(m["output"]["sha1"].get<std::string>().size(), 40u);
}

TEST(CliTransform, ConstantGivesExitTimes) {
  const auto r = run("ione", "transform I --scenario " + kSc + "/flat.json --field " + kS + "/field_one.json --grid " + kS +
                                 "/grid_small.json --out " + kOut + "/ione.csv");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = csv(kOut + "/ione.csv");
  const auto ct = column(rows[0], "exit_time"), cv = column(rows[0], "value");
  const auto cx = column(rows[0], "x1"), cy = column(rows[0], "x2"), cu = column(rows[0], "v1"), cw = column(rows[0], "v2");
  ASSERT_GT(rows.size(), 10u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_NEAR(std::stod(rows[i][cv]), std::stod(rows[i][ct]), 1e-12);
    // chord oracle: from x on the unit circle along unit v, τ = −2 x·v
    const double xv = std::stod(rows[i][cx]) * std::stod(rows[i][cu]) + std::stod(rows[i][cy]) * std::stod(rows[i][cw]);
    EXPECT_NEAR(std::stod(rows[i][cv]), -2 * xv, 1e-9);
  }
}

TEST(CliTransform, UnknownKindIsAnInputError) {
  const auto r = run("badkind", "transform Q --scenario " + kSc + "/flat.json --field " + kS + "/field_one.json");
  EXPECT_EQ(r.code, 2);
}

TEST(CliTransform, SpacetimeKernelIsInTheKernel) {
  const auto r = run("lm", "transform Lm --scenario " + kSc + "/conformal.json --field " + kS + "/spacetime_kernel_m2.json --grid " +
                               kS + "/grid_small.json --out " + kOut + "/lm.csv");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_LE(json::parse(slurp(kOut + "/lm.csv.manifest.json"))["max_abs_value"].get<double>(), 1e-5);
}

TEST(CliTransform, ThreadCountDoesNotChangeOutput) {
  const std::string args = "transform Im --scenario " + kSc + "/conformal.json --field " + kS +
                           "/potential_pair_m3.json --grid " + kS + "/grid_small.json --out ";
  ASSERT_EQ(run("thr1", args + kOut + "/thr1.csv --threads 1").code, 0);
  ASSERT_EQ(run("thr3", args + kOut + "/thr3.csv --threads 3").code, 0);
  EXPECT_EQ(slurp(kOut + "/thr1.csv"), slurp(kOut + "/thr3.csv"));
}

TEST(CliManifest, HashesAreGitBlobHashes) {
  ASSERT_EQ(run("hash", "trace " + kS + "/ray_origin.json --scenario " + kSc + "/flat.json --out " + kOut + "/hash.csv").code, 0);
  const auto m = json::parse(slurp(kOut + "/hash.csv.manifest.json"));
  const std::string probe = kOut + "/git_hash.txt";
  if (std::system(("git hash-object " + kOut + "/hash.csv > " + probe + " 2>/dev/null").c_str()) != 0)
    GTEST_SKIP() << "git not available";
  std::string want = slurp(probe);
  want.erase(want.find_last_not_of("\n") + 1);
  EXPECT_EQ(m["output"]["sha1"].get<std::string>(), want);
}

TEST(CliSpectrum, Degrees) {
  struct Case {
    std::string field, scenario, extra;
    int degree;
  };
  const std::vector<Case> cases{{"field_metric", "flat", "", 0},
                                {"field_rank3", "flat", "", 3},
                                {"potential_pair_m2", "field05", "--transport", 1}};
  int k = 0;
  for (const auto& c : cases) {
    const std::string out = kOut + "/spec" + std::to_string(k++) + ".csv";
    const auto r = run("spec", "spectrum " + c.extra + " --scenario " + kSc + "/" + c.scenario + ".json --field " + kS + "/" +
                                   c.field + ".json --grid " + kS + "/grid_small.json --out " + out);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(json::parse(slurp(out + ".degree.json"))["degree"].get<int>(), c.degree) << c.field;
  }
}

TEST(CliTransport, WritesSolutionGrid) {
  const auto r = run("transport", "transport --scenario " + kSc + "/field025.json --field " + kS +
                                      "/potential_pair_m1.json --grid " + kS + "/grid_small.json --out " + kOut + "/u.csv");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = csv(kOut + "/u.csv");
  EXPECT_EQ(rows[0].back(), "u");
  EXPECT_EQ(rows.size(), 1u + 13u * 8u);
}

TEST(CliSuite, IdentitiesPassOnFlatDisk) {
  const std::string rep = kOut + "/identities_flat.json";
  const auto r = run("suite_id", "suite identities --scenario " + kSc + "/flat.json --out " + rep);
  EXPECT_EQ(r.code, 0) << r.out;
  const auto j = json::parse(slurp(rep));
  EXPECT_TRUE(j["passed"].get<bool>());
  for (const auto& c : j["checks"]) {
    EXPECT_TRUE(c.contains("tolerance"));
    EXPECT_TRUE(c.contains("observed"));
    EXPECT_TRUE(c["pass"].get<bool>()) << c["id"];
  }
}

TEST(CliSuite, KernelsPassOnUniformField) {
  const auto r = run("suite_k", "suite kernels --scenario " + kSc + "/field05.json --out " + kOut + "/kernels_field05.json");
  EXPECT_EQ(r.code, 0) << r.out;
}

TEST(CliSuite, TamperedToleranceIsAControlledFailure) {
  const std::string rep = kOut + "/degree_tampered.json";
  const auto r = run("suite_deg", "suite degree --scenario " + kSc + "/flat.json --tol-scale 1e-12 --out " + rep);
  EXPECT_EQ(r.code, 1);
  const auto j = json::parse(slurp(rep));
  EXPECT_FALSE(j["passed"].get<bool>());
  bool saw = false;
  for (const auto& c : j["checks"])
    if (c["id"] == "degree.degree_property") {
      saw = true;
      EXPECT_FALSE(c["pass"].get<bool>());
      EXPECT_EQ(c["tolerance"].get<double>(), 0.0);
    }
  EXPECT_TRUE(saw);
  EXPECT_NE(r.out.find("FAIL degree.degree_property"), std::string::npos) << r.out;
}

TEST(CliSuite, UnknownSuiteIsAnInputError) {
  EXPECT_EQ(run("suite_bad", "suite nonsense --scenario " + kSc + "/flat.json").code, 2);
}
