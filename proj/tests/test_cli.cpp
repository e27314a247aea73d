#include <doctest.h>

#include "gerbelab/errors.hpp"
#include "gerbelab/scenario.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <sys/wait.h>

using namespace gerbelab;
using nlohmann::json;

namespace fs = std::filesystem;

namespace {

json load(const fs::path& p) {
  std::ifstream f(p);
  return json::parse(f);
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("gerbelab-test-" + name);
  fs::remove_all(p);
  return p;
}

json without_timestamp(json r) {
  r.erase("timestamp");
  return r;
}

const json* check(const json& report, const std::string& name) {
  for (const auto& c : report["checks"])
    if (c["name"] == name) return &c;
  return nullptr;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(GERBELAB_CLI) + " " + args + " >/dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

}  // namespace

TEST_CASE("every bundled config passes") {
  int seen = 0;
  std::set<std::string> kinds;
  for (const auto& e : fs::directory_iterator(GERBELAB_CONFIG_DIR)) {
    if (e.path().extension() != ".json") continue;
    CAPTURE(e.path().string());
    RunOptions o;
    o.write_files = false;
    const auto r = run_scenario(load(e.path()), o);
    CHECK(r.exit_code == 0);
    CHECK(r.report["pass"] == true);
    CHECK(!r.report["checks"].empty());
    kinds.insert(r.report["kind"].get<std::string>());
    ++seen;
  }
  CHECK(seen >= 7);
  for (const auto& k : scenario_kinds()) CHECK(kinds.count(k) == 1);
}

TEST_CASE("cohomology of T^3_4") {
  const auto r = run_scenario({{"kind", "cohomology"}, {"d", 3}, {"N", 4}}, {.write_files = false});
  CHECK(r.report["results"]["betti"] == json::array({1, 3, 3, 1}));
  CHECK(r.report["results"]["nerve_betti"] == json::array({1, 3, 3, 1}));
  CHECK(r.exit_code == 0);
}

TEST_CASE("point gerbe scenario") {
  const auto r = run_scenario({{"kind", "point-gerbe"}, {"N", 6}, {"p", {0.1, 0.2, 0.3}}}, {.write_files = false});
  CHECK(r.report["results"]["sphere_integral"].get<double>() == doctest::Approx(-2 * std::numbers::pi).epsilon(1e-9));
  CHECK(r.report["results"]["class"] == json::array({1}));
  CHECK(r.report["pass"] == true);
}

TEST_CASE("reports are deterministic and record the seed") {
  const json cfg{{"kind", "linear-equivalence"}, {"pairs", 12}, {"injectivity", false}};
  const auto a = run_scenario(cfg, {.write_files = false});
  const auto b = run_scenario(cfg, {.write_files = false});
  CHECK(without_timestamp(a.report).dump() == without_timestamp(b.report).dump());
  CHECK(a.report["scenario"]["seed"] == 7);
  const auto c = run_scenario(cfg, {.seed = 11, .write_files = false});
  CHECK(c.report["scenario"]["seed"] == 11);
  CHECK(c.report["results"]["verdicts"] != a.report["results"]["verdicts"]);
  CHECK(c.exit_code == 0);
}

TEST_CASE("every check carries its tolerance; --tol overrides non-exact ones") {
  const json cfg{{"kind", "point-gerbe"}, {"N", 4}};
  const auto r = run_scenario(cfg, {.tol = 0.5, .write_files = false});
  for (const auto& c : r.report["checks"]) {
    REQUIRE(c.contains("tolerance"));
    if (c["relation"] == "eq")
      CHECK(c["tolerance"] == 0.0);
    else
      CHECK(c["tolerance"] == 0.5);
  }
  CHECK(r.report["scenario"]["tol_override"] == 0.5);
  // A tolerance that cannot be met fails the run without an error.
  json tight = cfg;
  tight["tolerances"] = {{"sphere", 0.0}, {"poisson", 0.0}};
  const auto t = run_scenario(tight, {.write_files = false});
  CHECK(t.exit_code == 1);
  CHECK(t.report["status"] == "fail");
}

TEST_CASE("schema violations") {
  const std::vector<json> bad = {
      json::array(),
      {{"d", 3}},
      {{"kind", "torus"}},
      {{"kind", "cohomology"}, {"d", 4}},
      {{"kind", "cohomology"}, {"N", "four"}},
      {{"kind", "cohomology"}, {"extra", 1}},
      {{"kind", "point-gerbe"}, {"p", {0.1, 0.2}}},
      {{"kind", "syz-mirror"}, {"Q", {{1, 0.5}, {0.4, 1}}}},
      {{"kind", "syz-mirror"}, {"Q", {{1, 2}, {2, 1}}}},
      {{"kind", "syz-mirror"}, {"psi", {{"family", "bessel"}}}},
      {{"kind", "syz-mirror"}, {"psi", {{"terms", {{{"k", {1, 0, 0}}, {"cos", 0.1}}}}}}},
      {{"kind", "ma-solve"}, {"tolerances", {{"sphere", 1e-3}}}},
      {{"kind", "linear-equivalence"}, {"degree_min", 3}, {"degree_max", 2}},
      {{"kind", "linear-equivalence"}, {"divisors", {{{"P", {{0, 0, 0}}}}}}},
      {{"kind", "flat-cy"}, {"name", "a/b"}},
  };
  for (const auto& cfg : bad) {
    CAPTURE(cfg.dump());
    CHECK_THROWS_AS(run_scenario(cfg, {.write_files = false}), SchemaError);
  }
}

TEST_CASE("numerical failures are reported with diagnostics") {
  const json cfg{{"kind", "syz-mirror"}, {"M", 16}, {"psi", {{"family", "cosine"}, {"amplitude", 0.2}}}};
  const auto r = run_scenario(cfg, {.write_files = false});
  CHECK(r.exit_code == 3);
  CHECK(r.report["status"] == "error");
  CHECK(r.report["error"]["type"] == "convexity");
  CHECK(!r.report["error"]["nodes"].empty());
  CHECK(r.report["error"]["min_eigenvalue"].get<double>() < 0);
}

TEST_CASE("files: JSON report and CSV tables") {
  const auto dir = scratch("files");
  const json cfg{{"kind", "ma-solve"}, {"name", "ma"}, {"M", 16},
                 {"psi0", {{"terms", {{{"k", {1, 1}}, {"cos", 0.004}}, {{"k", {1, 0}}, {"cos", 0.01}}}}}}};
  const auto r = run_scenario(cfg, {.out_dir = dir});
  REQUIRE(r.exit_code == 0);
  CHECK(fs::exists(dir / "ma.json"));
  CHECK(load(dir / "ma.json")["files"] == json::array({"ma.log.csv", "ma.psi.csv"}));
  std::ifstream log(dir / "ma.log.csv");
  std::string header, first;
  std::getline(log, header);
  std::getline(log, first);
  CHECK(header == "step,residual,damping,krylov_iterations,krylov_error,min_eigenvalue");
  CHECK(first.rfind("1,", 0) == 0);
  std::ifstream psi(dir / "ma.psi.csv");
  std::getline(psi, header);
  CHECK(header == "node,x1,x2,psi");
  int rows = 0;
  for (std::string line; std::getline(psi, line);) ++rows;
  CHECK(rows == 256);
  RunOptions quiet{.out_dir = dir};
  json nocsv = cfg;
  nocsv["csv"] = false;
  nocsv["name"] = "nocsv";
  CHECK(run_scenario(nocsv, quiet).written.size() == 1);
}

TEST_CASE("number format and output directory") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(std::stod(format_double(std::numbers::pi)) == std::numbers::pi);
  CHECK(format_double(-2.0) == "-2");
  ::setenv("GERBELAB_OUT", "/tmp/from-env", 1);
  CHECK(resolve_out_dir(std::nullopt) == fs::path("/tmp/from-env"));
  CHECK(resolve_out_dir(std::string("x")) == fs::path("x"));
  ::unsetenv("GERBELAB_OUT");
  CHECK(resolve_out_dir(std::nullopt) == fs::path("gerbelab-out"));
}

TEST_CASE("command line exit codes") {
  const auto dir = scratch("cli");
  fs::create_directories(dir);
  const std::string cfg = std::string(GERBELAB_CONFIG_DIR) + "/flat-cy.json";
  CHECK(cli("run " + cfg + " --out " + dir.string()) == 0);
  CHECK(fs::exists(dir / "flat-cy.json"));
  CHECK(cli("run " + cfg + " --out " + dir.string() + " --seed 5 --tol 1e-3") == 0);
  CHECK(load(dir / "flat-cy.json")["scenario"]["seed"] == 5);

  std::ofstream(dir / "bad.json") << R"({"kind": "flat-cy", "n": 5})";
  CHECK(cli("run " + (dir / "bad.json").string() + " --out " + dir.string()) == 2);
  std::ofstream(dir / "broken.json") << "{ not json";
  CHECK(cli("run " + (dir / "broken.json").string() + " --out " + dir.string()) == 2);
  CHECK(cli("run " + (dir / "missing.json").string()) == 2);
  CHECK(cli("run") == 2);

  std::ofstream(dir / "nonconvex.json") << R"({"kind": "syz-mirror", "M": 8, "psi": {"family": "cosine", "amplitude": 0.2}})";
  CHECK(cli("run " + (dir / "nonconvex.json").string() + " --out " + dir.string()) == 3);
  CHECK(load(dir / "nonconvex.json")["error"]["type"] == "convexity");

  std::ofstream(dir / "strict.json") << R"({"kind": "point-gerbe", "N": 4, "tolerances": {"sphere": 0}})";
  CHECK(cli("run " + (dir / "strict.json").string() + " --out " + dir.string()) == 1);

  const auto env_dir = scratch("env");
  const std::string env = "GERBELAB_OUT=" + env_dir.string() + " ";
  CHECK(std::system((env + GERBELAB_CLI + " run " + cfg + " >/dev/null").c_str()) == 0);
  CHECK(fs::exists(env_dir / "flat-cy.json"));
}
