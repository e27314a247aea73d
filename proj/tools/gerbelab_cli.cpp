#include "gerbelab/errors.hpp"
#include "gerbelab/scenario.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

namespace {

constexpr int kSchemaExit = 2;

int run(const std::string& path, const std::optional<std::string>& out, const std::optional<std::int64_t>& seed,
        const std::optional<double>& tol) {
  nlohmann::json config;
  try {
    std::ifstream f(path);
    if (!f) throw gerbelab::SchemaError("cannot open config '" + path + "'");
    config = nlohmann::json::parse(f, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    std::cerr << "gerbelab: " << path << ": invalid JSON: " << e.what() << "\n";
    return kSchemaExit;
  } catch (const gerbelab::SchemaError& e) {
    std::cerr << "gerbelab: " << e.what() << "\n";
    return kSchemaExit;
  }

  gerbelab::RunOptions opts;
  opts.seed = seed;
  opts.tol = tol;
  opts.name = std::filesystem::path(path).stem().string();
  opts.out_dir = gerbelab::resolve_out_dir(out);
  try {
    const auto res = gerbelab::run_scenario(config, opts);
    const auto& r = res.report;
    for (const auto& c : r["checks"])
      std::cout << (c["pass"].get<bool>() ? "PASS " : "FAIL ") << c["name"].get<std::string>() << " value="
                << gerbelab::format_double(c["value"].is_number() ? c["value"].get<double>() : NAN)
                << " tol=" << gerbelab::format_double(c["tolerance"].get<double>()) << "\n";
    if (r.contains("error")) std::cerr << "gerbelab: " << r["error"]["message"].get<std::string>() << "\n";
    std::cout << r["kind"].get<std::string>() << ": " << r["status"].get<std::string>() << "\n";
    for (const auto& p : res.written) std::cout << "wrote " << p.string() << "\n";
    return res.exit_code;
  } catch (const gerbelab::SchemaError& e) {
    std::cerr << "gerbelab: " << e.what() << "\n";
    return kSchemaExit;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gerbes, holonomy and SYZ mirror scenarios on flat tori"};
  app.set_version_flag("--version", gerbelab::version_string());
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "Run a scenario config and write its report");
  std::string config;
  std::optional<std::string> out;
  std::optional<std::int64_t> seed;
  std::optional<double> tol;
  run_cmd->add_option("config", config, "Scenario config (JSON)")->required();
  run_cmd->add_option("--out", out, "Output directory (default: $GERBELAB_OUT or ./gerbelab-out)");
  run_cmd->add_option("--seed", seed, "Override the scenario seed")->check(CLI::NonNegativeNumber);
  run_cmd->add_option("--tol", tol, "Override every non-exact tolerance")->check(CLI::PositiveNumber);

  auto* kinds_cmd = app.add_subcommand("kinds", "List scenario kinds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kSchemaExit;
  }
  if (*kinds_cmd) {
    for (const auto& k : gerbelab::scenario_kinds()) std::cout << k << "\n";
    return 0;
  }
  return run(config, out, seed, tol);
}
