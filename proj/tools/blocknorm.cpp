#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "blocknorm/cli.hpp"

namespace cli = blocknorm::cli;

namespace {

int write_report(const blocknorm::json& report, const std::string& out_path) {
  const std::string text = report.dump(2) + "\n";
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
    return 0;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out || !(out << text)) {
    std::cerr << "blocknorm: cannot write " << out_path << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Block-anisotropic summing norms of multilinear operators on finite-dimensional "
               "l_p spaces, and executable checks of their properties."};
  app.set_version_flag("--version", cli::version());
  app.require_subcommand(1);

  std::string out_path;
  std::uint64_t seed = 0;
  std::size_t budget = 0;
  double tol_identity = 0.0;
  double tol_chain = 0.0;
  std::size_t jobs = 1;
  auto* seed_opt = app.add_option("--seed", seed, "Global seed (overrides BLOCKNORM_SEED)");
  auto* budget_opt = app.add_option("--budget", budget, "Search budget per job");
  auto* tol_id_opt =
      app.add_option("--tol-identity", tol_identity, "Relative tolerance for identities (1e-12)")
          ->check(CLI::NonNegativeNumber);
  auto* tol_chain_opt =
      app.add_option("--tol-chain", tol_chain, "Slack for inequality chains (1e-9)")
          ->check(CLI::NonNegativeNumber);
  app.add_option("--jobs", jobs, "Jobs run in parallel")->check(CLI::PositiveNumber);
  app.add_option("--out", out_path, "Report path (default stdout)");

  const std::vector<std::pair<std::string, std::string>> subcommands = {
      {"norm", "operator sup norms and sequence class norms"},
      {"summing-norm", "lower-bound estimates of summing norms"},
      {"check", "theorem checks and property suites"},
      {"witness", "search for incompatibility witnesses"},
      {"validate", "check a config without running it"},
      {"run", "run every job in the config"},
  };
  std::string config_path;
  for (const auto& [name, help] : subcommands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("config", config_path, "JSON config file")->required();
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kExitConfigError;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  cli::Overrides overrides;
  if (*seed_opt) overrides.seed = seed;
  if (*budget_opt) overrides.budget = budget;
  if (*tol_id_opt) overrides.tol_identity = tol_identity;
  if (*tol_chain_opt) overrides.tol_chain = tol_chain;

  blocknorm::json config;
  std::optional<std::uint64_t> env;
  try {
    env = cli::env_seed();
    config = cli::load_config_file(config_path);
  } catch (const cli::ParseError& e) {
    std::cerr << "blocknorm: " << config_path << ": " << e.what() << "\n";
    write_report({{"tool", "blocknorm"},
                  {"version", cli::version()},
                  {"command", command},
                  {"valid", false},
                  {"diagnostics",
                   {{{"path", config_path}, {"line", e.line}, {"column", e.column},
                     {"message", e.what()}}}}},
                 out_path);
    return cli::kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "blocknorm: " << e.what() << "\n";
    return cli::kExitConfigError;
  }

  const cli::Settings settings = cli::resolve_settings(config, overrides, env);
  const std::filesystem::path base = std::filesystem::path(config_path).parent_path();
  cli::Outcome outcome;
  try {
    outcome = cli::execute(command, config, settings, jobs, base);
  } catch (const std::exception& e) {
    std::cerr << "blocknorm: internal failure: " << e.what() << "\n";
    return cli::kExitInternalFailure;
  }
  for (const auto& d : outcome.report.value("diagnostics", blocknorm::json::array())) {
    std::cerr << "blocknorm: " << d.value("path", "") << ": " << d.value("message", "") << "\n";
  }
  if (write_report(outcome.report, out_path) != 0) return cli::kExitInternalFailure;
  return outcome.exit_code;
}
