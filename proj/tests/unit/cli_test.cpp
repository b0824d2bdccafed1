#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "blocknorm/cli.hpp"

using namespace blocknorm;
using namespace blocknorm::cli;

namespace {

const std::filesystem::path kData = BLOCKNORM_TEST_DATA;

json reference() { return load_config_file(kData / "reference_config.json"); }

Settings settings_of(const json& config) { return resolve_settings(config, {}, std::nullopt); }

json small_config() {
  return parse_config(R"cfg({
    "spaces": {"A": {"dim": 2, "p": 1}, "F": {"dim": 1, "p": 2}},
    "operators": {"T": {"domains": ["A", "A"], "codomain": "F",
                        "tensor": [[[1], [2]], [[-1], [0.5]]]}},
    "blocks": {"B": {"kind": "explicit", "bounds": [2, 2], "members": [[1, 1], [2, 2]]}},
    "jobs": [
      {"command": "summing-norm", "operator": "T", "block": "B",
       "x": ["strong(1)", "strong(1)"], "stack": ["strong(1)", "strong(2)"]},
      {"command": "norm", "operator": "T"}
    ]
  })cfg");
}

struct Proc {
  int status;
  std::string out;
};

Proc run_cli_env(const std::string& env, const std::string& args) {
  const std::string cmd = env + " " + std::string(BLOCKNORM_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  std::string out;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
  const int st = pclose(pipe);
  return {WEXITSTATUS(st), out};
}

Proc run_cli(const std::string& args) { return run_cli_env("", args); }

std::filesystem::path write_temp(const std::string& name, const std::string& text) {
  const auto p = std::filesystem::temp_directory_path() / name;
  std::ofstream(p) << text;
  return p;
}

bool mentions(const std::vector<Diagnostic>& ds, const std::string& path, const std::string& text) {
  for (const Diagnostic& d : ds) {
    if (d.path.find(path) != std::string::npos && d.message.find(text) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST(Cli, ReferenceConfigValidatesAndPasses) {
  const json config = reference();
  EXPECT_TRUE(validate(config, kData).empty());
  const Outcome o = execute("run", config, settings_of(config), 1, kData);
  EXPECT_EQ(o.exit_code, kExitPass) << o.report.dump(2);
  EXPECT_TRUE(o.report["pass"].get<bool>());
  EXPECT_EQ(o.report["jobs"].size(), config["jobs"].size());
  EXPECT_NEAR(o.report["jobs"][1]["result"]["value"].get<double>(), 6.0, 1e-9);
}

TEST(Cli, OutOfBoundsTupleIsNamed) {
  json c = small_config();
  c["blocks"]["B"]["members"][1] = {3, 1};
  const auto ds = validate(c);
  ASSERT_FALSE(ds.empty());
  EXPECT_TRUE(mentions(ds, "$.blocks.B.members[1]", "[3,1]"));
  const Outcome o = execute("run", c, settings_of(c));
  EXPECT_EQ(o.exit_code, kExitConfigError);
  EXPECT_FALSE(o.report["valid"].get<bool>());
}

TEST(Cli, WeakOutsideInnermostIsReported) {
  json c = small_config();
  c["jobs"][0]["stack"] = {"weak(2)", "strong(2)"};
  const auto ds = validate(c);
  EXPECT_TRUE(mentions(ds, "$.jobs[0]", "UnsupportedClassPosition"));
}

TEST(Cli, UnknownReferencesAndShapes) {
  json c = small_config();
  c["jobs"][0]["operator"] = "missing";
  EXPECT_TRUE(mentions(validate(c), "$.jobs[0].operator", "missing"));
  c = small_config();
  c["operators"]["T"]["tensor"] = {{{1}, {2}}};
  EXPECT_TRUE(mentions(validate(c), "$.operators.T.tensor", ""));
}

TEST(Cli, ParseErrorCarriesLineAndColumn) {
  try {
    parse_config("{\n  \"spaces\": {,\n}");
    FAIL() << "no parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line, 2u);
    EXPECT_GE(e.column, 13u);
  }
}

TEST(Cli, SettingsPrecedence) {
  json c = small_config();
  EXPECT_EQ(resolve_settings(c, {}, std::nullopt).seed, 0u);
  EXPECT_EQ(resolve_settings(c, {}, 7).seed, 7u);
  c["settings"] = {{"seed", 11}, {"budget", 5}};
  EXPECT_EQ(resolve_settings(c, {}, 7).seed, 11u);
  Overrides o;
  o.seed = 13;
  const Settings s = resolve_settings(c, o, 7);
  EXPECT_EQ(s.seed, 13u);
  EXPECT_EQ(s.budget, 5u);
}

TEST(Cli, CheckFailureExitCode) {
  json c = small_config();
  c["jobs"][0]["expect"] = 1e6;
  const Outcome o = execute("run", c, settings_of(c));
  EXPECT_EQ(o.exit_code, kExitCheckFailure);
  EXPECT_FALSE(o.report["jobs"][0]["pass"].get<bool>());
}

TEST(Cli, CommandFilterAndEcho) {
  const json c = small_config();
  const Outcome o = execute("norm", c, settings_of(c));
  ASSERT_EQ(o.report["jobs"].size(), 1u);
  EXPECT_EQ(o.report["jobs"][0]["index"], 1);
  // The echoed config reruns to the same report.
  const json echo = o.report["config"];
  const Outcome again = execute("norm", echo, settings_of(echo));
  EXPECT_EQ(strip_timing(again.report)["jobs"], strip_timing(o.report)["jobs"]);
}

TEST(Cli, DeterministicAcrossParallelism) {
  const json config = reference();
  const Settings s = settings_of(config);
  const json a = strip_timing(execute("run", config, s, 1, kData).report);
  const json b = strip_timing(execute("run", config, s, 4, kData).report);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.dump().find("elapsed_ms"), std::string::npos);
}

TEST(Cli, SeedChangesRandomJobs) {
  const json c = small_config();
  Settings s = settings_of(c);
  const json a = execute("run", c, s).report;
  s.seed = 12345;
  const json b = execute("run", c, s).report;
  EXPECT_NE(a["jobs"][0]["seed"], b["jobs"][0]["seed"]);
}

TEST(Binary, VersionAndRun) {
  const Proc v = run_cli("--version");
  EXPECT_EQ(v.status, 0);
  EXPECT_NE(v.out.find(version()), std::string::npos);
  const Proc r = run_cli("run " + (kData / "reference_config.json").string());
  EXPECT_EQ(r.status, 0);
  const json report = json::parse(r.out);
  EXPECT_TRUE(report["pass"].get<bool>());
}

TEST(Binary, ExitCodes) {
  const auto bad = write_temp("blocknorm_bad.json", "{\n  \"jobs\": [\n    {\"command\": \"norm\",}\n  ]\n}");
  const Proc r = run_cli("validate " + bad.string());
  EXPECT_EQ(r.status, kExitConfigError);
  const json report = json::parse(r.out);
  EXPECT_NE(report["diagnostics"][0]["message"].get<std::string>().find("line 3"), std::string::npos)
      << report.dump(2);

  json c = small_config();
  c["jobs"][0]["expect"] = 1e6;
  const auto failing = write_temp("blocknorm_fail.json", c.dump());
  EXPECT_EQ(run_cli("run " + failing.string()).status, kExitCheckFailure);
  EXPECT_EQ(run_cli("validate " + failing.string()).status, kExitPass);
}

TEST(Binary, SeedFlagAndEnvironment) {
  const auto cfg = write_temp("blocknorm_seed.json", small_config().dump());
  const json flag = json::parse(run_cli("--seed 5 run " + cfg.string()).out);
  EXPECT_EQ(flag["settings"]["seed"], 5);
  const json env = json::parse(run_cli_env("BLOCKNORM_SEED=9", "run " + cfg.string()).out);
  EXPECT_EQ(env["settings"]["seed"], 9);
  const json both = json::parse(run_cli_env("BLOCKNORM_SEED=9", "--seed 5 run " + cfg.string()).out);
  EXPECT_EQ(both["settings"]["seed"], 5);
}
