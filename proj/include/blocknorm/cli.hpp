#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "blocknorm/error.hpp"
#include "blocknorm/serialize.hpp"
#include "blocknorm/theorems.hpp"

namespace blocknorm::cli {

std::string version();

enum ExitCode : int {
  kExitPass = 0,
  kExitCheckFailure = 1,
  kExitConfigError = 2,
  kExitInternalFailure = 3,
};

/// A problem found in a config, located by a JSON path such as
/// "$.jobs[1].block" or by line and column for syntax errors.
struct Diagnostic {
  std::string path;
  std::string message;
};

json to_json(const Diagnostic& d);

class ParseError : public InputError {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what);
  std::size_t line;
  std::size_t column;
};

/// Parses JSON text; syntax errors become ParseError with 1-based line/column.
json parse_config(const std::string& text);
json load_config_file(const std::filesystem::path& file);

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> budget;
  std::optional<double> tol_identity;
  std::optional<double> tol_chain;
};

struct Settings {
  std::uint64_t seed = 0;
  std::size_t budget = 32;
  Tolerances tol;
};

/// Precedence per field: flag, then the config's "settings", then the
/// environment seed, then the defaults.
Settings resolve_settings(const json& config, const Overrides& overrides,
                          std::optional<std::uint64_t> env_seed);

/// Reads BLOCKNORM_SEED; nullopt when unset. Throws InputError if malformed.
std::optional<std::uint64_t> env_seed();

/// Checks every table and job. Relative tensor_file paths resolve against
/// `base_dir`.
std::vector<Diagnostic> validate(const json& config,
                                 const std::filesystem::path& base_dir = {});

struct Outcome {
  json report;
  int exit_code = kExitPass;
};

/// The subcommands: norm, summing-norm, check, witness, validate, and run
/// (every job regardless of its command).
const std::vector<std::string>& commands();

/// Validates, then runs the jobs whose "command" matches `command` (all of
/// them for "run"). Reports follow config order whatever `parallelism` is.
/// Internal failures keep the partial report and exit with
/// kExitInternalFailure.
Outcome execute(const std::string& command, const json& config, const Settings& settings,
                std::size_t parallelism = 1, const std::filesystem::path& base_dir = {});

/// Copy of `report` without "elapsed_ms" fields, for determinism comparisons.
json strip_timing(const json& report);

}  // namespace blocknorm::cli
