#pragma once

#include <string>
#include <vector>

#include "blocknorm/theorems.hpp"

namespace blocknorm {

struct SuiteOptions {
  std::size_t instances = 50;
  std::uint64_t seed = 0;
  /// Search budget handed to summing_norm and the weak-norm ascents.
  std::size_t budget = 8;
  Tolerances tol;
};

/// Seeded random-instance suites, one per theorem check:
/// norm-domination, finite-type, ideal, compatibility, diagonal, multiple,
/// partition, coincidence, diagonalizable.
const std::vector<std::string>& suite_names();

/// Runs `instances` seeded random instances of the named suite and merges
/// their reports. Throws InputError for an unknown name.
CheckReport run_suite(const std::string& name, const SuiteOptions& options);

}  // namespace blocknorm
