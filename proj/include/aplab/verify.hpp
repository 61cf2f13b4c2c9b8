#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace aplab {

/// Outcome of one verification suite: a pass flag plus deterministic,
/// human-readable detail lines (measured constants, fitted slopes, failures).
struct SuiteResult {
  std::string name;
  bool passed = true;
  std::vector<std::string> lines;
};

/// Canonical suite order. Each suite exercises one item of the project's
/// check list, from exact identities through randomized property batches to
/// slope reproduction and byte-determinism.
const std::vector<std::string>& all_suite_names();

/// Runs one suite by name; throws std::invalid_argument for unknown names.
/// A suite failure is reported in the result, never thrown.
SuiteResult run_suite(std::string_view name, std::uint64_t seed);

/// Deterministic multi-line text report (used verbatim by the CLI).
std::string suite_report(std::span<const SuiteResult> results);

}  // namespace aplab
