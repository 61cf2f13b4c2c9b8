// Acceptance gate: runs every verification suite once with a fixed seed and
// prints one pass/fail line per criterion. Exit code 0 iff all pass.
#include <cstdio>

#include "aplab/verify.hpp"

namespace {

struct Criterion {
  int number;
  const char* description;
  const char* suite;
};

constexpr Criterion kCriteria[] = {
    {1, "uniform weight scores exactly 1", "identity"},
    {2, "per-interval duality identity", "duality"},
    {3, "characteristic monotonicity and conjugation", "jensen"},
    {4, "sparse sandwich and packing", "sparsity"},
    {5, "weighted maximal p' norm bound", "wnorm"},
    {6, "corona invariants and summation bound", "corona"},
    {7, "testing bracket and hand value", "testing"},
    {8, "testing constants below fitted bounds", "bounds"},
    {9, "two-singularity slope reproduction", "slopes"},
    {10, "single-power slope reproduction", "observation"},
    {11, "interpolation exponent identities", "interp"},
    {12, "byte-identical repeated runs", "determinism"},
};

}  // namespace

int main() {
  int failures = 0;
  for (const Criterion& c : kCriteria) {
    const aplab::SuiteResult res = aplab::run_suite(c.suite, 42);
    std::printf("criterion %2d (%s): %s\n", c.number, c.description,
                res.passed ? "PASS" : "FAIL");
    for (const std::string& line : res.lines) std::printf("    %s\n", line.c_str());
    std::fflush(stdout);
    if (!res.passed) ++failures;
  }
  std::printf("%d/12 criteria passed\n", 12 - failures);
  return failures == 0 ? 0 : 1;
}
