#include <doctest.h>

#include <stdexcept>
#include <vector>

#include "aplab/verify.hpp"

using namespace aplab;

TEST_CASE("suite registry") {
  const std::vector<std::string>& names = all_suite_names();
  REQUIRE(names.size() == 12);
  CHECK(names == std::vector<std::string>{"identity", "duality", "jensen", "sparsity",
                                          "wnorm", "corona", "testing", "bounds", "slopes",
                                          "observation", "interp", "determinism"});
  CHECK_THROWS_AS(run_suite("no-such-suite", 0), std::invalid_argument);
}

TEST_CASE("a quick suite runs and reports") {
  const SuiteResult res = run_suite("interp", 3);
  CHECK(res.name == "interp");
  CHECK(res.passed);

  const std::vector<SuiteResult> all{res};
  const std::string report = suite_report(all);
  CHECK(report.find("suite interp: pass") != std::string::npos);
  CHECK(report.find("1/1 suites passed") != std::string::npos);
}
