#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "spadapt/io.hpp"

namespace spadapt::verify {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  /// Headline measurement and the bound it is compared with.
  double measured = 0.0;
  double tolerance = 0.0;
  std::string comparison;  // e.g. "<=", ">="
  std::string detail;
  double seconds = 0.0;
};

enum class Suite { all, oracle, rates, coverage, design };

/// Accepts all | oracle | rates | coverage | design; throws std::invalid_argument otherwise.
Suite suite_from_string(const std::string& s);
std::string to_string(Suite s);
std::vector<int> criteria_of(Suite s);

struct VerifyOptions {
  std::uint64_t seed = 20211;
};

CriterionResult run_criterion(int id, const VerifyOptions& options = {});

/// Runs the suite's criteria in order, calling `report` after each one.
std::vector<CriterionResult> run_suite(Suite suite, const VerifyOptions& options = {},
                                       const std::function<void(const CriterionResult&)>& report = {});

/// "PASS  3 spike-and-slab oracle: measured 2.1e-15 <= 1e-12 (0.4 s)".
std::string format_line(const CriterionResult& r);
Json to_json(const std::vector<CriterionResult>& results);

}  // namespace spadapt::verify
