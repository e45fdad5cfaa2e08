#pragma once

// Self-checks of the outage model on random links. Used by `comp validate`.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "comp/analytic.hpp"

namespace comp {

struct ValidationOptions {
  std::size_t instances = 200;       // random links per suite
  std::size_t mc_instances = 20;     // for the Monte-Carlo suites
  std::size_t mc_samples = 200'000;
  double mc_tolerance = 0.01;
  std::uint64_t seed = 1;
  ConditioningPolicy policy;
  /// Adds a link with two identical serving powers to the separation suite.
  bool inject_degenerate = false;
  std::vector<std::string> suites;  // empty: all
};

struct SuiteResult {
  std::string name;
  bool passed = true;
  std::size_t checks = 0;
  std::size_t failures = 0;
  double worst = 0.0;  // worst observed error
  double tolerance = 0.0;
  std::vector<std::string> messages;  // first few failures
};

struct ValidationReport {
  std::vector<SuiteResult> suites;
  bool passed() const;
  nlohmann::json to_json() const;
};

std::vector<std::string> validation_suite_names();

/// Throws std::invalid_argument for an unknown suite name.
ValidationReport run_validation(const ValidationOptions& options);

}  // namespace comp
