#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace qfno {

struct PropertyResult {
  std::string name;
  bool pass = true;
  // Informational checks record an outcome without gating the suite.
  bool informational = false;
  double max_residual = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct SuiteReport {
  std::string suite;
  std::vector<PropertyResult> properties;

  bool pass() const;
  const PropertyResult* first_failure() const;
};

/// Suites: core, uqft, layers, equiv, grad, all.
const std::vector<std::string>& verify_suite_names();
SuiteReport run_verify_suite(std::string_view suite, std::uint64_t seed = 0);

nlohmann::json to_json(const SuiteReport& report);

}  // namespace qfno
