#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace cll {

struct PropertyResult {
  std::string name;
  long long checks = 0;
  long long failures = 0;
  double worst = 0.0;          // largest residual seen (property-specific meaning)
  std::string first_failure;   // empty when failures == 0

  bool passed() const noexcept { return failures == 0 && checks > 0; }
};

struct VerifyOptions {
  std::uint64_t seed = 0;
  int sampler_draws = 100000;
  int fuzz_inputs = 10000;
};

/// Names of the properties run_property_suite executes, in order.
std::vector<std::string> property_names();

/// Runs every property check. `progress` (optional) is called after each
/// property completes.
std::vector<PropertyResult> run_property_suite(const VerifyOptions& options = {},
                                               const std::function<void(const PropertyResult&)>& progress = {});

}  // namespace cll
