#pragma once

// Self-checks of the probability, loss and metric identities on seeded
// random instances. Used by `amgan verify`.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "amgan/prob.hpp"

namespace amgan {

struct PropertyResult {
  std::string name;
  bool passed = false;
  double worst_error = 0.0;
  double tolerance = 0.0;
  std::size_t instances = 0;
  std::string detail;  // first failure, empty when passed
};

struct VerifyReport {
  std::uint64_t seed = 0;
  std::vector<PropertyResult> properties;

  bool passed() const noexcept;
};

using LogitGradientFn =
    std::function<std::vector<double>(const TargetVector&, const LogitVector&)>;

struct VerifyOptions {
  std::uint64_t seed = 7;
  // Implementation under test for the cross-entropy logit gradient.
  LogitGradientFn ce_gradient = ce_logit_gradient;
};

VerifyReport run_verify(const VerifyOptions& options = {});

std::string verify_report_json(const VerifyReport& report);

}  // namespace amgan
