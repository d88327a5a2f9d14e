#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace invgap {

struct CheckResult {
    std::string name;
    bool pass = false;
    double residual = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

struct VerifyReport {
    std::string suite;
    std::uint64_t seed = 0;
    std::vector<CheckResult> checks;
    bool pass = false;
};

/// Runs the property suite for one module family
/// (gaussian | invariance | linear | bnn) or all of them. The bnn suite
/// uses the given layer widths (default 1-2-2-1).
VerifyReport run_verify(const std::string& suite, std::uint64_t seed,
                        const std::vector<std::int64_t>& bnn_widths = {});

nlohmann::json verify_report_to_json(const VerifyReport& report);

}  // namespace invgap
