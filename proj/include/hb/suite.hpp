#pragma once

#include <string>
#include <vector>

#include "hb/report.hpp"

namespace hb {

struct SuiteOptions {
    unsigned long long seed = 1;
    /// Adds the runtime-budget checks and wall times; off keeps reports reproducible.
    bool timing = false;
};

struct CriterionResult {
    int id = 0;
    std::string title;
    ReportDocument report;
    /// One-line digest of the decisive numbers.
    std::string summary;
    double seconds = 0.0;
    bool pass() const { return report.pass(); }
};

inline constexpr int kCriterionCount = 9;

/// Runs acceptance criterion id in 1..9 with its pinned tolerances.
CriterionResult run_criterion(int id, const SuiteOptions& opt = {});

}  // namespace hb
