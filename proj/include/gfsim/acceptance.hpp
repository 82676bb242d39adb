#pragma once

#include <functional>
#include <set>
#include <string>
#include <vector>

namespace gfsim::acceptance {

inline constexpr int kCriterionCount = 14;

struct CriterionResult {
    int id = 0;
    std::string title;
    bool passed = false;
    std::string detail; ///< measured values next to their targets
};

struct Options {
    int threads = 0;          ///< campaign threads, <= 0 for all cores
    std::set<int> only;       ///< criteria to run, empty for all
};

using Reporter = std::function<void(const CriterionResult&)>;

/// Runs one criterion, 1..kCriterionCount.
CriterionResult run_criterion(int id, const Options& options);

/// Runs the selected criteria in order, reporting each as it finishes.
std::vector<CriterionResult> run_all(const Options& options, const Reporter& report = {});

/// "PASS  C01  title | detail"
std::string format_line(const CriterionResult& result);

} // namespace gfsim::acceptance
