#pragma once

#include "branchlab/analytics.hpp"
#include "branchlab/io.hpp"
#include "branchlab/simulator.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace branchlab {

struct CheckResult {
    int criterion;
    std::string name;
    double measured;
    double threshold;
    bool passed;
    std::string detail;
};

struct SuiteOptions {
    std::optional<std::uint64_t> seed;       // default: fixed per suite
    std::optional<std::size_t> replicas;     // overrides every Monte Carlo count
    std::ostream* progress = nullptr;        // one line per finished criterion
};

struct CriterionOutcome {
    int criterion;
    bool passed;
    std::vector<const CheckResult*> checks;
};

struct SuiteReport {
    std::string suite;
    std::vector<CheckResult> checks;
    bool underpowered = false;
    double seconds = 0.0;

    bool passed() const;
    std::vector<CriterionOutcome> by_criterion() const;
};

const std::vector<std::string>& suite_names();

SuiteReport verify_suite(std::string_view name, const SuiteOptions& options = {});

// Columns: criterion, check, measured, threshold, passed, detail.
Table report_table(const SuiteReport& report);
std::vector<std::string> report_summary(const SuiteReport& report);
std::string criterion_line(const CriterionOutcome& outcome);

// Number of snapshot/parameter combinations where a pathwise martingale
// bound on the counters fails.
std::size_t pathwise_bound_violations(const PopulationSnapshot& snap, const ModelParams& p);

}  // namespace branchlab
