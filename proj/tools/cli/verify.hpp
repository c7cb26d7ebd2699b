#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cli/artifacts.hpp"
#include "cli/config.hpp"

namespace leedecay::cli {

enum class Status { Pass, Fail, Skip };

std::string to_string(Status s);

struct CriterionResult {
    int id = 0;
    std::string name;
    Status status = Status::Fail;
    std::string detail;
    nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
    double seconds = 0.0;         // wall time; printed, never written to report.json
    double budget_seconds = 0.0;  // 0: no budget
};

struct VerifyReport {
    std::vector<CriterionResult> criteria;
    std::vector<Artifact> artifacts;  // CSVs of the runs plus report.json

    bool passed() const;
};

// One line per criterion: "[PASS] 4 probability_conservation: ...".
std::string format_line(const CriterionResult& r);

// Runs every acceptance criterion against the config's model. Criteria that
// need a decaying state are skipped in the stable regime. on_result is
// called as each criterion finishes.
VerifyReport run_verify(const RunConfig& config, unsigned threads,
                        const std::function<void(const CriterionResult&)>& on_result = {});

}  // namespace leedecay::cli
