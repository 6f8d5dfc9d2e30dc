#pragma once

// Named verification suites behind `qwo check`. Each suite runs on the
// built-in presets and returns one or more TestReports; a suite passes when
// every report passes.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "qwo/stats.hpp"

namespace qwo {

struct SuiteOptions {
    bool quick = false;  // smaller ensembles, same thresholds
    std::uint64_t seed = 20240;
};

struct SuiteResult {
    std::string name;
    std::vector<TestReport> reports;
    double seconds = 0.0;

    bool passed() const;
};

const std::vector<std::string>& suite_names();
bool is_suite(const std::string& name);

// Throws ConfigError for unknown names.
SuiteResult run_suite(const std::string& name, const SuiteOptions& options);

nlohmann::json to_json(const SuiteResult& r);
// {"passed": bool, "quick": bool, "suites": [...]}
nlohmann::json summarize(const std::vector<SuiteResult>& results, const SuiteOptions& options);

}  // namespace qwo
