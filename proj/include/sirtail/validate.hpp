#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace sirtail::acceptance {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

struct Options {
    int threads = 2;
    std::uint64_t seed = 20260810;
};

// Runs the full acceptance suite, printing one pass/fail line per
// criterion to `log`.
std::vector<CriterionResult> run_all(const Options& opts, std::ostream& log);

bool all_passed(const std::vector<CriterionResult>& results);

} // namespace sirtail::acceptance
