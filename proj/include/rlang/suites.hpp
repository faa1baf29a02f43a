#pragma once

#include <string>
#include <vector>

namespace rlang {

// Named end-to-end checks, shared by `rlang verify` and the acceptance binary.
struct SuiteInfo {
    std::string name;
    std::string title;
    double limit_seconds = 0;
};

struct SuiteResult {
    std::string name;
    bool passed = false;  // every check held and the run finished within the limit
    bool in_time = false;
    double seconds = 0;
    double limit_seconds = 0;
    std::vector<std::string> failures;
    std::string summary;
};

const std::vector<SuiteInfo>& suite_list();
// Throws ErrorKind::lookup for unknown names.
SuiteResult run_suite(const std::string& name);

}  // namespace rlang
