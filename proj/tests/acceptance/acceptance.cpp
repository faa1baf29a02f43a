// One line per acceptance criterion; exits non-zero when any fails.
// Time limits live with the suites (rlang/suites.hpp).

#include <cstdio>
#include <string>

#include "rlang/suites.hpp"

int main(int argc, char** argv) {
    std::string only = argc > 1 ? argv[1] : "";
    int failed = 0, index = 0;
    for (auto& info : rlang::suite_list()) {
        ++index;
        if (!only.empty() && only != info.name) continue;
        auto r = rlang::run_suite(info.name);
        for (auto& ch : r.summary)
            if (ch == '\n') ch = ' ';
        std::printf("%s %2d %-20s %7.2fs / %3.0fs  %s\n", r.passed ? "PASS" : "FAIL", index, r.name.c_str(), r.seconds,
                    r.limit_seconds, r.summary.c_str());
        if (!r.in_time) std::printf("     over the time limit\n");
        for (auto& f : r.failures) std::printf("     %s\n", f.c_str());
        std::fflush(stdout);
        failed += !r.passed;
    }
    std::printf("%d failed\n", failed);
    return failed == 0 ? 0 : 1;
}
