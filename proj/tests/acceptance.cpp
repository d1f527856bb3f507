#include <cstdio>
#include <exception>

#include "hb/suite.hpp"

// One PASS/FAIL line per criterion; exit status is nonzero if any fails.
int main() {
    hb::SuiteOptions opt;
    opt.timing = true;
    int failed = 0;
    for (int id = 1; id <= hb::kCriterionCount; ++id) {
        try {
            const auto c = hb::run_criterion(id, opt);
            const bool ok = c.pass();
            if (!ok) ++failed;
            std::printf("[%s] %d %-26s %7.2fs  %s\n", ok ? "PASS" : "FAIL", id, c.title.c_str(), c.seconds,
                        c.summary.c_str());
            if (!ok) std::printf("       first failing check: %s\n", c.report.first_failure()->name.c_str());
        } catch (const std::exception& e) {
            ++failed;
            std::printf("[FAIL] %d error: %s\n", id, e.what());
        }
        std::fflush(stdout);
    }
    std::printf("%d/%d criteria passed\n", hb::kCriterionCount - failed, hb::kCriterionCount);
    return failed == 0 ? 0 : 1;
}
