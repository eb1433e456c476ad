#include <cstdio>

#include "hardy_blowup/acceptance.hpp"

/// One line per criterion: PASS/FAIL, id, name, time, measured values.
int main() {
    using namespace hardy::acceptance;
    int failed = 0;
    for (const auto& r : run_suite(Suite::all)) {
        std::printf("%s [%d] %s (%.3fs < %.0fs)", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(), r.seconds,
                    r.budget_seconds);
        for (const auto& m : r.measures) std::printf(" %s=%.6g", m.key.c_str(), m.value);
        if (!r.detail.empty()) std::printf(" | %s", r.detail.c_str());
        std::printf("\n");
        std::fflush(stdout);
        failed += !r.passed;
    }
    std::printf("%d of 10 criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
