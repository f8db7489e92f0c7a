#include <iostream>

#include "rwre/acceptance.hpp"

int main() {
    const auto results = rwre::run_acceptance(std::cout, 0, "acceptance_out");
    int failed = 0;
    for (const auto& r : results) failed += r.passed ? 0 : 1;
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed")
              << std::endl;
    return rwre::acceptance_exit_code(results);
}
