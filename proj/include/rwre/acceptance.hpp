#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rwre {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
};

// Runs every acceptance criterion, printing one PASS/FAIL line per criterion
// to `log`. Scratch files go under scratch_dir (created, contents replaced).
std::vector<CriterionResult> run_acceptance(std::ostream& log, int workers,
                                            const std::string& scratch_dir);

// 0 when everything passed, 2 otherwise.
int acceptance_exit_code(const std::vector<CriterionResult>& results);

}  // namespace rwre
