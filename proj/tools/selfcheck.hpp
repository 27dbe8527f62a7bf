#pragma once

#include <string>
#include <vector>

namespace colonmap::cli {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

// Embedded oracle suite: every check compares a library code path against an
// independent implementation computed right here. Deterministic (fixed
// seeds). COLONMAP_DEBUG_SSIM_C1 deliberately corrupts the SSIM constant fed
// to the implementation side, as a negative control.
std::vector<CheckResult> run_selfcheck();

} // namespace colonmap::cli
