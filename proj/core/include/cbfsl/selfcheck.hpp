#pragma once

#include <string>
#include <vector>

#include "cbfsl/learner.hpp"

namespace cbfsl {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Self-contained property and oracle suite backing the `check` subcommand:
/// smooth-minimum sandwich bounds, closed form vs numerical QP, filter
/// Jacobian and MLP gradients against finite differences. Needs no prior
/// training artifacts.
std::vector<CheckResult> run_self_checks(uint64_t seed = 0);

}  // namespace cbfsl
