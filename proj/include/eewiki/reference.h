#pragma once

// Naive bottom-up evaluator used as a test oracle for solve(). Each stratum
// is iterated to a fixpoint by re-running every rule against every fact,
// matching sentences directly with match_all(); nothing is shared with the
// compiled engine except builtin arithmetic and aggregate folding.

#include "eewiki/engine.h"

namespace ee {

AnswerTable solve_reference(const Rulebase& rb, const Query& q, const EngineLimits& limits = {});

}  // namespace ee
