#pragma once

#include <optional>

#include "fairkm/core.hpp"

namespace fairkm {

struct OracleBudget {
    long long max_assignments = 10'000'000;
};

// Exact optimum by exhaustive enumeration: all center subsets of size <= k
// (by size, then lexicographic), all total assignments (mixed-radix),
// restricted to fairness-feasible pairs. Independent of the flow and
// matching modules. `parallel` switches the OpenMP path over center subsets;
// both paths produce identical results.
Solution brute_force_opt(const FairInstance& inst, const OracleBudget& budget = {},
                         const DistFn* dist_override = nullptr, bool parallel = true);

// Minimum-cost fairness-feasible assignment to fixed centers; with lambda
// given, minimum-cost assignment realizing exactly lambda.
Solution brute_force_fixed_centers(const FairInstance& inst, const std::vector<int>& centers,
                                   const std::optional<std::vector<std::vector<int>>>& lambda =
                                       std::nullopt,
                                   const OracleBudget& budget = {},
                                   const DistFn* dist_override = nullptr);

} // namespace fairkm
