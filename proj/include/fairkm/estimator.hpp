#pragma once

#include <cstdint>
#include <functional>

#include "fairkm/core.hpp"
#include "fairkm/oracle.hpp"

namespace fairkm {

// Enumerates fairness-feasible per-facility color-count matrices for the
// given centers (column sums = color histogram, every row all-zero or
// ratio-feasible) and calls `visit` for each. Returns false if the visit
// budget ran out before the enumeration finished.
bool for_each_feasible_lambda(const FairInstance& inst, const std::vector<int>& centers,
                              long long max_visits,
                              const std::function<void(const std::vector<std::vector<int>>&)>& visit);

// Minimum-cost fairness-feasible assignment to fixed centers, computed as a
// min-cost flow per feasible lambda. Exact when the lambda enumeration
// completes within budget; throws BudgetExceeded otherwise.
Solution fair_assign_to_centers(const FairInstance& inst, const std::vector<int>& centers,
                                long long max_lambdas = 2'000'000);

struct Estimate {
    std::vector<int> centers; // facility ids
    double cost = 0.0;
    Solution sol;
};

// Feasible-solution cost estimate used to scale preprocessing thresholds:
// exact oracle below `oracle_limit` points, otherwise plain k-median local
// search followed by fairness repair through the flow module.
Estimate estimate_feasible_cost(const FairInstance& inst, uint64_t seed, int oracle_limit = 10);

} // namespace fairkm
