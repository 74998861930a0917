#include "fairkm/estimator.hpp"

#include <algorithm>
#include <limits>

#include "fairkm/flow.hpp"
#include "fairkm/rng.hpp"

namespace fairkm {

bool for_each_feasible_lambda(const FairInstance& inst, const std::vector<int>& centers,
                              long long max_visits,
                              const std::function<void(const std::vector<std::vector<int>>&)>& visit) {
    auto hist = inst.color_histogram();
    const int eta = int(centers.size());
    std::vector<std::vector<int>> lambda(eta, std::vector<int>(inst.l, 0));
    long long visits = 0;
    bool complete = true;

    // DFS facility by facility over fairness-feasible rows, tracking the
    // remaining per-color totals; the last facility's row is forced.
    std::function<void(int, std::vector<int>&)> rec = [&](int i, std::vector<int>& rem) {
        if (!complete) return;
        if (i == eta - 1) {
            lambda[i] = rem;
            if (fair_counts(lambda[i], inst.alpha, inst.beta)) {
                if (++visits > max_visits) { complete = false; return; }
                visit(lambda);
            }
            return;
        }
        std::function<void(int)> pick = [&](int t) {
            if (!complete) return;
            if (t == inst.l) {
                if (fair_counts(lambda[i], inst.alpha, inst.beta)) rec(i + 1, rem);
                return;
            }
            for (int q = 0; q <= rem[t] && complete; ++q) {
                lambda[i][t] = q;
                rem[t] -= q;
                pick(t + 1);
                rem[t] += q;
            }
            lambda[i][t] = 0;
        };
        pick(0);
    };
    if (eta == 0) return true;
    std::vector<int> rem = hist;
    rec(0, rem);
    return complete;
}

Solution fair_assign_to_centers(const FairInstance& inst, const std::vector<int>& centers,
                                long long max_lambdas) {
    if (centers.empty() && inst.num_clients > 0) raise(ErrorCode::EmptyCenters, "no centers");
    if (inst.num_clients == 0) {
        Solution sol;
        sol.open = centers;
        sol.lambda.assign(centers.size(), std::vector<int>(inst.l, 0));
        return sol;
    }
    double best_cost = std::numeric_limits<double>::infinity();
    Solution best;
    bool found = false;
    bool complete = for_each_feasible_lambda(
        inst, centers, max_lambdas, [&](const std::vector<std::vector<int>>& lambda) {
            Solution sol = assign_clients(inst, centers, lambda);
            if (!found || sol.cost < best_cost - kEps) {
                best = sol;
                best_cost = sol.cost;
                found = true;
            }
        });
    if (!complete) {
        if (found) return best; // best-effort: feasible but possibly not optimal
        raise(ErrorCode::BudgetExceeded, "lambda enumeration exceeded budget");
    }
    if (!found) raise(ErrorCode::Infeasible, "no fairness-feasible lambda for these centers");
    return best;
}

namespace {

// plain (unfair) k-median local search with single swaps
std::vector<int> local_search_centers(const FairInstance& inst, uint64_t seed) {
    const int nf = inst.num_facilities;
    const int k = std::min(inst.k, nf);
    auto cost_of = [&](const std::vector<int>& centers) {
        double total = 0.0;
        for (int c = 0; c < inst.num_clients; ++c) {
            double best = std::numeric_limits<double>::infinity();
            for (int f : centers) best = std::min(best, inst.dist_cf(c, f));
            total += best;
        }
        return total;
    };
    Rng rng(mix_seed(seed, 0x10ca1));
    std::vector<int> centers = rng.permutation(nf);
    centers.resize(k);
    std::sort(centers.begin(), centers.end());
    double cur = cost_of(centers);
    bool improved = true;
    while (improved) {
        improved = false;
        for (int i = 0; i < k && !improved; ++i)
            for (int f = 0; f < nf && !improved; ++f) {
                if (std::find(centers.begin(), centers.end(), f) != centers.end()) continue;
                auto cand = centers;
                cand[i] = f;
                std::sort(cand.begin(), cand.end());
                double c = cost_of(cand);
                if (c < cur - kEps) {
                    centers = cand;
                    cur = c;
                    improved = true;
                }
            }
    }
    return centers;
}

} // namespace

Estimate estimate_feasible_cost(const FairInstance& inst, uint64_t seed, int oracle_limit) {
    Estimate est;
    if (inst.num_points() <= oracle_limit) {
        est.sol = brute_force_opt(inst);
        est.cost = est.sol.cost;
        est.centers = est.sol.open;
        return est;
    }
    std::vector<int> centers = local_search_centers(inst, seed);
    est.sol = fair_assign_to_centers(inst, centers, 200'000);
    est.cost = est.sol.cost;
    est.centers = est.sol.open;
    return est;
}

} // namespace fairkm
