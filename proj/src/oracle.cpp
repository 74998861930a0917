#include "fairkm/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fairkm {

namespace {

struct Best {
    double cost = std::numeric_limits<double>::infinity();
    long long rank = -1; // (subset, assignment) enumeration rank for deterministic ties
    std::vector<int> assign;
    std::vector<int> open;

    void offer(double c, long long r, const std::vector<int>& a, const std::vector<int>& f) {
        if (c < cost - kEps || (std::abs(c - cost) <= kEps && (rank < 0 || r < rank))) {
            cost = c;
            rank = r;
            assign = a;
            open = f;
        }
    }
    void merge(const Best& o) {
        if (o.rank >= 0) offer(o.cost, o.rank, o.assign, o.open);
    }
};

double pair_dist(const FairInstance& inst, int client, int facility, const DistFn* ov) {
    return ov ? (*ov)(inst.client_point(client), inst.facility_point(facility))
              : inst.dist_cf(client, facility);
}

// Enumerates every total assignment of clients into `centers`; fairness
// filtered unless lambda_req pins exact per-facility color counts.
void scan_assignments(const FairInstance& inst, const std::vector<int>& centers,
                      const std::optional<std::vector<std::vector<int>>>& lambda_req,
                      const DistFn* ov, long long base_rank, long long budget_left, Best& best) {
    const int nc = inst.num_clients;
    const int nf = int(centers.size());
    if (nc == 0) {
        best.offer(0.0, base_rank, {}, centers);
        return;
    }
    if (nf == 0) return;

    double total = std::pow(double(nf), double(nc));
    if (total > double(budget_left))
        raise(ErrorCode::BudgetExceeded, "assignment enumeration too large");

    std::vector<int> a(nc, 0);
    std::vector<std::vector<int>> counts(nf, std::vector<int>(inst.l, 0));
    std::vector<int> sizes(nf, 0);
    for (int c = 0; c < nc; ++c) {
        counts[0][inst.color[c] - 1]++;
        sizes[0]++;
    }
    double cost = 0.0;
    for (int c = 0; c < nc; ++c) cost += pair_dist(inst, c, centers[0], ov);

    long long rank = 0;
    while (true) {
        bool ok = true;
        if (lambda_req) {
            ok = (counts == *lambda_req);
        } else {
            for (int i = 0; i < nf && ok; ++i)
                if (sizes[i] > 0) ok = fair_counts(counts[i], inst.alpha, inst.beta);
        }
        if (ok) {
            std::vector<int> assign(nc);
            for (int c = 0; c < nc; ++c) assign[c] = centers[a[c]];
            best.offer(cost, base_rank + rank, assign, centers);
        }
        // mixed-radix increment with incremental cost/count updates
        int c = 0;
        while (c < nc) {
            int old = a[c];
            counts[old][inst.color[c] - 1]--;
            sizes[old]--;
            cost -= pair_dist(inst, c, centers[old], ov);
            a[c] = (old + 1) % nf;
            counts[a[c]][inst.color[c] - 1]++;
            sizes[a[c]]++;
            cost += pair_dist(inst, c, centers[a[c]], ov);
            if (a[c] != 0) break;
            ++c;
        }
        if (c == nc) break;
        ++rank;
    }
}

std::vector<std::vector<int>> subsets_up_to_k(int nf, int k) {
    std::vector<std::vector<int>> out;
    for (int size = std::min(k, nf); size >= 1; --size) {
        std::vector<int> comb(size);
        for (int i = 0; i < size; ++i) comb[i] = i;
        while (true) {
            out.push_back(comb);
            int i = size - 1;
            while (i >= 0 && comb[i] == nf - size + i) --i;
            if (i < 0) break;
            ++comb[i];
            for (int j = i + 1; j < size; ++j) comb[j] = comb[j - 1] + 1;
        }
    }
    // enumerate by increasing size, lexicographic
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.size() != b.size()) return a.size() < b.size();
        return a < b;
    });
    return out;
}

Solution finish(const FairInstance& inst, const Best& best) {
    if (best.rank < 0) raise(ErrorCode::Infeasible, "no fairness-feasible solution");
    Solution sol;
    sol.open = best.open;
    std::sort(sol.open.begin(), sol.open.end());
    sol.assign = best.assign;
    sol.lambda = recompute_lambda(sol, inst);
    sol.cost = best.cost;
    return sol;
}

} // namespace

Solution brute_force_opt(const FairInstance& inst, const OracleBudget& budget,
                         const DistFn* dist_override, bool parallel) {
    auto subsets = subsets_up_to_k(inst.num_facilities, inst.k);
    if (inst.num_clients == 0) {
        Solution sol;
        sol.cost = 0.0;
        return sol;
    }
    double per = std::pow(double(std::min(inst.k, inst.num_facilities)),
                          double(inst.num_clients));
    if (per * double(subsets.size()) > double(budget.max_assignments))
        raise(ErrorCode::BudgetExceeded, "oracle enumeration too large");

    const long long stride = 1LL << 40; // rank space per subset
    Best best;
#ifdef _OPENMP
    if (parallel) {
        std::vector<Best> partial;
        #pragma omp parallel
        {
            Best local;
            #pragma omp for schedule(dynamic) nowait
            for (size_t s = 0; s < subsets.size(); ++s)
                scan_assignments(inst, subsets[s], std::nullopt, dist_override,
                                 stride * (long long)s, budget.max_assignments, local);
            #pragma omp critical
            partial.push_back(local);
        }
        for (const auto& p : partial) best.merge(p);
        return finish(inst, best);
    }
#endif
    (void)parallel;
    for (size_t s = 0; s < subsets.size(); ++s)
        scan_assignments(inst, subsets[s], std::nullopt, dist_override, stride * (long long)s,
                         budget.max_assignments, best);
    return finish(inst, best);
}

Solution brute_force_fixed_centers(const FairInstance& inst, const std::vector<int>& centers,
                                   const std::optional<std::vector<std::vector<int>>>& lambda,
                                   const OracleBudget& budget, const DistFn* dist_override) {
    if (centers.empty() && inst.num_clients > 0) raise(ErrorCode::EmptyCenters, "no centers");
    for (int f : centers)
        if (f < 0 || f >= inst.num_facilities) raise(ErrorCode::UnknownFacility, std::to_string(f));
    Best best;
    scan_assignments(inst, centers, lambda, dist_override, 0, budget.max_assignments, best);
    return finish(inst, best);
}

} // namespace fairkm
