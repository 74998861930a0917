#pragma once

#include <vector>

#include "fairkm/core.hpp"

namespace fairkm {

struct Net {
    std::vector<int> centers; // point ids, in greedy acceptance order
    double rho = 0.0;
};

// Greedy net over `order`: a point is taken iff it lies at distance >= rho
// from every previously taken point. Output covers `points` within rho and
// is rho-separated.
Net build_net(const MetricSpace& m, const std::vector<int>& points, double rho,
              const std::vector<int>& order);

// max pairwise distance / min nonzero pairwise distance
double aspect_ratio(const MetricSpace& m, const std::vector<int>& points);

struct Preprocessed {
    FairInstance inst;
    std::vector<int> original_location; // per point, for restoring final costs
    double threshold = 0.0;             // merge threshold actually used
    double max_displacement = 0.0;
};

// Merge step: while two locations in use lie closer than
// eps*cost_estimate/n^4, colocate one onto the other (ids survive). The
// result has min nonzero inter-location distance >= threshold.
Preprocessed preprocess_doubling(const FairInstance& inst, double eps, double cost_estimate);

// Relocation step: every point moves to its nearest center (ties to the
// smallest center location id); at most |centers| distinct locations remain.
Preprocessed reduce_to_centers(const FairInstance& inst, const std::vector<int>& center_points);

} // namespace fairkm
