#include "fairkm/nets.hpp"

#include <algorithm>
#include <limits>

namespace fairkm {

Net build_net(const MetricSpace& m, const std::vector<int>& points, double rho,
              const std::vector<int>& order) {
    if (points.empty()) raise(ErrorCode::EmptyInput, "build_net over empty set");
    std::vector<char> member(m.num_points(), 0);
    for (int p : points) member[p] = 1;
    Net net;
    net.rho = rho;
    for (int p : order) {
        if (p < 0 || p >= m.num_points() || !member[p]) continue;
        bool ok = true;
        for (int c : net.centers)
            if (m.dist(p, c) <= rho) { ok = false; break; } // boundary points are covered, not taken
        if (ok) net.centers.push_back(p);
    }
    return net;
}

double aspect_ratio(const MetricSpace& m, const std::vector<int>& points) {
    double dmax = 0.0, dmin = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < points.size(); ++i)
        for (size_t j = i + 1; j < points.size(); ++j) {
            double d = m.dist(points[i], points[j]);
            dmax = std::max(dmax, d);
            if (d > 0) dmin = std::min(dmin, d);
        }
    if (!(dmax > 0)) raise(ErrorCode::DegenerateSet, "fewer than 2 distinct points");
    return dmax / dmin;
}

Preprocessed preprocess_doubling(const FairInstance& inst, double eps, double cost_estimate) {
    const int n = inst.num_points();
    Preprocessed out;
    out.inst = inst;
    out.original_location.resize(n);
    for (int p = 0; p < n; ++p) out.original_location[p] = inst.metric.location_of(p);
    double n4 = double(n) * n * n * n;
    out.threshold = n > 0 ? eps * cost_estimate / n4 : 0.0;

    // Location remap closed under repetition: scan pairs of in-use locations
    // in index order, remap the larger index onto the smaller.
    auto& metric = out.inst.metric;
    bool changed = true;
    while (changed) {
        changed = false;
        std::vector<int> used;
        for (int p = 0; p < n; ++p) used.push_back(metric.location_of(p));
        std::sort(used.begin(), used.end());
        used.erase(std::unique(used.begin(), used.end()), used.end());
        for (size_t i = 0; i < used.size() && !changed; ++i)
            for (size_t j = i + 1; j < used.size() && !changed; ++j) {
                double d = metric.base_dist(used[i], used[j]);
                if (d > 0 && d < out.threshold) {
                    for (int p = 0; p < n; ++p)
                        if (metric.location_of(p) == used[j]) metric.relocate_point(p, used[i]);
                    changed = true;
                }
            }
    }
    for (int p = 0; p < n; ++p) {
        double moved = metric.base_dist(out.original_location[p], metric.location_of(p));
        out.max_displacement = std::max(out.max_displacement, moved);
    }
    return out;
}

Preprocessed reduce_to_centers(const FairInstance& inst, const std::vector<int>& center_points) {
    if (center_points.empty()) raise(ErrorCode::EmptyCenters, "reduce_to_centers");
    const int n = inst.num_points();
    Preprocessed out;
    out.inst = inst;
    out.original_location.resize(n);
    for (int p = 0; p < n; ++p) out.original_location[p] = inst.metric.location_of(p);

    std::vector<int> center_locs;
    for (int c : center_points) center_locs.push_back(inst.metric.location_of(c));
    std::sort(center_locs.begin(), center_locs.end());
    center_locs.erase(std::unique(center_locs.begin(), center_locs.end()), center_locs.end());

    auto& metric = out.inst.metric;
    for (int p = 0; p < n; ++p) {
        int best = center_locs[0];
        double bestd = metric.base_dist(out.original_location[p], best);
        for (int loc : center_locs) {
            double d = metric.base_dist(out.original_location[p], loc);
            if (d < bestd - kEps) { bestd = d; best = loc; } // ties keep smallest id
        }
        double moved = metric.base_dist(out.original_location[p], best);
        out.max_displacement = std::max(out.max_displacement, moved);
        metric.relocate_point(p, best);
    }
    return out;
}

} // namespace fairkm
