#pragma once

#include <span>
#include <utility>
#include <vector>

#include "fairkm/core.hpp"
#include "fairkm/dp_config.hpp"
#include "fairkm/split_tree.hpp"

namespace fairkm {

// Side classes of the bipartite inter-portal graph. Left side R holds
// parent-entering clients and child-leaving clients; right side S holds
// child-entering clients and parent-leaving clients.
enum class MatchClass { EnterParent, LeaveChild, EnterChild, LeaveParent };

struct MatchVertex {
    MatchClass cls;
    int portal; // point id
    int child;  // child index, -1 for parent-side vertices
};

struct MatchGraph {
    std::vector<MatchVertex> left, right;
    std::vector<std::vector<double>> weight; // weight[i][j] < 0 means no edge
};

// Builds the per-color bipartite graph between a parent configuration and
// its children's configurations. Edge classes: EnterParent x EnterChild,
// LeaveChild x LeaveParent, and LeaveChild x EnterChild across distinct
// children; weights are portal-to-portal metric distances.
MatchGraph build_phi(const MetricSpace& m, const DoublingConfig& parent,
                     std::span<const DoublingConfig> children,
                     const std::vector<int>& parent_portals,
                     const std::vector<std::vector<int>>& child_portals, int color);

// Minimum-weight perfect matching (Hungarian with potentials). Returns the
// right-vertex matched to each left vertex and the total weight. Throws
// NoPerfectMatching when the edge structure admits none.
std::pair<std::vector<int>, double> min_weight_perfect_matching(const MatchGraph& g);

// Sum over colors of the per-color minimum matching weights.
double tau(const MetricSpace& m, const DoublingConfig& parent,
           std::span<const DoublingConfig> children, const std::vector<int>& parent_portals,
           const std::vector<std::vector<int>>& child_portals, int colors);

// Convenience overload resolving portal sets from the tree blocks.
double tau(const SplitTree& tree, const DoublingConfig& parent,
           std::span<const DoublingConfig> children, int colors);

} // namespace fairkm
