#pragma once

#include <cstdint>
#include <vector>

#include "fairkm/core.hpp"

#include <nlohmann/json_fwd.hpp>

namespace fairkm {

struct SplitBlock {
    int id = -1;
    int level = 0;
    int parent = -1;
    int center = -1;               // carving center (may lie outside members)
    std::vector<int> children;
    std::vector<int> members;      // point ids
    std::vector<int> portals;      // point ids, subset of members
};

// Randomized hierarchical decomposition with portal nets. All radii are
// measured in scaled units (the metric is normalized so the minimum nonzero
// distance is 1); `scale` converts back to metric units.
struct SplitTree {
    MetricSpace metric;
    std::vector<SplitBlock> blocks;
    std::vector<std::vector<int>> level_blocks; // block ids per level 0..levels
    int root = -1;
    int levels = 0; // root sits at this level
    double scale = 1.0;
    double rho = 0.25;
    double varrho = 0.5;
    uint64_t seed = 0;
    std::vector<std::vector<int>> block_at; // [level][point] -> block id

    double dist(int u, int v) const { return metric.dist(u, v); }
    int leaf_of(int point) const { return block_at[0][point]; }
    nlohmann::json dump() const;
};

// Ball-carving construction: per level the points are claimed greedily by
// net points in pi-order with radius 2^i * varrho, refined against the
// parent partition so the hierarchy nests. Portal nets are built top-down,
// each block's net seeded with the parent portals it contains, which makes
// the portal sets exact (rho*2^{i+1})-nets that also nest.
SplitTree build_split_tree(const MetricSpace& m, double rho, uint64_t seed);

// min over portals p of u's block, q of v's block at `level` of
// dist(u,p) + dist(p,q) + dist(q,v)
double portal_route_distance(const SplitTree& tree, int u, int v, int level);

} // namespace fairkm
