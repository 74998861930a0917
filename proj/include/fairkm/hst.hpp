#pragma once

#include <cstdint>
#include <vector>

#include "fairkm/core.hpp"

#include <nlohmann/json_fwd.hpp>

namespace fairkm {

struct HstBlock {
    int id = -1;
    int level = 0;
    int parent = -1;
    int center = -1;
    std::vector<int> children;
    std::vector<int> members;
};

// 2-HST from ball carving confined to each parent block. Edge from a level-i
// block to each of its children has length 2^i (scaled units; `scale`
// converts to metric units).
struct Hst {
    MetricSpace metric;
    std::vector<HstBlock> blocks;
    std::vector<std::vector<int>> level_blocks;
    int root = -1;
    int levels = 0;
    double scale = 1.0;
    double varrho = 0.5;
    uint64_t seed = 0;
    std::vector<std::vector<int>> block_at; // [level][point] -> block id

    int leaf_of(int point) const { return block_at[0][point]; }
    nlohmann::json dump() const;
};

Hst build_hst(const MetricSpace& m, uint64_t seed);

// Level of the lowest common ancestor block of two leaves.
int hst_lca_level(const Hst& tree, int u, int v);

// Tree-path distance in scaled units: 2 * sum_{t=1}^{j} 2^t = 2^{j+2} - 4
// for LCA level j >= 1, and 0 for u == v. Integer-valued, hence exact.
double hst_distance_units(const Hst& tree, int u, int v);

// Same in metric units (units * scale).
double hst_distance(const Hst& tree, int u, int v);

} // namespace fairkm
