#include "fairkm/hst.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "fairkm/rng.hpp"

namespace fairkm {

namespace {

int levels_for_diameter(double scaled_diameter) {
    if (scaled_diameter <= 1.0) return 1;
    return std::max(1, int(std::ceil(std::log2(scaled_diameter))));
}

} // namespace

Hst build_hst(const MetricSpace& m, uint64_t seed) {
    const int n = m.num_points();
    if (n == 0) raise(ErrorCode::EmptyInput, "build_hst");
    Hst t;
    t.metric = m;
    t.seed = seed;

    Rng rng(mix_seed(seed, 0x4517e3));
    t.varrho = rng.uniform(0.5, 1.0);
    std::vector<int> pi = rng.permutation(n);

    if (n == 1) {
        t.levels = 0;
        t.blocks.push_back({0, 0, -1, 0, {}, {0}});
        t.level_blocks = {{0}};
        t.root = 0;
        t.block_at = {{0}};
        return t;
    }

    double dmin = std::numeric_limits<double>::infinity(), dmax = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double d = m.dist(i, j);
            dmax = std::max(dmax, d);
            if (d > 0) dmin = std::min(dmin, d);
        }
    if (!std::isfinite(dmin)) dmin = 1.0;
    t.scale = dmin;
    t.levels = levels_for_diameter(dmax / t.scale);
    if (t.levels > kMaxTreeLevels)
        raise(ErrorCode::AspectRatioTooLarge, "hst would need " + std::to_string(t.levels) + " levels");

    std::vector<int> pi_rank(n);
    for (int r = 0; r < n; ++r) pi_rank[pi[r]] = r;

    t.block_at.assign(t.levels + 1, std::vector<int>(n, -1));
    t.level_blocks.assign(t.levels + 1, {});

    auto add_block = [&](int level, int parent, int center, std::vector<int> members) {
        int id = int(t.blocks.size());
        t.blocks.push_back({id, level, parent, center, {}, std::move(members)});
        if (parent >= 0) t.blocks[parent].children.push_back(id);
        for (int p : t.blocks[id].members) t.block_at[level][p] = id;
        t.level_blocks[level].push_back(id);
        return id;
    };

    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i;
    t.root = add_block(t.levels, -1, pi[0], all);

    // carve each parent block around its own members in pi order
    for (int level = t.levels - 1; level >= 1; --level) {
        double radius = std::ldexp(t.varrho, level) * t.scale;
        std::vector<int> parents = t.level_blocks[level + 1];
        for (int pid : parents) {
            const auto members = t.blocks[pid].members; // copy: blocks vector may grow
            std::vector<int> by_pi = members;
            std::sort(by_pi.begin(), by_pi.end(), [&](int a, int b) { return pi_rank[a] < pi_rank[b]; });
            std::vector<int> claimed(members.size(), -1);
            std::vector<std::vector<int>> group_members;
            std::vector<int> group_center;
            for (int y : by_pi) {
                std::vector<int> mine;
                for (size_t i = 0; i < members.size(); ++i)
                    if (claimed[i] < 0 && m.dist(members[i], y) <= radius) {
                        claimed[i] = int(group_center.size());
                        mine.push_back(members[i]);
                    }
                if (!mine.empty()) {
                    group_center.push_back(y);
                    group_members.push_back(std::move(mine));
                }
            }
            for (size_t g = 0; g < group_center.size(); ++g)
                add_block(level, pid, group_center[g], std::move(group_members[g]));
        }
    }
    for (int x = 0; x < n; ++x) add_block(0, t.block_at[1][x], x, {x});
    return t;
}

int hst_lca_level(const Hst& tree, int u, int v) {
    int n = tree.metric.num_points();
    if (u < 0 || v < 0 || u >= n || v >= n) raise(ErrorCode::UnknownLeaf, "hst_lca_level");
    for (int level = 0; level <= tree.levels; ++level)
        if (tree.block_at[level][u] == tree.block_at[level][v]) return level;
    raise(ErrorCode::CorruptTable, "leaves share no ancestor");
}

double hst_distance_units(const Hst& tree, int u, int v) {
    if (u == v) return 0.0;
    int j = hst_lca_level(tree, u, v);
    if (j == 0) return 0.0; // colocated copies sharing a leaf cannot happen; guard anyway
    return std::ldexp(1.0, j + 2) - 4.0;
}

double hst_distance(const Hst& tree, int u, int v) {
    return hst_distance_units(tree, u, v) * tree.scale;
}

nlohmann::json Hst::dump() const {
    nlohmann::json blocks_json = nlohmann::json::array();
    for (const auto& b : blocks)
        blocks_json.push_back({{"id", b.id},
                               {"level", b.level},
                               {"center", b.center},
                               {"members", b.members},
                               {"parent", b.parent}});
    return nlohmann::json{{"levels", levels}, {"blocks", blocks_json}};
}

} // namespace fairkm
