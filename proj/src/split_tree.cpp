#include "fairkm/split_tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <nlohmann/json.hpp>

#include "fairkm/nets.hpp"
#include "fairkm/rng.hpp"

namespace fairkm {

namespace {

struct Extent {
    double dmin = std::numeric_limits<double>::infinity(); // min nonzero
    double dmax = 0.0;
};

Extent pairwise_extent(const MetricSpace& m) {
    Extent e;
    int n = m.num_points();
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double d = m.dist(i, j);
            e.dmax = std::max(e.dmax, d);
            if (d > 0) e.dmin = std::min(e.dmin, d);
        }
    if (!std::isfinite(e.dmin)) e.dmin = 1.0; // all points colocated
    return e;
}

int levels_for_diameter(double scaled_diameter) {
    if (scaled_diameter <= 1.0) return 1;
    return std::max(1, int(std::ceil(std::log2(scaled_diameter))));
}

} // namespace

SplitTree build_split_tree(const MetricSpace& m, double rho, uint64_t seed) {
    const int n = m.num_points();
    if (n == 0) raise(ErrorCode::EmptyInput, "build_split_tree");
    SplitTree t;
    t.metric = m;
    t.rho = rho;
    t.seed = seed;

    Rng rng(mix_seed(seed, 0x5b1177));
    t.varrho = rng.uniform(0.5, 1.0);
    std::vector<int> pi = rng.permutation(n);

    if (n == 1) {
        // single point: one leaf equal to the root
        t.levels = 0;
        t.blocks.push_back({0, 0, -1, 0, {}, {0}, {0}});
        t.level_blocks = {{0}};
        t.root = 0;
        t.scale = 1.0;
        t.block_at = {{0}};
        return t;
    }

    Extent ext = pairwise_extent(m);
    t.scale = ext.dmin;
    double diameter = ext.dmax / t.scale;
    t.levels = levels_for_diameter(diameter);
    if (t.levels > kMaxTreeLevels)
        raise(ErrorCode::AspectRatioTooLarge, "split tree would need " + std::to_string(t.levels) + " levels");

    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i;

    // net chain Y_{levels-1} subseteq ... subseteq Y_1 subseteq Y_0 = X,
    // Y_i a 2^{i-2}-net of Y_{i-1} (scaled units)
    std::vector<std::vector<int>> chain(t.levels);
    chain[0] = all;
    for (int i = 1; i < t.levels; ++i) {
        double radius = std::ldexp(1.0, i - 2) * t.scale;
        chain[i] = build_net(m, chain[i - 1], radius, pi).centers;
    }

    std::vector<int> pi_rank(n);
    for (int r = 0; r < n; ++r) pi_rank[pi[r]] = r;

    t.block_at.assign(t.levels + 1, std::vector<int>(n, -1));
    t.level_blocks.assign(t.levels + 1, {});

    auto add_block = [&](int level, int parent, int center, std::vector<int> members) {
        int id = int(t.blocks.size());
        t.blocks.push_back({id, level, parent, center, {}, std::move(members), {}});
        if (parent >= 0) t.blocks[parent].children.push_back(id);
        for (int p : t.blocks[id].members) t.block_at[level][p] = id;
        t.level_blocks[level].push_back(id);
        return id;
    };

    t.root = add_block(t.levels, -1, pi[0], all);

    for (int level = t.levels - 1; level >= 1; --level) {
        double radius = std::ldexp(t.varrho, level) * t.scale;
        const auto& net = chain[level];
        // global first-claim carve, then refine against the parent partition
        std::vector<int> claimed(n, -1);
        for (int y : net) // net inherits pi order from build_net
            for (int x = 0; x < n; ++x)
                if (claimed[x] < 0 && m.dist(x, y) <= radius) claimed[x] = y;
        for (int x = 0; x < n; ++x)
            if (claimed[x] < 0)
                raise(ErrorCode::AspectRatioTooLarge, "net failed to cover at level " + std::to_string(level));

        std::map<std::pair<int, int>, std::vector<int>> groups; // (parent, center pi-rank) -> members
        for (int x = 0; x < n; ++x)
            groups[{t.block_at[level + 1][x], pi_rank[claimed[x]]}].push_back(x);
        for (auto& [key, members] : groups)
            add_block(level, key.first, pi[key.second], std::move(members));
    }

    // level 0: singletons (colocated copies each get their own leaf)
    for (int x = 0; x < n; ++x) add_block(0, t.block_at[1][x], x, {x});

    // portals top-down: seed each block's greedy net with the parent portals
    // it contains, then extend over the block members in pi order
    for (int level = t.levels; level >= 1; --level) {
        for (int id : t.level_blocks[level]) {
            auto& blk = t.blocks[id];
            double radius = std::ldexp(t.rho, level + 1) * t.scale;
            std::vector<char> in_block(n, 0);
            for (int p : blk.members) in_block[p] = 1;
            std::vector<int> order;
            if (blk.parent >= 0)
                for (int p : t.blocks[blk.parent].portals)
                    if (in_block[p]) order.push_back(p);
            for (int p : pi)
                if (in_block[p]) order.push_back(p);
            for (int p : order) {
                bool ok = true;
                for (int q : blk.portals)
                    if (m.dist(p, q) <= radius) { ok = false; break; }
                if (ok) blk.portals.push_back(p);
            }
        }
    }
    for (int id : t.level_blocks[0]) t.blocks[id].portals = t.blocks[id].members;

    return t;
}

double portal_route_distance(const SplitTree& tree, int u, int v, int level) {
    if (u < 0 || v < 0 || u >= tree.metric.num_points() || v >= tree.metric.num_points())
        raise(ErrorCode::UnknownLeaf, "portal_route_distance");
    if (level < 0 || level > tree.levels) raise(ErrorCode::SameBlock, "no such level");
    int bu = tree.block_at[level][u], bv = tree.block_at[level][v];
    if (bu == bv) raise(ErrorCode::SameBlock, "points share the level-" + std::to_string(level) + " block");
    double best = std::numeric_limits<double>::infinity();
    for (int p : tree.blocks[bu].portals)
        for (int q : tree.blocks[bv].portals)
            best = std::min(best, tree.dist(u, p) + tree.dist(p, q) + tree.dist(q, v));
    return best;
}

nlohmann::json SplitTree::dump() const {
    nlohmann::json blocks_json = nlohmann::json::array();
    for (const auto& b : blocks)
        blocks_json.push_back({{"id", b.id},
                               {"level", b.level},
                               {"center", b.center},
                               {"members", b.members},
                               {"portals", b.portals},
                               {"parent", b.parent}});
    return nlohmann::json{{"levels", levels}, {"blocks", blocks_json}};
}

} // namespace fairkm
