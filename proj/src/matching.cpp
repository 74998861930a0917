#include "fairkm/matching.hpp"

#include <algorithm>
#include <functional>
#include <limits>

namespace fairkm {

MatchGraph build_phi(const MetricSpace& m, const DoublingConfig& parent,
                     std::span<const DoublingConfig> children,
                     const std::vector<int>& parent_portals,
                     const std::vector<std::vector<int>>& child_portals, int color) {
    MatchGraph g;
    for (size_t i = 0; i < parent_portals.size(); ++i) {
        for (int q = 0; q < parent.enter[i][color]; ++q)
            g.left.push_back({MatchClass::EnterParent, parent_portals[i], -1});
        for (int q = 0; q < -parent.leave[i][color]; ++q)
            g.right.push_back({MatchClass::LeaveParent, parent_portals[i], -1});
    }
    for (size_t j = 0; j < children.size(); ++j) {
        const auto& cfg = children[j];
        for (size_t i = 0; i < child_portals[j].size(); ++i) {
            for (int q = 0; q < cfg.enter[i][color]; ++q)
                g.right.push_back({MatchClass::EnterChild, child_portals[j][i], int(j)});
            for (int q = 0; q < -cfg.leave[i][color]; ++q)
                g.left.push_back({MatchClass::LeaveChild, child_portals[j][i], int(j)});
        }
    }
    if (g.left.size() != g.right.size())
        raise(ErrorCode::InconsistentConfigs,
              "|R| = " + std::to_string(g.left.size()) + " != |S| = " + std::to_string(g.right.size()));

    g.weight.assign(g.left.size(), std::vector<double>(g.right.size(), -1.0));
    for (size_t a = 0; a < g.left.size(); ++a)
        for (size_t b = 0; b < g.right.size(); ++b) {
            const auto& u = g.left[a];
            const auto& v = g.right[b];
            bool edge = false;
            if (u.cls == MatchClass::EnterParent && v.cls == MatchClass::EnterChild) edge = true;
            else if (u.cls == MatchClass::LeaveChild && v.cls == MatchClass::LeaveParent) edge = true;
            else if (u.cls == MatchClass::LeaveChild && v.cls == MatchClass::EnterChild &&
                     u.child != v.child) edge = true;
            if (edge) g.weight[a][b] = m.dist(u.portal, v.portal);
        }
    return g;
}

namespace {

// Kuhn's augmenting-path maximum matching on the edge structure only.
bool has_perfect_matching(const MatchGraph& g) {
    int n = int(g.left.size());
    if (n == 0) return true;
    std::vector<int> match_r(n, -1);
    std::vector<char> used;
    std::function<bool(int)> try_kuhn = [&](int a) -> bool {
        for (int b = 0; b < n; ++b) {
            if (g.weight[a][b] < 0 || used[b]) continue;
            used[b] = 1;
            if (match_r[b] < 0 || try_kuhn(match_r[b])) {
                match_r[b] = a;
                return true;
            }
        }
        return false;
    };
    for (int a = 0; a < n; ++a) {
        used.assign(n, 0);
        if (!try_kuhn(a)) return false;
    }
    return true;
}

} // namespace

std::pair<std::vector<int>, double> min_weight_perfect_matching(const MatchGraph& g) {
    const int n = int(g.left.size());
    if (int(g.right.size()) != n)
        raise(ErrorCode::InconsistentConfigs, "sides differ");
    if (n == 0) return {{}, 0.0};
    if (!has_perfect_matching(g)) raise(ErrorCode::NoPerfectMatching, "phi graph");

    // missing edges become large sentinels; a finite perfect matching exists,
    // so the optimum never uses one
    const double kBig = 1e30;
    std::vector<std::vector<double>> a(n + 1, std::vector<double>(n + 1, 0.0));
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j)
            a[i][j] = g.weight[i - 1][j - 1] < 0 ? kBig : g.weight[i - 1][j - 1];

    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, std::numeric_limits<double>::infinity());
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            int i0 = p[j0], j1 = 0;
            double delta = std::numeric_limits<double>::infinity();
            for (int j = 1; j <= n; ++j)
                if (!used[j]) {
                    double cur = a[i0][j] - u[i0] - v[j];
                    if (cur < minv[j]) { minv[j] = cur; way[j] = j0; }
                    if (minv[j] < delta) { delta = minv[j]; j1 = j; }
                }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) { u[p[j]] += delta; v[j] -= delta; }
                else minv[j] -= delta;
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }

    std::vector<int> match(n, -1);
    double total = 0.0;
    for (int j = 1; j <= n; ++j)
        if (p[j]) {
            match[p[j] - 1] = j - 1;
            total += g.weight[p[j] - 1][j - 1];
        }
    if (std::count(match.begin(), match.end(), -1) > 0)
        raise(ErrorCode::NoPerfectMatching, "hungarian left a row unmatched");
    return {match, total};
}

double tau(const MetricSpace& m, const DoublingConfig& parent,
           std::span<const DoublingConfig> children, const std::vector<int>& parent_portals,
           const std::vector<std::vector<int>>& child_portals, int colors) {
    double total = 0.0;
    for (int t = 0; t < colors; ++t) {
        MatchGraph g = build_phi(m, parent, children, parent_portals, child_portals, t);
        total += min_weight_perfect_matching(g).second;
    }
    return total;
}

double tau(const SplitTree& tree, const DoublingConfig& parent,
           std::span<const DoublingConfig> children, int colors) {
    std::vector<std::vector<int>> child_portals;
    for (const auto& c : children) child_portals.push_back(tree.blocks[c.block].portals);
    return tau(tree.metric, parent, children, tree.blocks[parent.block].portals, child_portals,
               colors);
}

} // namespace fairkm
