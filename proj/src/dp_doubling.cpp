#include "fairkm/dp_doubling.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "fairkm/estimator.hpp"
#include "fairkm/flow.hpp"
#include "fairkm/matching.hpp"
#include "fairkm/nets.hpp"
#include "fairkm/rng.hpp"

namespace fairkm {

DoublingDp::DoublingDp(const SplitTree& tree, const FairInstance& inst, long long max_states)
    : tree_(tree), inst_(inst), max_states_(max_states) {
    if (inst_.l > 8) raise(ErrorCode::InvalidParams, "doubling dp supports at most 8 colors");
    const int nb = int(tree_.blocks.size());
    children_.resize(nb);
    block_colors_.assign(nb, std::vector<int>(inst_.l, 0));
    for (int b = 0; b < nb; ++b) {
        children_[b] = tree_.blocks[b].children;
        std::sort(children_[b].begin(), children_[b].end(), [&](int x, int y) {
            return *std::min_element(tree_.blocks[x].members.begin(), tree_.blocks[x].members.end()) <
                   *std::min_element(tree_.blocks[y].members.begin(), tree_.blocks[y].members.end());
        });
        for (int p : tree_.blocks[b].members)
            if (inst_.is_client_point(p)) block_colors_[b][inst_.color[p] - 1]++;
    }
    total_colors_ = inst_.color_histogram();
    tables_.resize(nb);
}

void DoublingDp::bump_states(long long amount) {
    states_ += amount;
    if (states_ > max_states_)
        raise(ErrorCode::StateBudgetExceeded, "doubling dp exceeded " + std::to_string(max_states_));
}

DoublingDp::Key DoublingDp::key_of(const DoublingConfig& cfg) const {
    const int m = int(cfg.enter.size());
    Key key;
    key.reserve(1 + 2 * m * inst_.l);
    key.push_back((signed char)cfg.k);
    for (int i = 0; i < m; ++i)
        for (int t = 0; t < inst_.l; ++t) {
            key.push_back((signed char)cfg.enter[i][t]);
            key.push_back((signed char)(-cfg.leave[i][t]));
        }
    return key;
}

DoublingConfig DoublingDp::config_of(int block, const Key& key) const {
    const int m = int(tree_.blocks[block].portals.size());
    DoublingConfig cfg = DoublingConfig::zero(block, m, inst_.l);
    cfg.k = key[0];
    int pos = 1;
    for (int i = 0; i < m; ++i)
        for (int t = 0; t < inst_.l; ++t) {
            cfg.enter[i][t] = key[pos++];
            cfg.leave[i][t] = -key[pos++];
        }
    return cfg;
}

void DoublingDp::insert(Table& tab, Key key, double cost, std::vector<int> back) {
    bump_states();
    auto it = tab.index.find(key);
    if (it == tab.index.end()) {
        tab.entries.push_back({key, cost, std::move(back)});
        tab.index.emplace(std::move(key), int(tab.entries.size()) - 1);
    } else if (cost < tab.entries[it->second].cost) {
        tab.entries[it->second].cost = cost;
        tab.entries[it->second].child_entries = std::move(back);
    }
}

void DoublingDp::fill_leaf(int block) {
    Table& tab = tables_[block];
    const int l = inst_.l;
    int point = tree_.blocks[block].members.front();
    DoublingConfig cfg = DoublingConfig::zero(block, 1, l);
    if (inst_.is_client_point(point)) {
        cfg.leave[0][inst_.color[point] - 1] = -1;
        insert(tab, key_of(cfg), 0.0, {});
        return;
    }
    insert(tab, key_of(cfg), 0.0, {}); // facility not opened
    cfg = DoublingConfig::zero(block, 1, l);
    cfg.k = 1;
    std::vector<int> q(l, 0);
    while (true) {
        if (fair_counts(q, inst_.alpha, inst_.beta)) {
            cfg.enter[0] = q;
            insert(tab, key_of(cfg), 0.0, {});
        }
        int t = 0;
        while (t < l) {
            if (q[t] < total_colors_[t]) { ++q[t]; break; }
            q[t] = 0;
            ++t;
        }
        if (t == l) break;
    }
}

namespace {

// one crossing event bundle: count clients at a portal point
struct Event {
    int portal;
    int count;
};

// Per-color minimum matching between parent-side portal distributions and
// child-side crossing events (same graph as build_phi, assembled from
// events). Returns nullopt when no perfect matching exists.
std::optional<double> tau_color(const MetricSpace& m, const std::vector<Event>& parent_enter,
                                const std::vector<Event>& parent_leave,
                                const std::vector<std::pair<int, Event>>& child_enter,
                                const std::vector<std::pair<int, Event>>& child_leave) {
    MatchGraph g;
    for (const auto& e : parent_enter)
        for (int q = 0; q < e.count; ++q) g.left.push_back({MatchClass::EnterParent, e.portal, -1});
    for (const auto& [child, e] : child_leave)
        for (int q = 0; q < e.count; ++q) g.left.push_back({MatchClass::LeaveChild, e.portal, child});
    for (const auto& [child, e] : child_enter)
        for (int q = 0; q < e.count; ++q) g.right.push_back({MatchClass::EnterChild, e.portal, child});
    for (const auto& e : parent_leave)
        for (int q = 0; q < e.count; ++q) g.right.push_back({MatchClass::LeaveParent, e.portal, -1});
    if (g.left.size() != g.right.size()) return std::nullopt;
    g.weight.assign(g.left.size(), std::vector<double>(g.right.size(), -1.0));
    for (size_t a = 0; a < g.left.size(); ++a)
        for (size_t b = 0; b < g.right.size(); ++b) {
            const auto& u = g.left[a];
            const auto& v = g.right[b];
            bool edge = (u.cls == MatchClass::EnterParent && v.cls == MatchClass::EnterChild) ||
                        (u.cls == MatchClass::LeaveChild && v.cls == MatchClass::LeaveParent) ||
                        (u.cls == MatchClass::LeaveChild && v.cls == MatchClass::EnterChild &&
                         u.child != v.child);
            if (edge) g.weight[a][b] = m.dist(u.portal, v.portal);
        }
    try {
        return min_weight_perfect_matching(g).second;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::NoPerfectMatching) return std::nullopt;
        throw;
    }
}

// compositions of `total` over `parts` slots, visited in lexicographic order
void for_each_composition(int total, int parts, std::vector<int>& slot,
                          const std::function<void()>& visit, int idx = 0) {
    if (idx == parts - 1) {
        slot[idx] = total;
        visit();
        return;
    }
    for (int q = 0; q <= total; ++q) {
        slot[idx] = q;
        for_each_composition(total - q, parts, slot, visit, idx + 1);
    }
    slot[idx] = 0;
}

} // namespace

void DoublingDp::fill_internal(int block) {
    Table& tab = tables_[block];
    const int l = inst_.l;
    const auto& kids = children_[block];
    const int u = int(kids.size());
    const auto& portals = tree_.blocks[block].portals;
    const int m = int(portals.size());
    const bool is_root = (block == tree_.root);

    int fac_inside = 0;
    for (int p : tree_.blocks[block].members)
        if (!inst_.is_client_point(p)) fac_inside++;
    const int fac_outside = inst_.num_facilities - fac_inside;

    std::vector<int> cap_enter(l), cap_leave(l);
    for (int t = 0; t < l; ++t) {
        cap_enter[t] =
            (is_root || fac_inside == 0) ? 0 : total_colors_[t] - block_colors_[block][t];
        cap_leave[t] = (is_root || fac_outside == 0) ? 0 : block_colors_[block][t];
    }

    // tuple enumeration state
    std::vector<int> pick(u, 0);
    std::vector<std::vector<std::pair<int, Event>>> child_enter(l), child_leave(l);
    std::vector<int> enter_sum(l, 0), leave_sum(l, 0);

    // per-color variant: a parent portal distribution pair plus its matching cost
    struct Variant {
        std::vector<int> enter, leave; // per portal
        double tau = 0.0;
    };
    std::vector<std::vector<Variant>> variants(l);

    std::function<void(int, int, double)> rec = [&](int child_idx, int kappa, double cost) {
        if (child_idx == u) {
            bump_states();
            for (int t = 0; t < l; ++t) {
                variants[t].clear();
                int C = enter_sum[t], D = leave_sum[t];
                int lo = std::max(0, C - D), hi = std::min(C, cap_enter[t]);
                for (int A = lo; A <= hi; ++A) {
                    int B = D - C + A;
                    if (B > cap_leave[t]) continue;
                    std::vector<int> edist(m, 0), ldist(m, 0);
                    for_each_composition(A, m, edist, [&]() {
                        for_each_composition(B, m, ldist, [&]() {
                            for (int i = 0; i < m; ++i)
                                if (edist[i] > 0 && ldist[i] > 0) return; // null crossing
                            bump_states();
                            std::vector<Event> pe, pl;
                            for (int i = 0; i < m; ++i) {
                                if (edist[i]) pe.push_back({portals[i], edist[i]});
                                if (ldist[i]) pl.push_back({portals[i], ldist[i]});
                            }
                            auto t_cost = tau_color(tree_.metric, pe, pl, child_enter[t],
                                                    child_leave[t]);
                            if (t_cost) variants[t].push_back({edist, ldist, *t_cost});
                        });
                    });
                }
                if (variants[t].empty()) return; // no consistent parent config for this color
            }
            // cross product of per-color variants -> table entries
            std::vector<int> back(u);
            for (int j = 0; j < u; ++j) back[j] = pick[j];
            Key key(1 + 2 * m * l, 0);
            key[0] = (signed char)kappa;
            std::function<void(int, double)> emit = [&](int t, double tau_sum) {
                if (t == l) {
                    insert(tab, key, cost + tau_sum, back);
                    return;
                }
                for (const auto& v : variants[t]) {
                    for (int i = 0; i < m; ++i) {
                        key[1 + 2 * (i * l + t)] = (signed char)v.enter[i];
                        key[1 + 2 * (i * l + t) + 1] = (signed char)v.leave[i];
                    }
                    emit(t + 1, tau_sum + v.tau);
                }
                for (int i = 0; i < m; ++i) {
                    key[1 + 2 * (i * l + t)] = 0;
                    key[1 + 2 * (i * l + t) + 1] = 0;
                }
            };
            emit(0, 0.0);
            return;
        }
        const int kid = kids[child_idx];
        const Table& kt = tables_[kid];
        const auto& kportals = tree_.blocks[kid].portals;
        const int km = int(kportals.size());
        for (int e = 0; e < int(kt.entries.size()); ++e) {
            const Entry& ke = kt.entries[e];
            int kap = kappa + ke.key[0];
            if (kap > inst_.k) continue;
            bool ok = true;
            int added_e[8] = {0}, added_l[8] = {0}; // per color deltas (l <= 8 here)
            for (int i = 0; i < km && ok; ++i)
                for (int t = 0; t < l; ++t) {
                    int qe = ke.key[1 + 2 * (i * l + t)];
                    int ql = ke.key[1 + 2 * (i * l + t) + 1];
                    if (qe) {
                        child_enter[t].push_back({child_idx, {kportals[i], qe}});
                        added_e[t] += qe;
                        enter_sum[t] += qe;
                    }
                    if (ql) {
                        child_leave[t].push_back({child_idx, {kportals[i], ql}});
                        added_l[t] += ql;
                        leave_sum[t] += ql;
                    }
                    if (enter_sum[t] > total_colors_[t] ||
                        leave_sum[t] > block_colors_[block][t]) ok = false;
                }
            if (ok) {
                pick[child_idx] = e;
                rec(child_idx + 1, kap, cost + ke.cost);
            }
            for (int t = 0; t < l; ++t) {
                enter_sum[t] -= added_e[t];
                leave_sum[t] -= added_l[t];
                while (added_e[t] > 0) {
                    added_e[t] -= child_enter[t].back().second.count;
                    child_enter[t].pop_back();
                }
                while (added_l[t] > 0) {
                    added_l[t] -= child_leave[t].back().second.count;
                    child_leave[t].pop_back();
                }
            }
        }
    };
    rec(0, 0, 0.0);
}

void DoublingDp::run() {
    for (int level = 0; level <= tree_.levels; ++level)
        for (int b : tree_.level_blocks[level]) {
            if (children_[b].empty()) fill_leaf(b);
            else fill_internal(b);
        }
}

std::optional<double> DoublingDp::root_cost(int k_budget) const {
    const Table& tab = tables_[tree_.root];
    const int m = int(tree_.blocks[tree_.root].portals.size());
    Key key(1 + 2 * m * inst_.l, 0);
    std::optional<double> best;
    for (int kappa = 0; kappa <= k_budget; ++kappa) {
        key[0] = (signed char)kappa;
        auto it = tab.index.find(key);
        if (it != tab.index.end()) {
            double c = tab.entries[it->second].cost;
            if (!best || c < *best) best = c;
        }
    }
    return best;
}

void DoublingDp::collect_open(int block, int entry, Extraction& out) const {
    const Table& tab = tables_[block];
    if (entry < 0 || entry >= int(tab.entries.size()))
        raise(ErrorCode::CorruptTable, "backpointer out of range");
    const Entry& e = tab.entries[entry];
    if (children_[block].empty()) {
        if (e.key[0] == 1) {
            int point = tree_.blocks[block].members.front();
            out.open.push_back(point - inst_.num_clients);
            std::vector<int> lam(inst_.l);
            for (int t = 0; t < inst_.l; ++t) lam[t] = e.key[1 + 2 * t]; // single portal
            out.lambda.push_back(lam);
        }
        return;
    }
    if (int(e.child_entries.size()) != int(children_[block].size()))
        raise(ErrorCode::CorruptTable, "bad backpointer arity");
    for (size_t j = 0; j < children_[block].size(); ++j)
        collect_open(children_[block][j], e.child_entries[j], out);
}

DoublingDp::Extraction DoublingDp::traceback(int k_budget) const {
    const Table& tab = tables_[tree_.root];
    const int m = int(tree_.blocks[tree_.root].portals.size());
    Key key(1 + 2 * m * inst_.l, 0);
    int best_entry = -1;
    double best_cost = std::numeric_limits<double>::infinity();
    for (int kappa = 0; kappa <= k_budget; ++kappa) {
        key[0] = (signed char)kappa;
        auto it = tab.index.find(key);
        if (it != tab.index.end() && tab.entries[it->second].cost < best_cost) {
            best_cost = tab.entries[it->second].cost;
            best_entry = it->second;
        }
    }
    if (best_entry < 0) raise(ErrorCode::Infeasible, "no feasible root configuration");
    Extraction out;
    collect_open(tree_.root, best_entry, out);

    std::vector<size_t> idx(out.open.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return out.open[a] < out.open[b]; });
    Extraction sorted;
    for (size_t i : idx) {
        sorted.open.push_back(out.open[i]);
        sorted.lambda.push_back(out.lambda[i]);
    }
    auto hist = inst_.color_histogram();
    std::vector<int> served(inst_.l, 0);
    for (const auto& lam : sorted.lambda)
        for (int t = 0; t < inst_.l; ++t) served[t] += lam[t];
    if (served != hist) raise(ErrorCode::CorruptTable, "traceback lambda totals mismatch");
    return sorted;
}

std::vector<std::pair<DoublingConfig, double>> DoublingDp::leaf_entries(int block) const {
    if (!children_[block].empty()) raise(ErrorCode::CorruptTable, "not a leaf block");
    std::vector<std::pair<DoublingConfig, double>> out;
    for (const auto& e : tables_[block].entries)
        out.push_back({config_of(block, e.key), e.cost});
    return out;
}

std::optional<double> DoublingDp::lookup(const DoublingConfig& cfg) const {
    const Table& tab = tables_[cfg.block];
    auto it = tab.index.find(key_of(cfg));
    if (it == tab.index.end()) return std::nullopt;
    return tab.entries[it->second].cost;
}

std::optional<double> DoublingDp::combine(const DoublingConfig& target,
                                          std::span<const DoublingConfig> children) const {
    int kappa = 0;
    double cost = 0.0;
    for (const auto& c : children) {
        kappa += c.k;
        auto v = lookup(c);
        if (!v) return std::nullopt;
        cost += *v;
    }
    if (kappa > target.k) return std::nullopt;
    for (int t = 0; t < inst_.l; ++t) {
        int lhs = 0, rhs = target.net(t);
        for (const auto& c : children) lhs += c.net(t);
        if (lhs != rhs) return std::nullopt;
    }
    return cost + tau(tree_, target, children, inst_.l);
}

double default_rho(const FairInstance& inst, double epsilon) {
    double d = inst.metric.doubling_dim_hint.value_or(2);
    double logn = std::max(1.0, std::log2(double(std::max(2, inst.num_points()))));
    double rho = epsilon / (d * logn);
    return std::clamp(rho, 1e-3, 0.5);
}

Solution solve_qptas(const FairInstance& inst, const QptasOptions& opts, QptasStats* stats) {
    if (opts.trees < 1) raise(ErrorCode::InvalidParams, "trees must be positive");
    if (opts.epsilon <= 0 || opts.epsilon >= 1) raise(ErrorCode::InvalidParams, "epsilon in (0,1)");
    inst.validate();

    Estimate est = estimate_feasible_cost(inst, opts.seed, opts.oracle_limit);
    Preprocessed pre = preprocess_doubling(inst, opts.epsilon, est.cost);
    double rho = opts.rho.value_or(default_rho(inst, opts.epsilon));
    if (rho <= 0 || rho > 0.5) raise(ErrorCode::InvalidParams, "rho must lie in (0, 1/2]");

    struct PerTree {
        bool ok = false;
        bool aborted = false;
        double internal = 0.0;
        Solution sol;
        long long states = 0;
    };
    std::vector<PerTree> results(opts.trees);

    auto run_one = [&](int s) {
        PerTree& r = results[s];
        try {
            SplitTree tree = build_split_tree(pre.inst.metric, rho, mix_seed(opts.seed, s));
            DoublingDp dp(tree, pre.inst, opts.max_states);
            dp.run();
            r.states = dp.states();
            auto internal = dp.root_cost(inst.k);
            if (!internal) return;
            auto ext = dp.traceback(inst.k);
            r.sol = assign_clients(inst, ext.open, ext.lambda);
            r.internal = *internal;
            r.ok = true;
        } catch (const Error& e) {
            if (e.code() == ErrorCode::StateBudgetExceeded) r.aborted = true;
            else throw;
        }
    };

#ifdef _OPENMP
    if (opts.parallel) {
        #pragma omp parallel for schedule(dynamic)
        for (int s = 0; s < opts.trees; ++s) run_one(s);
    } else
#endif
    {
        for (int s = 0; s < opts.trees; ++s) run_one(s);
    }

    int best = -1;
    QptasStats st;
    st.rho = rho;
    for (int s = 0; s < opts.trees; ++s) {
        st.states += results[s].states;
        if (results[s].aborted) st.trees_aborted++;
        else if (results[s].ok) st.trees_completed++;
        if (results[s].ok && (best < 0 || results[s].sol.cost < results[best].sol.cost - kEps))
            best = s;
    }
    if (best >= 0) st.best_tree_cost = results[best].internal;
    if (stats) *stats = st;
    if (best < 0) {
        if (st.trees_aborted == opts.trees)
            raise(ErrorCode::StateBudgetExceeded, "every sampled tree exceeded the state budget");
        raise(ErrorCode::Infeasible, "no fairness-feasible clustering exists");
    }
    return results[best].sol;
}

} // namespace fairkm
