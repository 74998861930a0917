#include "fairkm/dp_tree.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "fairkm/estimator.hpp"
#include "fairkm/flow.hpp"
#include "fairkm/nets.hpp"
#include "fairkm/rng.hpp"

namespace fairkm {

TreeDp::TreeDp(const Hst& tree, const FairInstance& inst, long long max_states)
    : tree_(tree), inst_(inst), max_states_(max_states) {
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
    for (int b = 0; b < nb; ++b) tables_[b].resize(children_[b].size() + 1);
}

void TreeDp::bump_states(long long amount) {
    states_ += amount;
    if (states_ > max_states_)
        raise(ErrorCode::StateBudgetExceeded, "tree dp exceeded " + std::to_string(max_states_));
}

TreeDp::Key TreeDp::make_key(int kappa, const std::vector<int>& qe, const std::vector<int>& qoe,
                             const std::vector<int>& ql_abs, const std::vector<int>& qol_abs) const {
    Key key;
    key.reserve(1 + 4 * inst_.l);
    key.push_back((signed char)kappa);
    for (int t = 0; t < inst_.l; ++t) {
        key.push_back((signed char)qe[t]);
        key.push_back((signed char)qoe[t]);
        key.push_back((signed char)ql_abs[t]);
        key.push_back((signed char)qol_abs[t]);
    }
    return key;
}

void TreeDp::insert(Table& tab, Key key, double cost, signed char tag, int left, int child_block,
                    int child_entry) {
    bump_states();
    auto it = tab.index.find(key);
    if (it == tab.index.end()) {
        tab.entries.push_back({key, cost, tag, left, child_block, child_entry});
        tab.index.emplace(std::move(key), int(tab.entries.size()) - 1);
    } else if (cost < tab.entries[it->second].cost) {
        tab.entries[it->second] = {key, cost, tag, left, child_block, child_entry};
    }
}

void TreeDp::fill_leaf(int block) {
    Table& tab = tables_[block][0];
    const int l = inst_.l;
    std::vector<int> zero(l, 0);
    int point = tree_.blocks[block].members.front();
    if (inst_.is_client_point(point)) {
        std::vector<int> qol(l, 0);
        qol[inst_.color[point] - 1] = 1; // stored as magnitude
        insert(tab, make_key(0, zero, zero, zero, qol), 0.0, 0, -1, -1, -1);
        return;
    }
    // facility: closed
    insert(tab, make_key(0, zero, zero, zero, zero), 0.0, 0, -1, -1, -1);
    // facility: opened, one entry per fairness-feasible serving vector
    std::vector<int> q(l, 0);
    while (true) {
        if (fair_counts(q, inst_.alpha, inst_.beta))
            insert(tab, make_key(1, zero, q, zero, zero), 0.0, 0, -1, -1, -1);
        int t = 0;
        while (t < l) {
            if (q[t] < total_colors_[t]) { ++q[t]; break; }
            q[t] = 0;
            ++t;
        }
        if (t == l) break;
    }
}

const TreeDp::Table& TreeDp::final_table(int block) const {
    return tables_[block][children_[block].size()];
}

void TreeDp::fill_internal(int block) {
    const int l = inst_.l;
    const int level = tree_.blocks[block].level;
    const double edge = std::ldexp(1.0, level);
    const auto& kids = children_[block];

    // client color counts and facility counts of T_{S,i} prefixes
    std::vector<std::vector<int>> prefix(kids.size() + 1, std::vector<int>(l, 0));
    std::vector<int> fac_prefix(kids.size() + 1, 0);
    auto facilities_in = [&](int b) {
        int f = 0;
        for (int p : tree_.blocks[b].members)
            if (!inst_.is_client_point(p)) f++;
        return f;
    };
    for (size_t i = 0; i < kids.size(); ++i) {
        for (int t = 0; t < l; ++t)
            prefix[i + 1][t] = prefix[i][t] + block_colors_[kids[i]][t];
        fac_prefix[i + 1] = fac_prefix[i] + facilities_in(kids[i]);
    }
    const int fac_total = inst_.num_facilities;

    for (size_t i = 1; i <= kids.size(); ++i) {
        Table& tab = tables_[block][i];
        const int fac_inside = fac_prefix[i];
        const int fac_remaining = fac_prefix[kids.size()] - fac_prefix[i];
        const int fac_outside = fac_total - fac_prefix[kids.size()];
        std::vector<int> cap_qe(l), cap_qoe(l), cap_ql(l), cap_qol(l);
        for (int t = 0; t < l; ++t) {
            // enter units terminate at facilities inside T_{S,i}; leave units
            // need a facility on the matching side
            cap_qe[t] = fac_inside ? block_colors_[block][t] - prefix[i][t] : 0;
            cap_qoe[t] = fac_inside ? total_colors_[t] - block_colors_[block][t] : 0;
            cap_ql[t] = fac_remaining ? prefix[i][t] : 0;
            cap_qol[t] = fac_outside ? prefix[i][t] : 0;
        }
        std::vector<int> cap_leave_total(l);
        for (int t = 0; t < l; ++t)
            cap_leave_total[t] = (fac_remaining + fac_outside) ? prefix[i][t] : 0;

        // enumerate per-color splits of the enter/leave totals into the
        // inside-T_S / outside-T_S destination vectors
        std::vector<int> qe(l), qoe(l), ql(l), qol(l);
        auto split_insert = [&](int kappa, const std::vector<int>& enter_tot,
                                const std::vector<int>& leave_tot, double cost, signed char tag,
                                int left, int cb, int ce) {
            std::function<void(int)> rec = [&](int t) {
                if (t == l) {
                    insert(tab, make_key(kappa, qe, qoe, ql, qol), cost, tag, left, cb, ce);
                    return;
                }
                int E = enter_tot[t], L = leave_tot[t];
                for (int a = std::max(0, E - cap_qoe[t]); a <= std::min(E, cap_qe[t]); ++a) {
                    for (int b = std::max(0, L - cap_qol[t]); b <= std::min(L, cap_ql[t]); ++b) {
                        qe[t] = a;
                        qoe[t] = E - a;
                        ql[t] = b;
                        qol[t] = L - b;
                        rec(t + 1);
                    }
                }
            };
            rec(0);
        };

        if (i == 1) {
            const Table& child = final_table(kids[0]);
            for (int ce = 0; ce < int(child.entries.size()); ++ce) {
                const Entry& e = child.entries[ce];
                bump_states();
                std::vector<int> enter_tot(l), leave_tot(l);
                long long crossing = 0;
                bool capped = true;
                for (int t = 0; t < l; ++t) {
                    enter_tot[t] = e.key[1 + 4 * t + 0] + e.key[1 + 4 * t + 1];
                    leave_tot[t] = e.key[1 + 4 * t + 2] + e.key[1 + 4 * t + 3];
                    crossing += enter_tot[t] + leave_tot[t];
                    if (enter_tot[t] > cap_qe[t] + cap_qoe[t] ||
                        leave_tot[t] > cap_leave_total[t]) capped = false;
                }
                if (!capped) continue;
                double cost = e.cost + edge * double(crossing);
                split_insert(e.key[0], enter_tot, leave_tot, cost, 1, -1, kids[0], ce);
            }
        } else {
            const Table& leftt = tables_[block][i - 1];
            const Table& child = final_table(kids[i - 1]);
            for (int le = 0; le < int(leftt.entries.size()); ++le) {
                const Entry& el = leftt.entries[le];
                for (int ce = 0; ce < int(child.entries.size()); ++ce) {
                    const Entry& ec = child.entries[ce];
                    bump_states();
                    int kappa = el.key[0] + ec.key[0];
                    if (kappa > inst_.k) continue;
                    std::vector<int> enter_tot(l), leave_tot(l);
                    long long crossing = 0;
                    bool ok = true;
                    for (int t = 0; t < l; ++t) {
                        int sum_left = el.key[1 + 4 * t + 0] + el.key[1 + 4 * t + 1] -
                                       el.key[1 + 4 * t + 2] - el.key[1 + 4 * t + 3];
                        int child_enter = ec.key[1 + 4 * t + 0] + ec.key[1 + 4 * t + 1];
                        int child_leave = ec.key[1 + 4 * t + 2] + ec.key[1 + 4 * t + 3];
                        int sum = sum_left + child_enter - child_leave;
                        enter_tot[t] = std::max(sum, 0);
                        leave_tot[t] = std::max(-sum, 0);
                        crossing += child_enter + child_leave;
                        if (enter_tot[t] > cap_qe[t] + cap_qoe[t] ||
                            leave_tot[t] > cap_leave_total[t]) {
                            ok = false;
                            break;
                        }
                    }
                    if (!ok) continue;
                    double cost = el.cost + ec.cost + edge * double(crossing);
                    split_insert(kappa, enter_tot, leave_tot, cost, 2, le, kids[i - 1], ce);
                }
            }
        }
    }
}

void TreeDp::run() {
    // children before parents: blocks were appended level-descending except
    // leaves; process by increasing level
    for (int level = 0; level <= tree_.levels; ++level)
        for (int b : tree_.level_blocks[level]) {
            if (children_[b].empty()) fill_leaf(b);
            else fill_internal(b);
        }
}

std::optional<double> TreeDp::root_cost_units(int k_budget) const {
    const Table& tab = final_table(tree_.root);
    std::vector<int> zero(inst_.l, 0);
    std::optional<double> best;
    for (int kappa = 0; kappa <= k_budget; ++kappa) {
        auto it = tab.index.find(make_key(kappa, zero, zero, zero, zero));
        if (it != tab.index.end()) {
            double c = tab.entries[it->second].cost;
            if (!best || c < *best) best = c;
        }
    }
    return best;
}

void TreeDp::collect_open(int block, int i, int entry, Extraction& out) const {
    const Table& tab = tables_[block][i];
    if (entry < 0 || entry >= int(tab.entries.size()))
        raise(ErrorCode::CorruptTable, "backpointer out of range");
    const Entry& e = tab.entries[entry];
    if (e.tag == 0) {
        if (e.key[0] == 1) {
            int point = tree_.blocks[block].members.front();
            out.open.push_back(point - inst_.num_clients);
            std::vector<int> lam(inst_.l);
            for (int t = 0; t < inst_.l; ++t) lam[t] = e.key[1 + 4 * t + 1]; // Qoe slot
            out.lambda.push_back(lam);
        }
        return;
    }
    if (e.tag == 2) collect_open(block, i - 1, e.left, out);
    collect_open(e.child_block, int(children_[e.child_block].size()), e.child_entry, out);
}

TreeDp::Extraction TreeDp::traceback(int k_budget) const {
    const Table& tab = final_table(tree_.root);
    std::vector<int> zero(inst_.l, 0);
    int best_entry = -1;
    double best_cost = std::numeric_limits<double>::infinity();
    for (int kappa = 0; kappa <= k_budget; ++kappa) {
        auto it = tab.index.find(make_key(kappa, zero, zero, zero, zero));
        if (it != tab.index.end() && tab.entries[it->second].cost < best_cost) {
            best_cost = tab.entries[it->second].cost;
            best_entry = it->second;
        }
    }
    if (best_entry < 0) raise(ErrorCode::Infeasible, "no feasible root configuration");
    Extraction out;
    collect_open(tree_.root, int(children_[tree_.root].size()), best_entry, out);

    // sort by facility id for reproducible reports
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

std::vector<std::pair<TreeConfig, double>> TreeDp::leaf_entries(int block) const {
    if (!children_[block].empty()) raise(ErrorCode::CorruptTable, "not a leaf block");
    std::vector<std::pair<TreeConfig, double>> out;
    const Table& tab = tables_[block][0];
    for (const auto& e : tab.entries) {
        TreeConfig cfg;
        cfg.block = block;
        cfg.k = e.key[0];
        cfg.i = 0;
        cfg.q_enter.assign(inst_.l, 0);
        cfg.q_enter_out.assign(inst_.l, 0);
        cfg.q_leave.assign(inst_.l, 0);
        cfg.q_leave_out.assign(inst_.l, 0);
        for (int t = 0; t < inst_.l; ++t) {
            cfg.q_enter[t] = e.key[1 + 4 * t + 0];
            cfg.q_enter_out[t] = e.key[1 + 4 * t + 1];
            cfg.q_leave[t] = -e.key[1 + 4 * t + 2];
            cfg.q_leave_out[t] = -e.key[1 + 4 * t + 3];
        }
        out.push_back({cfg, e.cost});
    }
    return out;
}

std::optional<double> TreeDp::lookup(const TreeConfig& cfg) const {
    std::vector<int> ql_abs(inst_.l), qol_abs(inst_.l);
    for (int t = 0; t < inst_.l; ++t) {
        ql_abs[t] = -cfg.q_leave[t];
        qol_abs[t] = -cfg.q_leave_out[t];
    }
    const Table& tab = tables_[cfg.block][cfg.i];
    auto it = tab.index.find(make_key(cfg.k, cfg.q_enter, cfg.q_enter_out, ql_abs, qol_abs));
    if (it == tab.index.end()) return std::nullopt;
    return tab.entries[it->second].cost;
}

std::optional<double> TreeDp::absorb_first_child(const TreeConfig& target) const {
    if (target.i != 1) raise(ErrorCode::InvalidParams, "absorb_first_child needs i = 1");
    int child = children_[target.block][0];
    TreeConfig want;
    want.block = child;
    want.k = target.k;
    want.i = int(children_[child].size());
    want.q_enter.assign(inst_.l, 0);
    want.q_leave.assign(inst_.l, 0);
    want.q_enter_out.resize(inst_.l);
    want.q_leave_out.resize(inst_.l);
    long long crossing = 0;
    for (int t = 0; t < inst_.l; ++t) {
        want.q_enter_out[t] = target.q_enter[t] + target.q_enter_out[t];
        want.q_leave_out[t] = target.q_leave[t] + target.q_leave_out[t];
        crossing += want.q_enter_out[t] - want.q_leave_out[t];
    }
    auto sub = lookup(want);
    if (!sub) return std::nullopt;
    double edge = std::ldexp(1.0, tree_.blocks[target.block].level);
    return *sub + edge * double(crossing);
}

std::optional<double> TreeDp::absorb_next_child(const TreeConfig& target, const TreeConfig& left,
                                                const TreeConfig& child) const {
    if (target.i < 2) raise(ErrorCode::InvalidParams, "absorb_next_child needs i >= 2");
    if (left.k + child.k != target.k) return std::nullopt;
    // consistency: six-vector sum equals the target's four-vector sum per color
    for (int t = 0; t < inst_.l; ++t) {
        int lhs = left.q_enter[t] + left.q_enter_out[t] + left.q_leave[t] + left.q_leave_out[t] +
                  child.q_enter_out[t] + child.q_leave_out[t];
        int rhs = target.q_enter[t] + target.q_enter_out[t] + target.q_leave[t] +
                  target.q_leave_out[t];
        if (lhs != rhs) return std::nullopt;
    }
    auto cl = lookup(left);
    auto cc = lookup(child);
    if (!cl || !cc) return std::nullopt;
    long long crossing = 0;
    for (int t = 0; t < inst_.l; ++t)
        crossing += child.q_enter_out[t] - child.q_leave_out[t];
    double edge = std::ldexp(1.0, tree_.blocks[target.block].level);
    return *cl + *cc + edge * double(crossing);
}

Solution solve_log_k(const FairInstance& inst, const TreeSolveOptions& opts,
                     TreeSolveStats* stats) {
    if (opts.trees < 1) raise(ErrorCode::InvalidParams, "trees must be positive");
    inst.validate();

    FairInstance reduced = inst;
    if (inst.num_points() > opts.reduce_threshold) {
        Estimate est = estimate_feasible_cost(inst, opts.seed);
        std::vector<int> center_points;
        for (int f : est.centers) center_points.push_back(inst.facility_point(f));
        reduced = reduce_to_centers(inst, center_points).inst;
    }

    struct PerTree {
        bool ok = false;
        bool aborted = false;
        double units = 0.0;
        double cost = 0.0;
        Solution sol;
        long long states = 0;
    };
    std::vector<PerTree> results(opts.trees);

    auto run_one = [&](int s) {
        PerTree& r = results[s];
        try {
            Hst tree = build_hst(reduced.metric, mix_seed(opts.seed, s));
            TreeDp dp(tree, reduced, opts.max_states);
            dp.run();
            r.states = dp.states();
            auto units = dp.root_cost_units(inst.k);
            if (!units) return; // infeasible on this tree (hence on all)
            auto ext = dp.traceback(inst.k);
            r.sol = assign_clients(inst, ext.open, ext.lambda);
            r.units = *units;
            r.cost = r.sol.cost;
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
    TreeSolveStats st;
    for (int s = 0; s < opts.trees; ++s) {
        st.states += results[s].states;
        if (results[s].aborted) st.trees_aborted++;
        else if (results[s].ok) st.trees_completed++;
        if (results[s].ok && (best < 0 || results[s].cost < results[best].cost - kEps)) best = s;
    }
    if (best >= 0) st.best_tree_units = results[best].units;
    if (stats) *stats = st;
    if (best < 0) {
        if (st.trees_aborted == opts.trees)
            raise(ErrorCode::StateBudgetExceeded, "every sampled tree exceeded the state budget");
        raise(ErrorCode::Infeasible, "no fairness-feasible clustering exists");
    }
    return results[best].sol;
}

} // namespace fairkm
