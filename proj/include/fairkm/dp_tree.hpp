#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "fairkm/core.hpp"
#include "fairkm/hst.hpp"

namespace fairkm {

// DP state over the HST: block S, exact open count in T_{S,i}, number i of
// absorbed children, and four per-color crossing vectors (enter counts
// nonnegative, leave counts nonpositive as stored).
struct TreeConfig {
    int block = -1;
    int k = 0;
    int i = 0;
    std::vector<int> q_enter;      // clients of T_S \ T_{S,i} served inside T_{S,i}
    std::vector<int> q_enter_out;  // clients outside T_S served inside T_{S,i}
    std::vector<int> q_leave;      // clients of T_{S,i} served in T_S \ T_{S,i} (<= 0)
    std::vector<int> q_leave_out;  // clients of T_{S,i} served outside T_S (<= 0)
};

// Bottom-up table filler. Costs are in scaled tree units (integers, exact in
// doubles): a unit crossing the edge between a level-j block and one of its
// children pays 2^j.
class TreeDp {
public:
    TreeDp(const Hst& tree, const FairInstance& inst, long long max_states = 10'000'000);

    void run();

    std::optional<double> root_cost_units(int k_budget) const;

    struct Extraction {
        std::vector<int> open;                 // facility ids
        std::vector<std::vector<int>> lambda;  // parallel color counts
    };
    Extraction traceback(int k_budget) const;

    long long states() const { return states_; }

    // per-operation surface mirroring the recurrences, for tests
    std::vector<std::pair<TreeConfig, double>> leaf_entries(int block) const;
    std::optional<double> lookup(const TreeConfig& cfg) const;
    std::optional<double> absorb_first_child(const TreeConfig& target) const;
    std::optional<double> absorb_next_child(const TreeConfig& target, const TreeConfig& left,
                                            const TreeConfig& child) const;

    const std::vector<int>& children_of(int block) const { return children_[block]; }

private:
    using Key = std::vector<signed char>; // kappa, then per color: Qe, Qoe, |Ql|, |Qol|
    struct Entry {
        Key key;
        double cost = 0.0;
        signed char tag = 0; // 0 leaf, 1 case1, 2 case2
        int left = -1;       // entry index in table(S, i-1)
        int child_block = -1;
        int child_entry = -1;
    };
    struct Table {
        std::map<Key, int> index;
        std::vector<Entry> entries;
    };

    Key make_key(int kappa, const std::vector<int>& qe, const std::vector<int>& qoe,
                 const std::vector<int>& ql_abs, const std::vector<int>& qol_abs) const;
    void insert(Table& tab, Key key, double cost, signed char tag, int left, int child_block,
                int child_entry);
    void fill_leaf(int block);
    void fill_internal(int block);
    const Table& final_table(int block) const;
    void bump_states(long long amount = 1);
    void collect_open(int block, int i, int entry, Extraction& out) const;

    const Hst& tree_;
    const FairInstance& inst_;
    long long max_states_;
    long long states_ = 0;
    std::vector<std::vector<int>> children_;     // sorted by smallest member
    std::vector<std::vector<int>> block_colors_; // per block: client color counts
    std::vector<int> total_colors_;
    std::vector<std::vector<Table>> tables_;     // [block][i]
};

struct TreeSolveOptions {
    uint64_t seed = 1;
    int trees = 20;
    int reduce_threshold = 12; // apply reduce_to_centers above this many points
    long long max_states = 10'000'000;
    bool parallel = true;
};

struct TreeSolveStats {
    long long states = 0;
    int trees_completed = 0;
    int trees_aborted = 0;
    double best_tree_units = 0.0;
};

// Best-of-`trees` HST solve: per sampled tree fill the table, read the root
// entry, trace back to (F, lambda) and assign clients by min-cost flow in
// the original metric. Returns the cheapest solution found.
Solution solve_log_k(const FairInstance& inst, const TreeSolveOptions& opts,
                     TreeSolveStats* stats = nullptr);

} // namespace fairkm
