#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "fairkm/core.hpp"
#include "fairkm/dp_config.hpp"
#include "fairkm/split_tree.hpp"

namespace fairkm {

// Bottom-up table filler over one split tree. Costs are metric distances
// (inter-portal hops priced by per-color minimum matchings).
class DoublingDp {
public:
    DoublingDp(const SplitTree& tree, const FairInstance& inst, long long max_states = 10'000'000);

    void run();

    std::optional<double> root_cost(int k_budget) const;

    struct Extraction {
        std::vector<int> open;
        std::vector<std::vector<int>> lambda;
    };
    Extraction traceback(int k_budget) const;

    long long states() const { return states_; }

    // per-operation surface for tests
    std::vector<std::pair<DoublingConfig, double>> leaf_entries(int block) const;
    std::optional<double> lookup(const DoublingConfig& cfg) const;
    // Lemma-5 style combination: budget and per-color consistency checks,
    // then children table values plus the inter-portal matching cost.
    std::optional<double> combine(const DoublingConfig& target,
                                  std::span<const DoublingConfig> children) const;

    const std::vector<int>& children_of(int block) const { return children_[block]; }

private:
    using Key = std::vector<signed char>; // kappa, then per portal per color: enter, |leave|
    struct Entry {
        Key key;
        double cost = 0.0;
        std::vector<int> child_entries; // per child, index into that child's table
    };
    struct Table {
        std::map<Key, int> index;
        std::vector<Entry> entries;
    };

    Key key_of(const DoublingConfig& cfg) const;
    DoublingConfig config_of(int block, const Key& key) const;
    void bump_states(long long amount = 1);
    void insert(Table& tab, Key key, double cost, std::vector<int> back);
    void fill_leaf(int block);
    void fill_internal(int block);
    void collect_open(int block, int entry, Extraction& out) const;

    const SplitTree& tree_;
    const FairInstance& inst_;
    long long max_states_;
    long long states_ = 0;
    std::vector<std::vector<int>> children_;     // sorted by smallest member
    std::vector<std::vector<int>> block_colors_; // per block: client color counts
    std::vector<int> total_colors_;
    std::vector<Table> tables_; // per block
};

// rho = epsilon / (d * log2 n), clamped into (0, 1/2]
double default_rho(const FairInstance& inst, double epsilon);

struct QptasOptions {
    double epsilon = 0.5;
    std::optional<double> rho; // overrides default_rho
    uint64_t seed = 1;
    int trees = 10;
    long long max_states = 10'000'000;
    bool parallel = true;
    int oracle_limit = 10; // cost-estimate source: oracle up to here, local search above
};

struct QptasStats {
    long long states = 0;
    int trees_completed = 0;
    int trees_aborted = 0;
    double rho = 0.0;
    double best_tree_cost = 0.0; // internal portal-routed cost of the winning tree
};

// Preprocess (merge step scaled by a feasible-cost estimate), then solve one
// DP per sampled split tree, trace back to (F, lambda), assign clients in
// the original metric, and return the cheapest solution across trees.
Solution solve_qptas(const FairInstance& inst, const QptasOptions& opts,
                     QptasStats* stats = nullptr);

} // namespace fairkm
