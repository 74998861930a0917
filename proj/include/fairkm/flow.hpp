#pragma once

#include <functional>
#include <vector>

#include "fairkm/core.hpp"

namespace fairkm {

struct FlowArc {
    int from = 0, to = 0;
    int cap = 0;
    double cost = 0.0;
    int flow = 0;
};

// b-flow network: positive b(v) supplies flow, negative b(v) demands it.
struct FlowNetwork {
    std::vector<double> b;
    std::vector<FlowArc> arcs;

    int num_vertices() const { return int(b.size()); }
    int add_vertex(double supply = 0.0) {
        b.push_back(supply);
        return int(b.size()) - 1;
    }
    int add_arc(int from, int to, int cap, double cost) {
        arcs.push_back({from, to, cap, cost, 0});
        return int(arcs.size()) - 1;
    }
};

// Client-assignment network: one +1 vertex per client, one vertex per
// (open facility, color) pair demanding lambda counts, arcs between
// same-color pairs with capacity 1 and metric cost.
struct AssignmentNetwork {
    FlowNetwork net;
    std::vector<int> client_vertex;              // per client
    std::vector<std::vector<int>> facility_vertex; // [open index][color]
    std::vector<int> open;                       // facility ids, parallel to lambda
    std::vector<std::vector<int>> lambda;
    std::vector<int> arc_client;                 // per arc: client id
    std::vector<int> arc_facility;               // per arc: open index
};

AssignmentNetwork build_assignment_network(const FairInstance& inst, const std::vector<int>& open,
                                           const std::vector<std::vector<int>>& lambda,
                                           const DistFn* dist_override = nullptr);

// Successive shortest augmenting paths with potentials. Fills arc flows,
// returns total cost. Throws Infeasible when demands cannot be met.
double min_cost_flow(FlowNetwork& net);

// Reads the unit arcs back into a client -> facility map; postconditions:
// assignment total, per-facility color counts equal lambda exactly.
std::vector<int> extract_assignment(const AssignmentNetwork& an, const FairInstance& inst);

// One-call helper: minimum-cost assignment realizing exactly (open, lambda).
Solution assign_clients(const FairInstance& inst, const std::vector<int>& open,
                        const std::vector<std::vector<int>>& lambda,
                        const DistFn* dist_override = nullptr);

} // namespace fairkm
