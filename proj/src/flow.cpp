#include "fairkm/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace fairkm {

AssignmentNetwork build_assignment_network(const FairInstance& inst, const std::vector<int>& open,
                                           const std::vector<std::vector<int>>& lambda,
                                           const DistFn* dist_override) {
    AssignmentNetwork an;
    an.open = open;
    an.lambda = lambda;
    auto hist = inst.color_histogram();
    for (int h = 0; h < inst.l; ++h) {
        long long supplied = 0;
        for (const auto& lam : lambda) supplied += lam[h];
        if (supplied != hist[h])
            raise(ErrorCode::SupplyMismatch, "color " + std::to_string(h + 1) + " totals differ");
    }

    an.client_vertex.resize(inst.num_clients);
    for (int c = 0; c < inst.num_clients; ++c) an.client_vertex[c] = an.net.add_vertex(1.0);
    an.facility_vertex.assign(open.size(), std::vector<int>(inst.l, -1));
    for (size_t i = 0; i < open.size(); ++i)
        for (int h = 0; h < inst.l; ++h)
            an.facility_vertex[i][h] = an.net.add_vertex(-double(lambda[i][h]));

    for (int c = 0; c < inst.num_clients; ++c) {
        int h = inst.color[c] - 1;
        for (size_t i = 0; i < open.size(); ++i) {
            int fpoint = inst.facility_point(open[i]);
            double d = dist_override ? (*dist_override)(inst.client_point(c), fpoint)
                                     : inst.dist_cf(c, open[i]);
            an.net.add_arc(an.client_vertex[c], an.facility_vertex[i][h], 1, d);
            an.arc_client.push_back(c);
            an.arc_facility.push_back(int(i));
        }
    }
    return an;
}

double min_cost_flow(FlowNetwork& net) {
    const int n = net.num_vertices();
    double total_b = 0.0;
    for (double b : net.b) total_b += b;
    if (std::abs(total_b) > kEps) raise(ErrorCode::SupplyMismatch, "sum of b values nonzero");

    // residual graph with a super source/sink realizing the b values
    const int S = n, T = n + 1, N = n + 2;
    struct Edge { int to, next; int cap; double cost; int orig; };
    std::vector<Edge> edges;
    std::vector<int> head(N, -1);
    auto add_edge = [&](int u, int v, int cap, double cost, int orig) {
        edges.push_back({v, head[u], cap, cost, orig});
        head[u] = int(edges.size()) - 1;
        edges.push_back({u, head[v], 0, -cost, -1});
        head[v] = int(edges.size()) - 1;
    };
    for (size_t i = 0; i < net.arcs.size(); ++i) {
        auto& a = net.arcs[i];
        a.flow = 0;
        if (a.cap < 0) raise(ErrorCode::SupplyMismatch, "negative capacity");
        add_edge(a.from, a.to, a.cap, a.cost, int(i));
    }
    long long need = 0;
    for (int v = 0; v < n; ++v) {
        long long b = llround(net.b[v]);
        if (b > 0) { add_edge(S, v, int(b), 0.0, -1); need += b; }
        else if (b < 0) add_edge(v, T, int(-b), 0.0, -1);
    }

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> pot(N, 0.0), dist(N);
    std::vector<int> prev_edge(N);
    long long sent = 0;
    double total_cost = 0.0;
    while (sent < need) {
        dist.assign(N, inf);
        prev_edge.assign(N, -1);
        dist[S] = 0.0;
        using Item = std::pair<double, int>;
        std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
        pq.push({0.0, S});
        while (!pq.empty()) {
            auto [d, u] = pq.top();
            pq.pop();
            if (d > dist[u] + kEps) continue;
            for (int e = head[u]; e >= 0; e = edges[e].next) {
                if (edges[e].cap <= 0) continue;
                double nd = dist[u] + edges[e].cost + pot[u] - pot[edges[e].to];
                if (nd < dist[edges[e].to] - kEps) {
                    dist[edges[e].to] = nd;
                    prev_edge[edges[e].to] = e;
                    pq.push({nd, edges[e].to});
                }
            }
        }
        if (!std::isfinite(dist[T])) raise(ErrorCode::Infeasible, "demands cannot be met");
        for (int v = 0; v < N; ++v)
            if (std::isfinite(dist[v])) pot[v] += dist[v];
        int push = int(need - sent);
        for (int v = T; v != S; v = edges[prev_edge[v] ^ 1].to)
            push = std::min(push, edges[prev_edge[v]].cap);
        for (int v = T; v != S; v = edges[prev_edge[v] ^ 1].to) {
            edges[prev_edge[v]].cap -= push;
            edges[prev_edge[v] ^ 1].cap += push;
        }
        sent += push;
    }

    for (size_t e = 0; e < edges.size(); e += 2) {
        if (edges[e].orig < 0) continue;
        auto& a = net.arcs[edges[e].orig];
        a.flow = edges[e ^ 1].cap; // reverse capacity = pushed flow
        total_cost += a.flow * a.cost;
    }
    return total_cost;
}

std::vector<int> extract_assignment(const AssignmentNetwork& an, const FairInstance& inst) {
    std::vector<int> assign(inst.num_clients, -1);
    for (size_t e = 0; e < an.net.arcs.size(); ++e) {
        const auto& a = an.net.arcs[e];
        if (a.flow == 0) continue;
        if (a.flow != 1) raise(ErrorCode::NonIntegralFlow, "unit arc carries " + std::to_string(a.flow));
        int c = an.arc_client[e];
        if (assign[c] != -1) raise(ErrorCode::NonIntegralFlow, "client assigned twice");
        assign[c] = an.open[an.arc_facility[e]];
    }
    for (int c = 0; c < inst.num_clients; ++c)
        if (assign[c] < 0) raise(ErrorCode::UnassignedClient, "client " + std::to_string(c));
    // per-facility color counts must reproduce lambda exactly
    std::vector<std::vector<int>> counts(an.open.size(), std::vector<int>(inst.l, 0));
    for (int c = 0; c < inst.num_clients; ++c) {
        auto it = std::find(an.open.begin(), an.open.end(), assign[c]);
        counts[it - an.open.begin()][inst.color[c] - 1]++;
    }
    if (counts != an.lambda) raise(ErrorCode::NonIntegralFlow, "extracted counts deviate from lambda");
    return assign;
}

Solution assign_clients(const FairInstance& inst, const std::vector<int>& open,
                        const std::vector<std::vector<int>>& lambda, const DistFn* dist_override) {
    AssignmentNetwork an = build_assignment_network(inst, open, lambda, dist_override);
    min_cost_flow(an.net);
    Solution sol;
    sol.open = open;
    sol.lambda = lambda;
    sol.assign = extract_assignment(an, inst);
    sol.cost = solution_cost(sol, inst);
    return sol;
}

} // namespace fairkm
