#include "fairkm/core.hpp"

#include <algorithm>

#include "fairkm/rng.hpp"

namespace fairkm {

const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::UnassignedClient: return "UnassignedClient";
        case ErrorCode::UnknownFacility: return "UnknownFacility";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::DegenerateSet: return "DegenerateSet";
        case ErrorCode::EmptyCenters: return "EmptyCenters";
        case ErrorCode::AspectRatioTooLarge: return "AspectRatioTooLarge";
        case ErrorCode::SameBlock: return "SameBlock";
        case ErrorCode::UnknownLeaf: return "UnknownLeaf";
        case ErrorCode::InconsistentConfigs: return "InconsistentConfigs";
        case ErrorCode::NoPerfectMatching: return "NoPerfectMatching";
        case ErrorCode::SupplyMismatch: return "SupplyMismatch";
        case ErrorCode::NonIntegralFlow: return "NonIntegralFlow";
        case ErrorCode::Infeasible: return "Infeasible";
        case ErrorCode::BudgetExceeded: return "BudgetExceeded";
        case ErrorCode::StateBudgetExceeded: return "StateBudgetExceeded";
        case ErrorCode::CorruptTable: return "CorruptTable";
        case ErrorCode::InvalidParams: return "InvalidParams";
        case ErrorCode::ParseError: return "ParseError";
    }
    return "Error";
}

MetricSpace MetricSpace::euclidean2d(std::vector<std::array<double, 2>> coords,
                                     std::optional<int> doubling_dim_hint) {
    MetricSpace m;
    m.kind_ = Kind::Euclidean2d;
    m.coords_ = std::move(coords);
    m.doubling_dim_hint = doubling_dim_hint;
    return m;
}

MetricSpace MetricSpace::matrix(std::vector<std::vector<double>> d,
                                std::optional<int> doubling_dim_hint) {
    MetricSpace m;
    m.kind_ = Kind::Matrix;
    m.matrix_ = std::move(d);
    m.doubling_dim_hint = doubling_dim_hint;
    return m;
}

int MetricSpace::num_locations() const {
    return kind_ == Kind::Euclidean2d ? int(coords_.size()) : int(matrix_.size());
}

double MetricSpace::base_dist(int a, int b) const {
    if (kind_ == Kind::Euclidean2d) {
        double dx = coords_[a][0] - coords_[b][0];
        double dy = coords_[a][1] - coords_[b][1];
        return std::sqrt(dx * dx + dy * dy);
    }
    return matrix_[a][b];
}

void MetricSpace::assign_identity_points(int count) {
    loc_.resize(count);
    for (int i = 0; i < count; ++i) loc_[i] = i;
}

void MetricSpace::validate() const {
    const int m = num_locations();
    if (kind_ == Kind::Matrix) {
        for (const auto& row : matrix_)
            if (int(row.size()) != m) raise(ErrorCode::ParseError, "distance matrix is not square");
        for (int i = 0; i < m; ++i) {
            if (std::abs(matrix_[i][i]) > kEps)
                raise(ErrorCode::ParseError, "nonzero diagonal in distance matrix");
            for (int j = 0; j < m; ++j) {
                if (matrix_[i][j] < -kEps) raise(ErrorCode::ParseError, "negative distance");
                if (std::abs(matrix_[i][j] - matrix_[j][i]) > kEps)
                    raise(ErrorCode::ParseError, "asymmetric distance matrix");
            }
        }
        // triangle inequality: exhaustive up to 50 locations, sampled above
        if (m <= 50) {
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j)
                    for (int h = 0; h < m; ++h)
                        if (matrix_[i][j] + matrix_[j][h] < matrix_[i][h] - kEps)
                            raise(ErrorCode::ParseError, "triangle inequality violated");
        } else {
            Rng rng(0xfa1421);
            for (int s = 0; s < 20000; ++s) {
                int i = rng.next_int(m), j = rng.next_int(m), h = rng.next_int(m);
                if (matrix_[i][j] + matrix_[j][h] < matrix_[i][h] - kEps)
                    raise(ErrorCode::ParseError, "triangle inequality violated");
            }
        }
    }
    for (int p : loc_)
        if (p < 0 || p >= m) raise(ErrorCode::ParseError, "point references unknown location");
}

std::vector<int> FairInstance::color_histogram() const {
    std::vector<int> h(l, 0);
    for (int c : color) h[c - 1]++;
    return h;
}

void FairInstance::validate() const {
    if (k < 1) raise(ErrorCode::InvalidParams, "k must be positive");
    if (l < 1) raise(ErrorCode::InvalidParams, "l must be positive");
    if (int(alpha.size()) != l || int(beta.size()) != l)
        raise(ErrorCode::ParseError, "alpha/beta must have l entries");
    for (int i = 0; i < l; ++i) {
        if (alpha[i] < -kEps || beta[i] > 1 + kEps || alpha[i] > beta[i] + kEps)
            raise(ErrorCode::ParseError, "need 0 <= alpha_i <= beta_i <= 1");
    }
    if (int(color.size()) != num_clients) raise(ErrorCode::ParseError, "color count mismatch");
    for (int c : color)
        if (c < 1 || c > l) raise(ErrorCode::ParseError, "client color out of [l]");
    if (metric.num_points() != num_points())
        raise(ErrorCode::ParseError, "metric point count mismatch");
    metric.validate();
}

bool Solution::is_open(int f) const {
    return std::find(open.begin(), open.end(), f) != open.end();
}

bool fair_counts(const std::vector<int>& counts, const std::vector<double>& alpha,
                 const std::vector<double>& beta) {
    long long total = 0;
    for (int q : counts) total += q;
    if (total == 0) return true;
    for (size_t t = 0; t < counts.size(); ++t) {
        double lo = alpha[t] * double(total), hi = beta[t] * double(total);
        if (counts[t] < lo - kEps || counts[t] > hi + kEps) return false;
    }
    return true;
}

static void check_assignment_total(const Solution& sol, const FairInstance& inst) {
    if (int(sol.assign.size()) != inst.num_clients)
        raise(ErrorCode::UnassignedClient, "assignment does not cover every client");
    for (int c = 0; c < inst.num_clients; ++c) {
        int f = sol.assign[c];
        if (f < 0) raise(ErrorCode::UnassignedClient, "client " + std::to_string(c));
        if (f >= inst.num_facilities || !sol.is_open(f))
            raise(ErrorCode::UnknownFacility, "client " + std::to_string(c) + " -> facility " + std::to_string(f));
    }
}

FairnessReport validate_fairness(const Solution& sol, const FairInstance& inst) {
    check_assignment_total(sol, inst);
    FairnessReport rep;
    for (int f : sol.open) {
        std::vector<int> counts(inst.l, 0);
        long long total = 0;
        for (int c = 0; c < inst.num_clients; ++c)
            if (sol.assign[c] == f) {
                counts[inst.color[c] - 1]++;
                total++;
            }
        if (total == 0) continue; // empty cluster: vacuously feasible
        for (int t = 0; t < inst.l; ++t) {
            double ratio = double(counts[t]) / double(total);
            double lo = inst.alpha[t] * double(total), hi = inst.beta[t] * double(total);
            if (counts[t] < lo - kEps || counts[t] > hi + kEps)
                rep.violations.push_back({f, t + 1, ratio, inst.alpha[t], inst.beta[t]});
        }
    }
    rep.feasible = rep.violations.empty();
    return rep;
}

double solution_cost(const Solution& sol, const FairInstance& inst) {
    check_assignment_total(sol, inst);
    double cost = 0.0;
    for (int c = 0; c < inst.num_clients; ++c) cost += inst.dist_cf(c, sol.assign[c]);
    return cost;
}

std::vector<std::vector<int>> recompute_lambda(const Solution& sol, const FairInstance& inst) {
    std::vector<std::vector<int>> lam(sol.open.size(), std::vector<int>(inst.l, 0));
    for (int c = 0; c < inst.num_clients; ++c) {
        auto it = std::find(sol.open.begin(), sol.open.end(), sol.assign[c]);
        if (it == sol.open.end()) raise(ErrorCode::UnknownFacility, "assignment outside open set");
        lam[it - sol.open.begin()][inst.color[c] - 1]++;
    }
    return lam;
}

} // namespace fairkm
