#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fairkm/error.hpp"

namespace fairkm {

// Tolerance used for every floating-point invariant check in the library.
inline constexpr double kEps = 1e-9;

// Cap on hierarchical decomposition depth (drives AspectRatioTooLarge).
inline constexpr int kMaxTreeLevels = 48;

// A finite metric over "locations" (rows of a coordinate list or of a full
// distance matrix) plus a point -> location map. Points are the logical
// entities (clients, facilities); several points may share a location, which
// is how the preprocessing reductions colocate copies without losing ids.
class MetricSpace {
public:
    enum class Kind { Euclidean2d, Matrix };

    static MetricSpace euclidean2d(std::vector<std::array<double, 2>> coords,
                                   std::optional<int> doubling_dim_hint = 2);
    static MetricSpace matrix(std::vector<std::vector<double>> d,
                              std::optional<int> doubling_dim_hint = std::nullopt);

    Kind kind() const { return kind_; }
    int num_locations() const;
    int num_points() const { return int(loc_.size()); }
    int location_of(int point) const { return loc_[point]; }

    // location-level distance
    double base_dist(int a, int b) const;
    // point-level distance
    double dist(int x, int y) const { return base_dist(loc_[x], loc_[y]); }

    // Declares `count` points, point i at location i (requires count <= locations).
    void assign_identity_points(int count);
    void set_points(std::vector<int> locs) { loc_ = std::move(locs); }
    const std::vector<int>& points() const { return loc_; }

    void relocate_point(int point, int location) { loc_[point] = location; }

    // symmetry / identity / triangle inequality; exhaustive for <= 50
    // locations, sampled above. Throws ParseError on violation.
    void validate() const;

    std::optional<int> doubling_dim_hint;

    const std::vector<std::array<double, 2>>& coords() const { return coords_; }
    const std::vector<std::vector<double>>& matrix_rows() const { return matrix_; }

private:
    Kind kind_ = Kind::Matrix;
    std::vector<std::array<double, 2>> coords_;
    std::vector<std::vector<double>> matrix_;
    std::vector<int> loc_;
};

// Instance of the fair k-median problem. Points are numbered so that client
// c is point c and facility f is point num_clients + f.
struct FairInstance {
    MetricSpace metric;
    int num_clients = 0;
    int num_facilities = 0;
    std::vector<int> color; // per client, 1-based in [l]
    int k = 1;
    int l = 1;
    std::vector<double> alpha, beta;

    int num_points() const { return num_clients + num_facilities; }
    int client_point(int c) const { return c; }
    int facility_point(int f) const { return num_clients + f; }
    bool is_client_point(int p) const { return p < num_clients; }

    double dist_cf(int c, int f) const { return metric.dist(client_point(c), facility_point(f)); }

    std::vector<int> color_histogram() const;

    // Structural checks (alpha<=beta, colors in range, metric axioms).
    void validate() const;
};

struct Solution {
    std::vector<int> open;                 // facility indices, sorted, size <= k
    std::vector<int> assign;               // per client: facility index (-1 = unassigned)
    std::vector<std::vector<int>> lambda;  // parallel to open: per-color counts
    double cost = 0.0;

    bool is_open(int f) const;
};

struct FairnessViolation {
    int facility;
    int color;
    double ratio;
    double lo, hi;
};

struct FairnessReport {
    bool feasible = true;
    std::vector<FairnessViolation> violations;
};

// Checks the per-cluster color ratio bounds of every open facility that
// serves at least one client; empty clusters are vacuously feasible.
FairnessReport validate_fairness(const Solution& sol, const FairInstance& inst);

double solution_cost(const Solution& sol, const FairInstance& inst);

// Recomputes lambda from the assignment (order matching sol.open).
std::vector<std::vector<int>> recompute_lambda(const Solution& sol, const FairInstance& inst);

// true iff counts are either all zero or each color ratio lies in [alpha,beta]
bool fair_counts(const std::vector<int>& counts, const std::vector<double>& alpha,
                 const std::vector<double>& beta);

// Optional point-level distance override (tree metrics, scaled units, ...).
using DistFn = std::function<double(int, int)>;

} // namespace fairkm
