#pragma once

#include <cstdint>
#include <string>

#include "fairkm/core.hpp"

#include <nlohmann/json_fwd.hpp>

namespace fairkm {

// Instance JSON schema:
// { "space": {"kind": "euclidean2d"|"matrix", "coords": [[x,y],...] | "matrix": [[..],..]},
//   "clients": [{"point": id, "color": int}, ...], "facilities": [id, ...],
//   "k": int, "l": int, "alpha": [..], "beta": [..] }
FairInstance instance_from_json(const nlohmann::json& j);
nlohmann::json instance_to_json(const FairInstance& inst);

FairInstance load_instance(const std::string& path);
void save_instance(const FairInstance& inst, const std::string& path);

struct GenParams {
    int n = 6;      // total points (clients + facilities)
    int k = 2;
    int l = 2;
    std::string space = "euclidean2d"; // or "matrix"
    std::vector<double> color_weights; // optional, defaults to uniform
    std::vector<double> alpha, beta;   // optional, defaults to global share +- 0.3
};

// Reproducible random instance; euclidean2d instances carry a doubling
// dimension hint of 2. Default alpha/beta bracket the global color shares so
// the one-cluster solution is always feasible.
FairInstance generate_instance(const GenParams& params, uint64_t seed);

struct RunReport {
    std::string spec_version = "1";
    std::string instance;
    std::string algo;
    uint64_t seed = 0;
    int trees = 0;
    double wall_ms = 0.0;
    double cost = 0.0;
    std::optional<double> oracle_cost;
    std::optional<double> ratio;
    bool feasible = false;
    FairnessReport fairness;
    long long states = 0;
    Solution solution;
};

nlohmann::json report_to_json(const RunReport& rep);
void save_report(const RunReport& rep, const std::string& path);

std::string bench_csv_header();
std::string bench_csv_row(const RunReport& rep);

} // namespace fairkm
