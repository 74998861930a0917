#include "fairkm/io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fairkm/rng.hpp"

namespace fairkm {

using nlohmann::json;

FairInstance instance_from_json(const json& j) {
    try {
        FairInstance inst;
        const auto& space = j.at("space");
        std::string kind = space.at("kind").get<std::string>();
        if (kind == "euclidean2d") {
            std::vector<std::array<double, 2>> coords;
            for (const auto& row : space.at("coords")) {
                if (!row.is_array() || row.size() != 2)
                    raise(ErrorCode::ParseError, "coords rows must be [x,y]");
                coords.push_back({row[0].get<double>(), row[1].get<double>()});
            }
            inst.metric = MetricSpace::euclidean2d(std::move(coords));
        } else if (kind == "matrix") {
            std::vector<std::vector<double>> rows;
            for (const auto& row : space.at("matrix")) rows.push_back(row.get<std::vector<double>>());
            inst.metric = MetricSpace::matrix(std::move(rows));
        } else {
            raise(ErrorCode::ParseError, "unknown space kind '" + kind + "'");
        }
        if (kind == "euclidean2d") inst.metric.doubling_dim_hint = 2;

        std::vector<int> locs;
        for (const auto& c : j.at("clients")) {
            if (c.at("color").is_array())
                raise(ErrorCode::ParseError, "multi-color clients are not supported");
            locs.push_back(c.at("point").get<int>());
            inst.color.push_back(c.at("color").get<int>());
        }
        inst.num_clients = int(locs.size());
        for (const auto& f : j.at("facilities")) locs.push_back(f.get<int>());
        inst.num_facilities = int(locs.size()) - inst.num_clients;
        inst.metric.set_points(std::move(locs));

        inst.k = j.at("k").get<int>();
        inst.l = j.at("l").get<int>();
        inst.alpha = j.at("alpha").get<std::vector<double>>();
        inst.beta = j.at("beta").get<std::vector<double>>();
        inst.validate();
        return inst;
    } catch (const json::exception& e) {
        raise(ErrorCode::ParseError, e.what());
    }
}

json instance_to_json(const FairInstance& inst) {
    json space;
    if (inst.metric.kind() == MetricSpace::Kind::Euclidean2d) {
        space["kind"] = "euclidean2d";
        json coords = json::array();
        for (const auto& c : inst.metric.coords()) coords.push_back({c[0], c[1]});
        space["coords"] = coords;
    } else {
        space["kind"] = "matrix";
        space["matrix"] = inst.metric.matrix_rows();
    }

    json clients = json::array();
    for (int c = 0; c < inst.num_clients; ++c)
        clients.push_back({{"point", inst.metric.location_of(c)}, {"color", inst.color[c]}});
    json facilities = json::array();
    for (int f = 0; f < inst.num_facilities; ++f)
        facilities.push_back(inst.metric.location_of(inst.facility_point(f)));

    return json{{"space", space},   {"clients", clients}, {"facilities", facilities},
                {"k", inst.k},      {"l", inst.l},        {"alpha", inst.alpha},
                {"beta", inst.beta}};
}

FairInstance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::ParseError, "cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        raise(ErrorCode::ParseError, e.what());
    }
    return instance_from_json(j);
}

void save_instance(const FairInstance& inst, const std::string& path) {
    std::ofstream out(path);
    if (!out) raise(ErrorCode::ParseError, "cannot write " + path);
    out << instance_to_json(inst).dump(2) << "\n";
}

FairInstance generate_instance(const GenParams& p, uint64_t seed) {
    if (p.n < 1 || p.k < 1 || p.l < 1) raise(ErrorCode::InvalidParams, "need n >= 1, k >= 1, l >= 1");
    if (p.n > 1 && p.n < p.k) raise(ErrorCode::InvalidParams, "need n >= k");
    Rng rng(mix_seed(seed, 0xa11ce));

    // n = 1 degenerates to a single colocated client/facility pair.
    int n_fac = (p.n == 1) ? 1 : std::clamp(std::max(p.k, (p.n + 2) / 3), 1, p.n - 1);
    int n_cli = (p.n == 1) ? 1 : p.n - n_fac;
    int n_loc = (p.n == 1) ? 1 : p.n;

    FairInstance inst;
    if (p.space == "euclidean2d") {
        std::vector<std::array<double, 2>> coords(n_loc);
        for (auto& c : coords) c = {rng.uniform(0.0, 100.0), rng.uniform(0.0, 100.0)};
        inst.metric = MetricSpace::euclidean2d(std::move(coords));
    } else if (p.space == "matrix") {
        // random integer weights closed under shortest paths: a valid metric
        // with exactly representable (integer) distances
        std::vector<std::vector<double>> d(n_loc, std::vector<double>(n_loc, 0.0));
        for (int i = 0; i < n_loc; ++i)
            for (int j = i + 1; j < n_loc; ++j) d[i][j] = d[j][i] = double(1 + rng.next_int(40));
        for (int h = 0; h < n_loc; ++h)
            for (int i = 0; i < n_loc; ++i)
                for (int j = 0; j < n_loc; ++j) d[i][j] = std::min(d[i][j], d[i][h] + d[h][j]);
        inst.metric = MetricSpace::matrix(std::move(d));
    } else {
        raise(ErrorCode::InvalidParams, "unknown space kind '" + p.space + "'");
    }

    std::vector<int> locs;
    std::vector<int> order = rng.permutation(n_loc);
    for (int c = 0; c < n_cli; ++c) locs.push_back(p.n == 1 ? 0 : order[c]);
    for (int f = 0; f < n_fac; ++f) locs.push_back(p.n == 1 ? 0 : order[n_cli + f]);
    inst.metric.set_points(std::move(locs));
    inst.num_clients = n_cli;
    inst.num_facilities = n_fac;
    inst.k = p.k;
    inst.l = p.l;

    std::vector<double> w = p.color_weights;
    if (int(w.size()) != p.l) w.assign(p.l, 1.0);
    double wsum = 0;
    for (double x : w) wsum += x;
    for (int c = 0; c < n_cli; ++c) {
        double u = rng.next_double() * wsum, acc = 0;
        int col = p.l;
        for (int t = 0; t < p.l; ++t) {
            acc += w[t];
            if (u < acc) { col = t + 1; break; }
        }
        inst.color.push_back(col);
    }

    if (int(p.alpha.size()) == p.l && int(p.beta.size()) == p.l) {
        inst.alpha = p.alpha;
        inst.beta = p.beta;
    } else {
        // bracket the global shares so assigning everyone to one facility is feasible
        auto hist = inst.color_histogram();
        inst.alpha.resize(p.l);
        inst.beta.resize(p.l);
        for (int t = 0; t < p.l; ++t) {
            double share = n_cli ? double(hist[t]) / n_cli : 0.0;
            inst.alpha[t] = std::max(0.0, share - 0.3);
            inst.beta[t] = std::min(1.0, share + 0.3);
        }
    }
    inst.validate();
    return inst;
}

json report_to_json(const RunReport& rep) {
    json viol = json::array();
    for (const auto& v : rep.fairness.violations)
        viol.push_back({{"facility", v.facility},
                        {"color", v.color},
                        {"ratio", v.ratio},
                        {"interval", {v.lo, v.hi}}});
    json sol{{"open", rep.solution.open},
             {"assign", rep.solution.assign},
             {"lambda", rep.solution.lambda}};
    json j{{"spec_version", rep.spec_version},
           {"instance", rep.instance},
           {"algo", rep.algo},
           {"seed", rep.seed},
           {"trees", rep.trees},
           {"wall_ms", rep.wall_ms},
           {"cost", rep.cost},
           {"feasible", rep.feasible},
           {"violations", viol},
           {"states", rep.states},
           {"solution", sol}};
    if (rep.oracle_cost) j["oracle_cost"] = *rep.oracle_cost;
    if (rep.ratio) j["ratio"] = *rep.ratio;
    return j;
}

void save_report(const RunReport& rep, const std::string& path) {
    std::ofstream out(path);
    if (!out) raise(ErrorCode::ParseError, "cannot write " + path);
    out << report_to_json(rep).dump(2) << "\n";
}

std::string bench_csv_header() {
    return "instance,algo,seed,cost,oracle_cost,ratio,feasible,wall_ms,states";
}

std::string bench_csv_row(const RunReport& rep) {
    std::ostringstream os;
    os << rep.instance << "," << rep.algo << "," << rep.seed << "," << rep.cost << ",";
    if (rep.oracle_cost) os << *rep.oracle_cost;
    os << ",";
    if (rep.ratio) os << *rep.ratio;
    os << "," << (rep.feasible ? 1 : 0) << "," << rep.wall_ms << "," << rep.states;
    return os.str();
}

} // namespace fairkm
