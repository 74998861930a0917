#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fairkm/dp_doubling.hpp"
#include "fairkm/dp_tree.hpp"
#include "fairkm/estimator.hpp"
#include "fairkm/io.hpp"
#include "fairkm/oracle.hpp"
#include "fairkm/rng.hpp"

namespace fs = std::filesystem;
using namespace fairkm;

namespace {

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::Infeasible: return 2;
        case ErrorCode::BudgetExceeded:
        case ErrorCode::StateBudgetExceeded: return 3;
        case ErrorCode::ParseError:
        case ErrorCode::InvalidParams: return 4;
        default: return 1;
    }
}

struct SolveOptions {
    std::string algo = "brute";
    std::string input;
    std::string output;
    std::string dump_tree;
    std::string centers_csv;
    uint64_t seed = 1;
    double epsilon = 0.5;
    int trees = 0; // 0 = per-algo default
    double rho = 0.0; // 0 = default formula
    int reduce_threshold = 12;
    long long max_states = 10'000'000;
    bool serial = false;
    bool with_oracle = false;
};

std::vector<int> parse_centers(const std::string& csv) {
    std::vector<int> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',') ) {
        if (item.empty()) continue;
        out.push_back(std::stoi(item));
    }
    return out;
}

RunReport run_algo(const FairInstance& inst, const SolveOptions& opt, const std::string& label) {
    RunReport rep;
    rep.instance = label;
    rep.algo = opt.algo;
    rep.seed = opt.seed;
    auto t0 = std::chrono::steady_clock::now();

    Solution sol;
    if (opt.algo == "brute") {
        sol = brute_force_opt(inst, {opt.max_states});
    } else if (opt.algo == "hst") {
        TreeSolveOptions topts;
        topts.seed = opt.seed;
        topts.trees = opt.trees > 0 ? opt.trees : 20;
        topts.reduce_threshold = opt.reduce_threshold;
        topts.max_states = opt.max_states;
        topts.parallel = !opt.serial;
        TreeSolveStats stats;
        sol = solve_log_k(inst, topts, &stats);
        rep.trees = topts.trees;
        rep.states = stats.states;
        if (!opt.dump_tree.empty()) {
            std::ofstream out(opt.dump_tree);
            out << build_hst(inst.metric, mix_seed(opt.seed, 0)).dump().dump(2) << "\n";
        }
    } else if (opt.algo == "qptas") {
        QptasOptions qopts;
        qopts.seed = opt.seed;
        qopts.epsilon = opt.epsilon;
        qopts.trees = opt.trees > 0 ? opt.trees : 10;
        if (opt.rho > 0) qopts.rho = opt.rho;
        qopts.max_states = opt.max_states;
        qopts.parallel = !opt.serial;
        QptasStats stats;
        sol = solve_qptas(inst, qopts, &stats);
        rep.trees = qopts.trees;
        rep.states = stats.states;
        if (!opt.dump_tree.empty()) {
            double rho = qopts.rho.value_or(default_rho(inst, qopts.epsilon));
            std::ofstream out(opt.dump_tree);
            out << build_split_tree(inst.metric, rho, mix_seed(opt.seed, 0)).dump().dump(2) << "\n";
        }
    } else if (opt.algo == "assign") {
        std::vector<int> centers;
        if (!opt.centers_csv.empty()) centers = parse_centers(opt.centers_csv);
        else
            for (int f = 0; f < inst.num_facilities; ++f) centers.push_back(f);
        sol = fair_assign_to_centers(inst, centers);
    } else {
        raise(ErrorCode::InvalidParams, "unknown algo '" + opt.algo + "'");
    }

    auto t1 = std::chrono::steady_clock::now();
    rep.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    rep.cost = sol.cost;
    rep.fairness = validate_fairness(sol, inst);
    rep.feasible = rep.fairness.feasible;
    rep.solution = sol;

    if (opt.with_oracle) {
        double per = std::pow(double(std::max(1, inst.num_facilities)), double(inst.num_clients));
        if (per <= 2e6) {
            Solution opt_sol = brute_force_opt(inst);
            rep.oracle_cost = opt_sol.cost;
            if (opt_sol.cost > kEps) rep.ratio = sol.cost / opt_sol.cost;
        }
    }
    return rep;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fair k-median solvers (exact fairness, no violation)"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate a random instance");
    GenParams gp;
    uint64_t gen_seed = 1;
    std::string gen_out = "instance.json";
    std::string gen_alpha, gen_beta;
    gen->add_option("--n", gp.n, "total points (clients + facilities)");
    gen->add_option("--k", gp.k, "facility budget");
    gen->add_option("--colors", gp.l, "number of colors");
    gen->add_option("--space", gp.space, "euclidean2d | matrix");
    gen->add_option("--seed", gen_seed, "rng seed");
    gen->add_option("--alpha", gen_alpha, "comma-separated lower bounds");
    gen->add_option("--beta", gen_beta, "comma-separated upper bounds");
    gen->add_option("--output,-o", gen_out, "output path");

    // solve
    auto* solve = app.add_subcommand("solve", "run one solver on an instance");
    SolveOptions so;
    solve->add_option("--algo", so.algo, "brute | hst | qptas | assign")->required();
    solve->add_option("--input,-i", so.input, "instance JSON")->required();
    solve->add_option("--seed", so.seed, "rng seed");
    solve->add_option("--epsilon", so.epsilon, "qptas epsilon in (0,1)");
    solve->add_option("--trees", so.trees, "number of sampled trees");
    solve->add_option("--rho", so.rho, "split-tree portal parameter override");
    solve->add_option("--reduce-threshold", so.reduce_threshold,
                      "hst: apply center reduction above this point count");
    solve->add_option("--max-states", so.max_states, "dp state guard");
    solve->add_option("--centers", so.centers_csv, "assign: comma-separated facility ids");
    solve->add_option("--output,-o", so.output, "report JSON path");
    solve->add_option("--dump-tree", so.dump_tree, "write a diagnostic tree dump");
    solve->add_flag("--serial", so.serial, "disable OpenMP parallel tree sampling");
    solve->add_flag("--oracle", so.with_oracle, "also run the brute-force oracle, report ratio");

    // bench
    auto* bench = app.add_subcommand("bench", "run solvers over a directory of instances");
    std::string bench_dir, bench_out = "bench.csv", bench_algos = "brute,hst,qptas";
    uint64_t bench_seed = 1;
    int bench_trees = 0;
    bench->add_option("--dir", bench_dir, "directory of *.json instances")->required();
    bench->add_option("--output,-o", bench_out, "csv output");
    bench->add_option("--algos", bench_algos, "comma-separated algo list");
    bench->add_option("--seed", bench_seed, "rng seed");
    bench->add_option("--trees", bench_trees, "trees per randomized solver");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 4;
    }

    try {
        if (gen->parsed()) {
            if (!gen_alpha.empty()) {
                gp.alpha.clear();
                for (std::stringstream ss(gen_alpha); ss.good();) {
                    std::string x;
                    std::getline(ss, x, ',');
                    if (!x.empty()) gp.alpha.push_back(std::stod(x));
                }
            }
            if (!gen_beta.empty()) {
                gp.beta.clear();
                for (std::stringstream ss(gen_beta); ss.good();) {
                    std::string x;
                    std::getline(ss, x, ',');
                    if (!x.empty()) gp.beta.push_back(std::stod(x));
                }
            }
            FairInstance inst = generate_instance(gp, gen_seed);
            save_instance(inst, gen_out);
            std::cout << "wrote " << gen_out << "\n";
            return 0;
        }
        if (solve->parsed()) {
            FairInstance inst = load_instance(so.input);
            RunReport rep = run_algo(inst, so, so.input);
            if (!so.output.empty()) save_report(rep, so.output);
            std::cout << report_to_json(rep).dump(2) << "\n";
            return 0;
        }
        if (bench->parsed()) {
            std::vector<std::string> algos;
            for (std::stringstream ss(bench_algos); ss.good();) {
                std::string x;
                std::getline(ss, x, ',');
                if (!x.empty()) algos.push_back(x);
            }
            std::vector<fs::path> files;
            for (const auto& e : fs::directory_iterator(bench_dir))
                if (e.path().extension() == ".json") files.push_back(e.path());
            std::sort(files.begin(), files.end());
            std::ofstream csv(bench_out);
            csv << bench_csv_header() << "\n";
            for (const auto& f : files) {
                FairInstance inst;
                try {
                    inst = load_instance(f.string());
                } catch (const Error& err) {
                    std::cerr << "skipping " << f.filename().string() << ": " << err.what() << "\n";
                    continue;
                }
                for (const auto& algo : algos) {
                    SolveOptions so2;
                    so2.algo = algo;
                    so2.seed = bench_seed;
                    so2.trees = bench_trees;
                    so2.with_oracle = true;
                    try {
                        RunReport rep = run_algo(inst, so2, f.filename().string());
                        csv << bench_csv_row(rep) << "\n";
                    } catch (const Error& err) {
                        std::cerr << f.filename().string() << " " << algo << ": " << err.what()
                                  << "\n";
                    }
                }
            }
            std::cout << "wrote " << bench_out << "\n";
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
