// Compares the serial reference paths against the OpenMP ones on the two
// embarrassingly parallel kernels: oracle enumeration over center subsets
// and best-of-trees solves. Results must agree bitwise; only time differs.

#include <chrono>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "fairkm/dp_doubling.hpp"
#include "fairkm/dp_tree.hpp"
#include "fairkm/io.hpp"
#include "fairkm/oracle.hpp"

using namespace fairkm;

namespace {

template <class F>
double time_ms(F&& f) {
    auto t0 = std::chrono::steady_clock::now();
    f();
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

} // namespace

int main() {
#ifdef _OPENMP
    std::printf("openmp threads: %d\n", omp_get_max_threads());
#else
    std::printf("built without openmp\n");
#endif
    std::printf("%-28s %12s %12s %8s\n", "kernel", "serial ms", "parallel ms", "speedup");

    {
        GenParams gp;
        gp.n = 18; // 12 clients, 6 candidate facilities
        gp.k = 3;
        gp.l = 2;
        FairInstance inst = generate_instance(gp, 42);
        OracleBudget budget{100'000'000};
        Solution a, b;
        double ts = time_ms([&] { a = brute_force_opt(inst, budget, nullptr, false); });
        double tp = time_ms([&] { b = brute_force_opt(inst, budget, nullptr, true); });
        if (a.cost != b.cost || a.open != b.open || a.assign != b.assign) {
            std::printf("oracle serial/parallel results DIVERGED\n");
            return 1;
        }
        std::printf("%-28s %12.2f %12.2f %8.2fx\n", "oracle subsets (n=18,k=3)", ts, tp, ts / tp);
    }
    {
        GenParams gp;
        gp.n = 9;
        gp.k = 2;
        gp.l = 2;
        FairInstance inst = generate_instance(gp, 7);
        TreeSolveOptions opts;
        opts.trees = 64;
        Solution a, b;
        opts.parallel = false;
        double ts = time_ms([&] { a = solve_log_k(inst, opts); });
        opts.parallel = true;
        double tp = time_ms([&] { b = solve_log_k(inst, opts); });
        if (a.cost != b.cost || a.open != b.open || a.assign != b.assign) {
            std::printf("hst solve serial/parallel results DIVERGED\n");
            return 1;
        }
        std::printf("%-28s %12.2f %12.2f %8.2fx\n", "hst best-of-64-trees (n=9)", ts, tp, ts / tp);
    }
    {
        GenParams gp;
        gp.n = 8;
        gp.k = 2;
        gp.l = 2;
        FairInstance inst = generate_instance(gp, 11);
        QptasOptions opts;
        opts.trees = 16;
        opts.epsilon = 0.5;
        Solution a, b;
        opts.parallel = false;
        double ts = time_ms([&] { a = solve_qptas(inst, opts); });
        opts.parallel = true;
        double tp = time_ms([&] { b = solve_qptas(inst, opts); });
        if (a.cost != b.cost || a.open != b.open || a.assign != b.assign) {
            std::printf("qptas serial/parallel results DIVERGED\n");
            return 1;
        }
        std::printf("%-28s %12.2f %12.2f %8.2fx\n", "qptas best-of-16-trees (n=8)", ts, tp, ts / tp);
    }
    return 0;
}
