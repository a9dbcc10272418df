// Benchmark comparing the serial reference kernels against the OpenMP path on
// a representative batch-estimate workload. Both runs must produce identical
// bytes; the timing ratio is informational.

#include <chrono>
#include <cstdio>

#include "ccw/lab.hpp"
#include "ccw/spacefile.hpp"

using namespace ccw;

namespace {

double run_once(const WeightedSystem& sys, ExecMode mode, std::string& digest) {
    ExperimentConfig cfg;
    cfg.eps_grid = {0.125, 0.0625, 0.03125, 0.015625};
    cfg.pairs_per_eps = 48;
    cfg.anchors_per_eps = 8;
    cfg.tuples_per_anchor = 24;
    cfg.exec = mode;
    auto t0 = std::chrono::steady_clock::now();
    auto rep = local_approx_experiment(sys, sys.anchor, cfg);
    auto t1 = std::chrono::steady_clock::now();
    digest = render_csv(rep);
    return std::chrono::duration<double>(t1 - t0).count();
}

}  // namespace

int main() {
    auto sys = to_system(catalog("example3-graded"));
    std::string serial_digest, omp_digest;
    double t_serial = run_once(sys, ExecMode::Serial, serial_digest);
    double t_omp = run_once(sys, ExecMode::OpenMP, omp_digest);
    std::printf("local-approx batch on %s\n", sys.name.c_str());
    std::printf("  serial reference: %8.3f s\n", t_serial);
    std::printf("  openmp kernels:   %8.3f s\n", t_omp);
    std::printf("  speedup:          %8.2fx\n", t_serial / t_omp);
    std::printf("  outputs identical: %s\n", serial_digest == omp_digest ? "yes" : "NO");
    return serial_digest == omp_digest ? 0 : 1;
}
