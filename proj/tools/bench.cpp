// kcip-bench: timing comparison between the serial reference implementation
// and the OpenMP execution policy for the two hot paths — dense kernel row
// construction and replica fan-out — with a bit-identity check between them.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "kcip/enumeration.hpp"
#include "kcip/estimators.hpp"
#include "kcip/kernels.hpp"
#include "kcip/lattice.hpp"

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
    auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) fn();
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

void report(const std::string& name, double serial_ms, double parallel_ms, bool identical) {
    std::printf("%-28s serial %10.3f ms   parallel %10.3f ms   speedup %5.2fx   identical %s\n",
                name.c_str(), serial_ms, parallel_ms,
                parallel_ms > 0 ? serial_ms / parallel_ms : 0.0, identical ? "yes" : "NO");
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads: %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP disabled at build time\n");
#endif

    // --- dense kernel rows: full constrained space on the 3x3 torus ---
    {
        kcip::TorusLattice lat(3, 2);
        auto states = kcip::enumerate_kcip_space(lat);
        kcip::KernelSpec spec{kcip::ChainKind::Kcip, 1.0 / lat.num_vertices()};
        kcip::KernelMatrix serial, parallel;
        double ts = time_ms(
            [&] { serial = kcip::build_kernel_matrix(lat, spec, states, kcip::Exec::Serial); }, 5);
        double tp = time_ms(
            [&] { parallel = kcip::build_kernel_matrix(lat, spec, states, kcip::Exec::Parallel); },
            5);
        bool same = serial.P == parallel.P && serial.pi == parallel.pi;
        report("kernel rows (511 states)", ts, tp, same);
    }

    // --- replica fan-out: drift experiment ---
    {
        kcip::TorusLattice lat(8, 2);
        double p = 1.0 / lat.num_vertices();
        kcip::DriftResult serial, parallel;
        double ts = time_ms(
            [&] {
                serial = kcip::drift_estimate(lat, p, 6, 0.002, 16, 99, kcip::Exec::Serial);
            },
            3);
        double tp = time_ms(
            [&] {
                parallel = kcip::drift_estimate(lat, p, 6, 0.002, 16, 99, kcip::Exec::Parallel);
            },
            3);
        bool same = serial.final_counts == parallel.final_counts;
        report("drift fan-out (16 replicas)", ts, tp, same);
    }

    // --- replica fan-out: coalescent occupancy profile ---
    {
        kcip::TorusLattice lat(16, 2);
        std::int64_t horizon = 20000;
        auto cps = kcip::checkpoint_grid(horizon);
        kcip::OccupancyProfile serial, parallel;
        double ts = time_ms(
            [&] {
                serial = kcip::coalescent_occupancy_profile(lat, 16, 1.0 / 16, horizon, cps, 16,
                                                            7, kcip::Exec::Serial);
            },
            3);
        double tp = time_ms(
            [&] {
                parallel = kcip::coalescent_occupancy_profile(lat, 16, 1.0 / 16, horizon, cps, 16,
                                                              7, kcip::Exec::Parallel);
            },
            3);
        bool same = serial.per_replica == parallel.per_replica;
        report("coalescent fan-out (16 reps)", ts, tp, same);
    }

    return 0;
}
