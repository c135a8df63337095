#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "kcip/chains.hpp"
#include "kcip/configuration.hpp"
#include "kcip/kernels.hpp"
#include "kcip/lattice.hpp"
#include "kcip/rng.hpp"

namespace kcip {

// Geometric checkpoint grid ceil(gamma^j) intersected with [1, horizon],
// deduplicated, horizon always included.
std::vector<std::int64_t> checkpoint_grid(std::int64_t horizon, double gamma = 1.25);

struct CheckpointRecord {
    std::int64_t t = 0;
    int particles = 0;
    int components = 0;        // -1 when component tracking is off
    std::int64_t collisions = 0;  // cumulative count of component-count drops
};

struct TrajectoryStats {
    int replica = 0;
    std::int64_t horizon = 0;
    bool censored = false;  // a stopping rule ran into the step budget
    std::vector<CheckpointRecord> records;
};

// KCIP trajectory with per-checkpoint particle counts and (optionally)
// component counts plus the cumulative collision counter: a collision is a
// step after which the number of particle components drops.
TrajectoryStats simulate_kcip(const TorusLattice& lat, Configuration start, double p,
                              std::int64_t horizon, const std::vector<std::int64_t>& checkpoints,
                              Rng& rng, bool track_components);

// Collision count of a recorded trajectory (the streaming twin lives inside
// simulate_kcip): number of indices u with components(x_{u+1}) < components(x_u).
std::int64_t collision_count(const TorusLattice& lat, const std::vector<Configuration>& traj);

// Exact total-variation curve ||mu_0 P^t - pi||_TV at the checkpoints, and
// the first t with TV < eps (mixing time from a point start).
std::vector<std::pair<std::int64_t, double>> tv_mixing_curve_exact(
    const KernelMatrix& k, int start, const std::vector<std::int64_t>& checkpoints);
std::int64_t tv_mixing_time_exact(const KernelMatrix& k, int start, double eps,
                                  std::int64_t max_t);

// Dart-throwing placement of k particles into the hard-core slice: uniform
// vertex redrawn while it touches an occupied site, whole configuration
// restarted on a stall.
Configuration random_hardcore_configuration(const TorusLattice& lat, int k, Rng& rng);

// Uniform k-subset of the vertex set (exclusion-uniform start).
std::vector<int> random_ksubset(int n, int k, Rng& rng);

// Hard-core start with k particles: dart-throwing below the random-packing
// regime (4k <= n), a uniform k-subset of a uniformly chosen checkerboard
// parity class above it (even L, k <= n/2). Always lands in Omega_k.
Configuration hardcore_start(const TorusLattice& lat, int k, Rng& rng);

// 95% normal half-width 1.96 sd / sqrt(count)
double normal_ci_halfwidth(const std::vector<double>& xs);

struct DriftResult {
    std::int64_t horizon = 0;
    double mean = 0.0;
    double ci_halfwidth = 0.0;
    std::vector<int> final_counts;  // per replica, index-ordered
};

// Particle count after ceil(epsilon n^3) KCIP steps from a hardcore_start
// with v1 particles; replica r uses the derived stream (master, r), so runs
// with different v1 are seed-paired.
DriftResult drift_estimate(const TorusLattice& lat, double p, int v1, double epsilon,
                           int replicas, std::uint64_t master_seed, Exec exec = Exec::Parallel);

struct OccupancyPoint {
    std::int64_t t = 0;
    double mean_l = 0.0;
    double ci_halfwidth = 0.0;
};

struct OccupancyProfile {
    std::vector<OccupancyPoint> points;
    std::vector<std::vector<int>> per_replica;  // [replica][checkpoint] L_t
};

// Coalescent occupancy L_t (distinct occupied sites) at the checkpoints,
// averaged over replicas started from uniform k-subsets; t = 1 is the
// initial state, each step advances t by one.
OccupancyProfile coalescent_occupancy_profile(const TorusLattice& lat, int k, double q,
                                              std::int64_t horizon,
                                              const std::vector<std::int64_t>& checkpoints,
                                              int replicas, std::uint64_t master_seed,
                                              Exec exec = Exec::Parallel);

// N(r, T): number of t <= T the KCIP trajectory spends in the union of
// strata Omega_i, i <= floor(r log n); t = 1 is the start. Also the first T
// at which the count exceeds a target (censored at max_steps).
bool in_low_strata(const TorusLattice& lat, const Configuration& x, int max_stratum);
std::int64_t occupation_count_kcip(const TorusLattice& lat, Configuration start, double p,
                                   double r, std::int64_t horizon, Rng& rng);
std::optional<std::int64_t> first_time_occupation_exceeds(const TorusLattice& lat,
                                                          Configuration start, double p, double r,
                                                          std::int64_t target,
                                                          std::int64_t max_steps, Rng& rng);

struct CollisionTimes {
    std::vector<std::int64_t> tau;  // per replica; horizon when censored
    std::vector<char> censored;
};

// First time two exclusion particles become adjacent, starting from a
// uniform k-subset; tau = 0 when the start already has adjacent particles.
CollisionTimes collision_time_simulation(const TorusLattice& lat, int k, std::int64_t horizon,
                                         int replicas, std::uint64_t master_seed,
                                         Exec exec = Exec::Parallel);

// Trace of the KCIP through a subset S: successive visit times eta(s) with
// kappa(T) bookkeeping; censoring is explicit (next() returns nullopt when
// the step budget runs out before the next visit).
class TraceStream {
public:
    using Predicate = std::function<bool(const Configuration&)>;

    TraceStream(const TorusLattice& lat, Configuration start, double p, Predicate in_s, Rng rng);

    struct Visit {
        std::int64_t eta;     // time of this visit
        std::int64_t s;       // visit index (1-based)
        Configuration state;  // the state at eta
    };

    std::optional<Visit> next(std::int64_t max_total_steps);

    std::int64_t steps() const { return t_; }    // chain time consumed so far
    std::int64_t visits() const { return s_; }   // kappa(t)

private:
    const TorusLattice* lat_;
    Configuration x_;
    double p_;
    Predicate in_s_;
    Rng rng_;
    std::int64_t t_ = 0;
    std::int64_t s_ = 0;
};

// Replica fan-out helper: fn(r) must write only into its own slot. The
// parallel path is bit-identical to the serial one because each replica owns
// an independently derived stream and its own output slot.
void for_each_replica(int replicas, Exec exec, const std::function<void(int)>& fn);

}  // namespace kcip
