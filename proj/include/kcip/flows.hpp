#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "kcip/configuration.hpp"
#include "kcip/lattice.hpp"
#include "kcip/rng.hpp"

namespace kcip {

// Merged covering of a particle configuration by side-m squares (d = 2 only):
// squares around particles are unioned whenever they intersect, so the
// resulting components are pairwise disjoint unions of at most k squares and
// cover the 2-neighbourhood of every particle (m >= 5).
struct Covering {
    int m = 0;
    std::vector<std::vector<int>> component_particles;
    std::vector<std::vector<int>> component_vertices;  // sorted, pairwise disjoint
    std::vector<char> covered;                         // indicator over all vertices

    bool covers(int v) const { return covered[v] != 0; }
    int components() const { return static_cast<int>(component_particles.size()); }
};

Covering small_covering(const TorusLattice& lat, const Configuration& x, int m);

// Ordering of the particles such that each of the first k-1 has an escape
// path: a route to a vertex outside the covering whose every vertex keeps
// graph distance > 1 from the remaining particles and the privileged vertex.
// Candidates are tried extremal-first (largest coordinate 0), each certified
// by BFS. Throws runtime_error naming the stage when no particle is open.
struct OpenOrder {
    std::vector<int> order;               // particle sites in escape order
    std::vector<std::vector<int>> paths;  // certificates for order[0..k-2]
};

OpenOrder open_vertex_sequence(const TorusLattice& lat, const Configuration& x, int m,
                               int privileged);

// Omega^{X,Y}: hard-core k-configurations with no particle within graph
// distance 1 of any particle of X or Y.
bool in_omega_xy(const TorusLattice& lat, const std::vector<int>& xsites,
                 const std::vector<int>& ysites, const std::vector<int>& zsites);

std::uint64_t count_omega_xy(const TorusLattice& lat, const std::vector<int>& xsites,
                             const std::vector<int>& ysites);

enum class ZSampler { Exact, Rejection };

// One uniform draw from Omega^{X,Y}; the exact sampler enumerates, the
// rejection sampler draws uniform k-subsets of the vertex set until one
// lands in Omega^{X,Y} (distributionally identical). Throws domain_error
// when Omega^{X,Y} is empty (possible only outside the n > 20k regime).
std::vector<int> sample_omega_xy(const TorusLattice& lat, const std::vector<int>& xsites,
                                 const std::vector<int>& ysites, Rng& rng, ZSampler how,
                                 std::int64_t max_tries = 1000000);

// Sampled flow path X -> Z -> Y: 2k+1 hard-core states, each consecutive
// pair a single-particle move, every state in Omega_{n,k}. Particle
// orderings of X, Z and Y are shuffled uniformly and independently.
std::vector<std::vector<int>> bl_flow_sample(const TorusLattice& lat, std::vector<int> xsites,
                                             std::vector<int> ysites, Rng& rng,
                                             ZSampler how = ZSampler::Exact);

// Exact path distribution of the sampler for desk-scale instances (n <= 64):
// enumerates Z and all (k!)^3 orderings; keys are mask sequences, values
// probabilities summing to 1.
std::map<std::vector<std::uint64_t>, double> enumerate_bl_flow(const TorusLattice& lat,
                                                               const std::vector<int>& xsites,
                                                               const std::vector<int>& ysites);

}  // namespace kcip
