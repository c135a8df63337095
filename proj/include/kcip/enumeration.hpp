#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "kcip/configuration.hpp"
#include "kcip/lattice.hpp"

namespace kcip {

// Exact analysis is deliberately capped: dense eigenproblems at 4096 states,
// raw state enumeration at 2^20. Callers may raise or lower both (CLI flag
// --max-exact-states / env KCIP_LAB_MAX_STATES).
inline constexpr std::size_t kDefaultEigenCap = 4096;
inline constexpr std::size_t kDefaultEnumCap = std::size_t{1} << 20;

struct CapExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Space { KcipFull, OmegaK, Exclusion };

// An enumerated state space over a lattice with n <= 64 sites, states as
// bit masks in a pinned deterministic order (ascending site-set
// lexicographic, which the DFS below produces), with O(1) index lookup.
struct StateEnumeration {
    Space space;
    int n = 0;
    int k = -1;  // particle count for OmegaK / Exclusion, -1 for the full space
    std::vector<std::uint64_t> states;
    std::unordered_map<std::uint64_t, int> index;

    int size() const { return static_cast<int>(states.size()); }

    int index_of(std::uint64_t mask) const {
        auto it = index.find(mask);
        return it == index.end() ? -1 : it->second;
    }

    Configuration config(int i) const { return Configuration::from_mask(n, states[i]); }
};

// All 2^n - 1 nonempty configurations (the KCIP state space; the empty
// configuration is unreachable and excluded).
StateEnumeration enumerate_kcip_space(const TorusLattice& lat, std::size_t cap = kDefaultEnumCap);

// Omega_k: hard-core (independent-set) configurations with exactly k particles.
StateEnumeration enumerate_omega_k(const TorusLattice& lat, int k, std::size_t cap = kDefaultEnumCap);

// Exclusion space: all k-subsets of the vertex set.
StateEnumeration enumerate_exclusion_space(const TorusLattice& lat, int k,
                                           std::size_t cap = kDefaultEnumCap);

// |Omega_k| without storing states; works for any n (DFS leaf count, capped).
std::uint64_t count_omega_k(const TorusLattice& lat, int k, std::size_t cap = kDefaultEnumCap);

// Well-spaced test: minimum pairwise graph distance strictly above the
// threshold; default threshold sqrt(n) / log(n)^(1/4).
double well_spaced_threshold(const TorusLattice& lat);
bool is_well_spaced(const TorusLattice& lat, const Configuration& x);
bool is_well_spaced(const TorusLattice& lat, const Configuration& x, double threshold);

// Stratum index of a configuration under the Omega decomposition: its
// particle count if it is hard-core, -1 otherwise.
inline int stratum_of(const TorusLattice& lat, const Configuration& x) {
    return is_independent_config(lat, x) ? x.particles() : -1;
}

}  // namespace kcip
