#pragma once

#include <cstdint>
#include <vector>

#include "kcip/configuration.hpp"
#include "kcip/lattice.hpp"
#include "kcip/rng.hpp"

namespace kcip {

// One step of the kinetically constrained Ising process at density p:
// draw a site v and u ~ Unif[0,1); if some neighbour of v is occupied,
// refresh v to 1 with probability p (u <= p) and to 0 otherwise; if no
// neighbour is occupied the step is a hold. Consumes exactly two draws.
// Returns true when the occupancy of v actually changed.
bool kcip_step(const TorusLattice& lat, Configuration& x, double p, Rng& rng);

// Stationary probability of configuration y: p^|y| (1-p)^(n-|y|) normalised
// over nonempty configurations; 0 for the empty configuration (unreachable).
double kcip_stationary_weight(const Configuration& y, double p);
double kcip_stationary_weight(int particles, int n, double p);

// Simple exclusion: swap the endpoint labels of a uniformly chosen lattice
// edge. Consumes one draw.
void se_step(const TorusLattice& lat, Configuration& x, Rng& rng);

// Lazy Bernoulli–Laplace move: with probability 1/2 hold (one draw);
// otherwise move a uniformly chosen particle to a uniformly chosen empty
// site (three draws total).
void bl_step(const TorusLattice& lat, Configuration& x, Rng& rng);

// k labelled coalescing walkers; multiple walkers may share a site and
// stacks move (and merge) as a unit.
class ParticleSystem {
public:
    ParticleSystem(const TorusLattice& lat, std::vector<int> walker_positions);

    int walkers() const { return static_cast<int>(pos_.size()); }
    int occupied_count() const { return static_cast<int>(occ_.size()); }  // L_t
    const std::vector<int>& positions() const { return pos_; }
    const std::vector<int>& occupied_sites() const { return occ_; }  // sorted
    int stack_size(int site) const;

    void move_stack(int from_site, int to_site);

private:
    const TorusLattice* lat_;
    std::vector<int> pos_;
    std::vector<int> occ_;  // sorted distinct sites
};

// One step of the slowed coalescent at rate q in [0, 1/k]: draw u ~ Unif[0,1),
// a uniformly chosen occupied site v and a uniformly chosen neighbour of v;
// iff u <= q * L_t the whole stack at v moves there (merging on arrival).
// Consumes exactly three draws. Returns true when a merge reduced L_t.
bool coalescent_step(const TorusLattice& lat, ParticleSystem& ps, double q, Rng& rng);

// Number of connected components of the subgraph induced by the particles.
int connected_components(const TorusLattice& lat, const Configuration& x);

}  // namespace kcip
