#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "kcip/enumeration.hpp"
#include "kcip/lattice.hpp"

namespace kcip {

// Execution policy for data-parallel kernels. Serial and Parallel paths are
// bit-identical by construction (independent rows / replica slots); the
// serial path is the reference the tests compare against.
enum class Exec { Serial, Parallel };

enum class ChainKind {
    Kcip,               // constrained Ising at density p, on the full space
    SimpleExclusion,    // uniform-edge swap, on the exclusion space
    LazySimpleExclusion,  // 1/2 Id + 1/2 SimpleExclusion (the Q_SE proposal)
    BernoulliLaplace,   // lazy BL: 1/2 Id + 1/2 uniform particle->empty move
    PerfectUniform      // L^MH(x,y) = 1/(2|S|) + 1/2 1{x=y}
};

struct KernelSpec {
    ChainKind kind;
    double p = 0.0;  // KCIP density, ignored by the others
};

// Dense row-stochastic kernel bound to an enumerated space. `pi` is the
// stationary law when the builder knows it in closed form (KCIP: conditioned
// product law; the exchange chains: uniform); it can also be filled by
// stationary_distribution().
struct KernelMatrix {
    Eigen::MatrixXd P;
    Eigen::VectorXd pi;

    int size() const { return static_cast<int>(P.rows()); }
};

// Exact one-step transition matrix obtained by enumerating the update
// randomness of the rule against the enumerated space. Throws CapExceeded
// above `cap` states and invalid_argument when the rule does not preserve
// the given space.
KernelMatrix build_kernel_matrix(const TorusLattice& lat, const KernelSpec& spec,
                                 const StateEnumeration& states, Exec exec = Exec::Parallel,
                                 std::size_t cap = kDefaultEigenCap);

// Metropolis wrap of a symmetric proposal towards target weights w >= 0
// (unnormalised): accept x->y with min(1, w_y/w_x); rejected mass stays put.
// Rows with w_x = 0 are left untouched (they are dropped by restriction).
KernelMatrix mh_wrap(const KernelMatrix& proposal, const Eigen::VectorXd& target_weights);

// Row/column restriction to a subset that the kernel does not leave;
// throws invalid_argument if any kept row leaks probability outside.
KernelMatrix restrict_to(const KernelMatrix& k, const std::vector<int>& keep);

// U^MH: lazy Bernoulli-Laplace proposal Metropolised to the uniform law on
// the hard-core slice Omega_k, returned on the Omega_k enumeration.
KernelMatrix build_bl_metropolis(const TorusLattice& lat, const StateEnumeration& omega_k,
                                 Exec exec = Exec::Parallel, std::size_t cap = kDefaultEigenCap);

// Q_MH: lazy simple-exclusion proposal Metropolised the same way.
KernelMatrix build_se_metropolis(const TorusLattice& lat, const StateEnumeration& omega_k,
                                 Exec exec = Exec::Parallel, std::size_t cap = kDefaultEigenCap);

// max_{x,y} |pi_x P(x,y) - pi_y P(y,x)| — detailed-balance defect.
double detailed_balance_violation(const KernelMatrix& k);

}  // namespace kcip
