#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "kcip/enumeration.hpp"
#include "kcip/kernels.hpp"
#include "kcip/lattice.hpp"

namespace kcip {

using FunctionOnStates = Eigen::VectorXd;

struct NumericalFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Unique stationary law of an irreducible row-stochastic kernel via the
// normalised left null-space solve; throws runtime_error on a reducible
// chain (detected by forward/backward reachability) and NumericalFailure
// when the solve does not meet the residual tolerance.
Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& P);

enum class Reversibility { Reject, Symmetrize };

// Spectral gap 1 - beta_1 (beta_1 = second-largest eigenvalue) computed on
// the symmetrised kernel D^{1/2} P D^{-1/2}. Non-reversible input is either
// rejected or additively reversibilised (P + D^-1 P^T D)/2 per the flag.
// A 1x1 kernel has gap 1 by convention (the variational infimum is vacuous).
double spectral_gap(const KernelMatrix& k, Reversibility policy = Reversibility::Reject);

// ||f||_{2,pi}, V_pi(f), E_P(f,f), L_pi(f) — the functional toolkit.
double l2_norm_pi(const FunctionOnStates& f, const Eigen::VectorXd& pi);
double variance_pi(const FunctionOnStates& f, const Eigen::VectorXd& pi);
double dirichlet_form(const Eigen::MatrixXd& P, const Eigen::VectorXd& pi,
                      const FunctionOnStates& f);
double entropy_lpi(const FunctionOnStates& f, const Eigen::VectorXd& pi);

// E/V quotient for one trial function (infinite when V = 0).
double variational_gap_quotient(const KernelMatrix& k, const FunctionOnStates& f);

// Variational upper estimate of the log-Sobolev constant alpha(P):
// min over random restarts with gradient descent of E_P(f,f) / L_pi(f).
// Approaches the infimum from above.
double log_sobolev_estimate(const KernelMatrix& k, int restarts = 50, int iters = 400,
                            std::uint64_t seed = 1);

// Exact trace (induced) kernel on the subset S via the Schur complement
// Q = P_SS + P_SSbar (I - P_SbarSbar)^{-1} P_SbarS. pi of the result is the
// input law conditioned on S.
KernelMatrix trace_kernel_exact(const KernelMatrix& k, const std::vector<int>& subset);

// Restriction that absorbs outward mass into the diagonal: off-diagonal
// entries are copied inside the subset, the diagonal completes each row.
KernelMatrix absorb_restriction(const KernelMatrix& k, const std::vector<int>& subset);

// Indices of states in strata i and i+1 under the Omega decomposition of an
// enumerated space (stratum = particle count of hard-core states).
std::vector<int> stratum_pair_indices(const TorusLattice& lat, const StateEnumeration& states,
                                      int i);

// Projected birth-and-death kernel on stratum labels {1, ..., k-1}:
// Ptilde(i,j) = pi(Theta_i n Theta_j) / (3 pi(Theta_i)) off-diagonal with
// Theta_i = Omega_i u Omega_{i+1}; diagonal completes the row. counts[i-1]
// holds |Omega_i| for i = 1..k. pi of the result is the exact stationary law
// mutilde(i) ~ pi(Omega_i u Omega_{i+1}).
KernelMatrix projected_kernel(const std::vector<std::uint64_t>& counts, double p, int n);

// Expected steps to hit state `to` from state `from` in a birth-and-death
// kernel, by the stationary-mass summation formula...
double birth_death_hitting_time(const KernelMatrix& k, int from, int to);

// ...and by the linear solve (I - P_{-to}) h = 1, as an independent route.
double hitting_time_linear_solve(const Eigen::MatrixXd& P, int from, int to);

struct MadrasRandallReport {
    double gap_full = 0.0;
    double gap_projected = 0.0;
    std::vector<double> gap_restrictions;
    double min_gap_restriction = 0.0;
    double rhs = 0.0;     // (1/9) gap_projected min_i gap_restrictions
    double margin = 0.0;  // gap_full - rhs
    bool holds() const { return margin >= 0.0; }
};

// Decomposition certificate for a kernel over the union of strata 1..k:
// stratum[s] labels each state, counts[i-1] = |Omega_i|, p the density.
MadrasRandallReport madras_randall_check(const KernelMatrix& k, const std::vector<int>& stratum,
                                         const std::vector<std::uint64_t>& counts, double p, int n);

}  // namespace kcip
