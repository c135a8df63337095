#pragma once

#include <gmpxx.h>

#include <vector>

#include "kcip/enumeration.hpp"
#include "kcip/kernels.hpp"
#include "kcip/lattice.hpp"

namespace kcip {

// Exact-rational twin of the dense kernel builder for the rules whose
// entries are rationals in p. Used by the golden detailed-balance tests;
// weights are the unnormalised stationary masses (normalisation cancels in
// detailed balance).
struct RationalKernel {
    int m = 0;
    std::vector<mpq_class> P;       // row-major m*m
    std::vector<mpq_class> weight;  // unnormalised stationary mass per state

    const mpq_class& at(int i, int j) const { return P[static_cast<std::size_t>(i) * m + j]; }
};

// Supports Kcip (density p), SimpleExclusion / LazySimpleExclusion and
// PerfectUniform; p is ignored by the exchange kernels.
RationalKernel build_rational_kernel(const TorusLattice& lat, ChainKind kind, const mpq_class& p,
                                     const StateEnumeration& states,
                                     std::size_t cap = kDefaultEigenCap);

// max_{x,y} |w_x P(x,y) - w_y P(y,x)| in exact arithmetic; equality with the
// stationary law means this is exactly zero.
mpq_class rational_detailed_balance_violation(const RationalKernel& k);

// Exact row-sum defect max_i |sum_j P(i,j) - 1|.
mpq_class rational_row_sum_defect(const RationalKernel& k);

}  // namespace kcip
