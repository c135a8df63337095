#include "kcip/rational_kernels.hpp"

#include <bit>
#include <stdexcept>

namespace kcip {

namespace {

mpq_class qpow(mpq_class base, int e) {
    mpq_class r(1);
    for (int i = 0; i < e; ++i) r *= base;
    return r;
}

}  // namespace

RationalKernel build_rational_kernel(const TorusLattice& lat, ChainKind kind, const mpq_class& p,
                                     const StateEnumeration& states, std::size_t cap) {
    if (states.states.size() > cap) throw CapExceeded("state space exceeds dense-kernel cap");
    int m = states.size();
    int n = lat.num_vertices();
    RationalKernel k;
    k.m = m;
    k.P.assign(static_cast<std::size_t>(m) * m, mpq_class(0));
    k.weight.assign(m, mpq_class(1));
    auto at = [&](int i, int j) -> mpq_class& { return k.P[static_cast<std::size_t>(i) * m + j]; };

    switch (kind) {
        case ChainKind::Kcip: {
            if (states.space != Space::KcipFull)
                throw std::invalid_argument("KCIP kernel lives on the full nonempty space");
            if (p <= 0 || p >= 1) throw std::invalid_argument("KCIP density must be in (0,1)");
            mpq_class inv_n(1, n);
            for (int i = 0; i < m; ++i) {
                std::uint64_t x = states.states[i];
                for (int v = 0; v < n; ++v) {
                    bool constrained = false;
                    const std::int32_t* nb = lat.neighbors(v);
                    for (int a = 0; a < lat.degree() && !constrained; ++a)
                        constrained = (x >> nb[a]) & 1ULL;
                    if (!constrained) {
                        at(i, i) += inv_n;
                        continue;
                    }
                    int j1 = states.index_of(x | (1ULL << v));
                    int j0 = states.index_of(x & ~(1ULL << v));
                    if (j1 < 0 || j0 < 0) throw std::invalid_argument("transition leaves the space");
                    at(i, j1) += p * inv_n;
                    at(i, j0) += (1 - p) * inv_n;
                }
                int c = std::popcount(states.states[i]);
                k.weight[i] = qpow(p, c) * qpow(1 - p, n - c);
            }
            break;
        }
        case ChainKind::SimpleExclusion:
        case ChainKind::LazySimpleExclusion: {
            if (states.space == Space::KcipFull)
                throw std::invalid_argument("exclusion kernels need a fixed particle count");
            mpq_class lazy = kind == ChainKind::LazySimpleExclusion ? mpq_class(1, 2) : mpq_class(0);
            mpq_class step = (1 - lazy) / lat.num_edges();
            for (int i = 0; i < m; ++i) {
                std::uint64_t x = states.states[i];
                at(i, i) += lazy;
                for (int e = 0; e < lat.num_edges(); ++e) {
                    auto [u, v] = lat.edge(e);
                    bool a = (x >> u) & 1ULL, b = (x >> v) & 1ULL;
                    if (a == b) {
                        at(i, i) += step;
                    } else {
                        int j = states.index_of((x ^ (1ULL << u)) ^ (1ULL << v));
                        if (j < 0) throw std::invalid_argument("transition leaves the space");
                        at(i, j) += step;
                    }
                }
            }
            break;
        }
        case ChainKind::PerfectUniform: {
            mpq_class off(1, 2 * m);
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) at(i, j) = off + (i == j ? mpq_class(1, 2) : mpq_class(0));
            break;
        }
        default:
            throw std::invalid_argument("no rational builder for this chain kind");
    }
    return k;
}

mpq_class rational_detailed_balance_violation(const RationalKernel& k) {
    mpq_class worst(0);
    for (int x = 0; x < k.m; ++x)
        for (int y = x + 1; y < k.m; ++y) {
            mpq_class d = k.weight[x] * k.at(x, y) - k.weight[y] * k.at(y, x);
            if (d < 0) d = -d;
            if (d > worst) worst = d;
        }
    return worst;
}

mpq_class rational_row_sum_defect(const RationalKernel& k) {
    mpq_class worst(0);
    for (int i = 0; i < k.m; ++i) {
        mpq_class s(0);
        for (int j = 0; j < k.m; ++j) s += k.at(i, j);
        mpq_class d = s - 1;
        if (d < 0) d = -d;
        if (d > worst) worst = d;
    }
    return worst;
}

}  // namespace kcip
