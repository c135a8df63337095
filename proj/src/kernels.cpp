#include "kcip/kernels.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace kcip {

namespace {

void check_cap(const StateEnumeration& states, std::size_t cap) {
    if (states.states.size() > cap) throw CapExceeded("state space exceeds dense-kernel cap");
}

void check_rows(const Eigen::MatrixXd& P) {
    for (int i = 0; i < P.rows(); ++i) {
        double s = P.row(i).sum();
        if (std::abs(s - 1.0) > 1e-12) throw std::runtime_error("kernel row does not sum to 1");
        if (P.row(i).minCoeff() < -1e-15) throw std::runtime_error("negative kernel entry");
    }
}

template <typename RowFn>
void fill_rows(Eigen::MatrixXd& P, Exec exec, RowFn&& row) {
    int m = static_cast<int>(P.rows());
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < m; ++i) row(i);
    } else {
        for (int i = 0; i < m; ++i) row(i);
    }
}

int target_index(const StateEnumeration& states, std::uint64_t mask) {
    int j = states.index_of(mask);
    if (j < 0) throw std::invalid_argument("transition leaves the enumerated space");
    return j;
}

}  // namespace

KernelMatrix build_kernel_matrix(const TorusLattice& lat, const KernelSpec& spec,
                                 const StateEnumeration& states, Exec exec, std::size_t cap) {
    check_cap(states, cap);
    int m = states.size();
    int n = lat.num_vertices();
    KernelMatrix k;
    k.P = Eigen::MatrixXd::Zero(m, m);

    switch (spec.kind) {
        case ChainKind::Kcip: {
            if (states.space != Space::KcipFull)
                throw std::invalid_argument("KCIP kernel lives on the full nonempty space");
            double p = spec.p;
            if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("KCIP density must be in (0,1)");
            fill_rows(k.P, exec, [&](int i) {
                std::uint64_t x = states.states[i];
                for (int v = 0; v < n; ++v) {
                    bool constrained = false;
                    const std::int32_t* nb = lat.neighbors(v);
                    for (int a = 0; a < lat.degree() && !constrained; ++a)
                        constrained = (x >> nb[a]) & 1ULL;
                    if (!constrained) {
                        k.P(i, i) += 1.0 / n;
                        continue;
                    }
                    k.P(i, target_index(states, x | (1ULL << v))) += p / n;
                    k.P(i, target_index(states, x & ~(1ULL << v))) += (1.0 - p) / n;
                }
            });
            k.pi.resize(m);
            for (int i = 0; i < m; ++i) {
                int c = std::popcount(states.states[i]);
                k.pi[i] = std::pow(p, c) * std::pow(1.0 - p, n - c);
            }
            k.pi /= k.pi.sum();
            break;
        }
        case ChainKind::SimpleExclusion:
        case ChainKind::LazySimpleExclusion: {
            if (states.space == Space::KcipFull)
                throw std::invalid_argument("exclusion kernels need a fixed particle count");
            double lazy = spec.kind == ChainKind::LazySimpleExclusion ? 0.5 : 0.0;
            double step = (1.0 - lazy) / lat.num_edges();
            fill_rows(k.P, exec, [&](int i) {
                std::uint64_t x = states.states[i];
                k.P(i, i) += lazy;
                for (int e = 0; e < lat.num_edges(); ++e) {
                    auto [u, v] = lat.edge(e);
                    bool a = (x >> u) & 1ULL, b = (x >> v) & 1ULL;
                    if (a == b) {
                        k.P(i, i) += step;
                    } else {
                        std::uint64_t y = (x ^ (1ULL << u)) ^ (1ULL << v);
                        k.P(i, target_index(states, y)) += step;
                    }
                }
            });
            k.pi = Eigen::VectorXd::Constant(m, 1.0 / m);
            break;
        }
        case ChainKind::BernoulliLaplace: {
            if (states.space == Space::KcipFull)
                throw std::invalid_argument("Bernoulli-Laplace needs a fixed particle count");
            int kk = states.k;
            double step = 0.5 / (static_cast<double>(kk) * (n - kk));
            fill_rows(k.P, exec, [&](int i) {
                std::uint64_t x = states.states[i];
                k.P(i, i) += 0.5;
                for (int u = 0; u < n; ++u) {
                    if (!((x >> u) & 1ULL)) continue;
                    for (int v = 0; v < n; ++v) {
                        if ((x >> v) & 1ULL) continue;
                        std::uint64_t y = (x ^ (1ULL << u)) | (1ULL << v);
                        k.P(i, target_index(states, y)) += step;
                    }
                }
            });
            k.pi = Eigen::VectorXd::Constant(m, 1.0 / m);
            break;
        }
        case ChainKind::PerfectUniform: {
            k.P.setConstant(1.0 / (2.0 * m));
            k.P.diagonal().array() += 0.5;
            k.pi = Eigen::VectorXd::Constant(m, 1.0 / m);
            break;
        }
    }
    check_rows(k.P);
    return k;
}

KernelMatrix mh_wrap(const KernelMatrix& proposal, const Eigen::VectorXd& target_weights) {
    const Eigen::MatrixXd& Q = proposal.P;
    int m = static_cast<int>(Q.rows());
    if (target_weights.size() != m) throw std::invalid_argument("target size mismatch");
    if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw std::invalid_argument("mh_wrap requires a symmetric (uniform-reversible) proposal");
    KernelMatrix out;
    out.P = Eigen::MatrixXd::Zero(m, m);
    for (int x = 0; x < m; ++x) {
        double wx = target_weights[x];
        if (wx <= 0.0) {
            out.P.row(x) = Q.row(x);  // outside the target support; dropped by restriction
            continue;
        }
        double off = 0.0;
        for (int y = 0; y < m; ++y) {
            if (y == x) continue;
            double a = target_weights[y] >= wx ? 1.0 : target_weights[y] / wx;
            out.P(x, y) = Q(x, y) * a;
            off += out.P(x, y);
        }
        out.P(x, x) = 1.0 - off;
    }
    double tot = target_weights.sum();
    out.pi = target_weights / tot;
    check_rows(out.P);
    return out;
}

KernelMatrix restrict_to(const KernelMatrix& k, const std::vector<int>& keep) {
    int m = static_cast<int>(keep.size());
    KernelMatrix out;
    out.P.resize(m, m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) out.P(a, b) = k.P(keep[a], keep[b]);
    for (int a = 0; a < m; ++a)
        if (std::abs(out.P.row(a).sum() - 1.0) > 1e-12)
            throw std::invalid_argument("kernel leaks probability outside the subset");
    if (k.pi.size() > 0) {
        out.pi.resize(m);
        for (int a = 0; a < m; ++a) out.pi[a] = k.pi[keep[a]];
        out.pi /= out.pi.sum();
    }
    return out;
}

namespace {

KernelMatrix metropolised_to_hardcore(const TorusLattice& lat, const StateEnumeration& omega_k,
                                      ChainKind proposal_kind, Exec exec, std::size_t cap) {
    if (omega_k.space != Space::OmegaK) throw std::invalid_argument("expected an Omega_k space");
    StateEnumeration excl = enumerate_exclusion_space(lat, omega_k.k, cap);
    KernelMatrix prop = build_kernel_matrix(lat, {proposal_kind, 0.0}, excl, exec, cap);
    Eigen::VectorXd w(excl.size());
    std::vector<int> keep;
    keep.reserve(omega_k.states.size());
    for (int i = 0; i < excl.size(); ++i) {
        bool in = omega_k.index_of(excl.states[i]) >= 0;
        w[i] = in ? 1.0 : 0.0;
        if (in) keep.push_back(i);
    }
    if (static_cast<int>(keep.size()) != omega_k.size())
        throw std::logic_error("hard-core slice mismatch between enumerations");
    return restrict_to(mh_wrap(prop, w), keep);
}

}  // namespace

KernelMatrix build_bl_metropolis(const TorusLattice& lat, const StateEnumeration& omega_k,
                                 Exec exec, std::size_t cap) {
    return metropolised_to_hardcore(lat, omega_k, ChainKind::BernoulliLaplace, exec, cap);
}

KernelMatrix build_se_metropolis(const TorusLattice& lat, const StateEnumeration& omega_k,
                                 Exec exec, std::size_t cap) {
    return metropolised_to_hardcore(lat, omega_k, ChainKind::LazySimpleExclusion, exec, cap);
}

double detailed_balance_violation(const KernelMatrix& k) {
    if (k.pi.size() != k.P.rows()) throw std::invalid_argument("kernel has no stationary law");
    double worst = 0.0;
    for (int x = 0; x < k.P.rows(); ++x)
        for (int y = x + 1; y < k.P.cols(); ++y)
            worst = std::max(worst, std::abs(k.pi[x] * k.P(x, y) - k.pi[y] * k.P(y, x)));
    return worst;
}

}  // namespace kcip
