#include "kcip/spectral.hpp"

#include <cmath>
#include <limits>

#include "kcip/rng.hpp"

namespace kcip {

namespace {

// forward + backward reachability from state 0 over positive entries
bool irreducible(const Eigen::MatrixXd& P) {
    int m = static_cast<int>(P.rows());
    auto reach = [&](bool transpose) {
        std::vector<char> seen(m, 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        int cnt = 1;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (int w = 0; w < m; ++w) {
                double e = transpose ? P(w, v) : P(v, w);
                if (e > 0.0 && !seen[w]) {
                    seen[w] = 1;
                    ++cnt;
                    stack.push_back(w);
                }
            }
        }
        return cnt == m;
    };
    return reach(false) && reach(true);
}

}  // namespace

Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& P) {
    int m = static_cast<int>(P.rows());
    if (m == 1) return Eigen::VectorXd::Ones(1);
    if (!irreducible(P)) throw std::runtime_error("reducible chain: no unique stationary law");
    // left null space of P - I with the normalisation sum(pi) = 1 replacing
    // the (redundant) last balance equation
    Eigen::MatrixXd A = P.transpose() - Eigen::MatrixXd::Identity(m, m);
    A.row(m - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
    b[m - 1] = 1.0;
    Eigen::VectorXd pi = Eigen::PartialPivLU<Eigen::MatrixXd>(A).solve(b);
    double residual = (P.transpose() * pi - pi).cwiseAbs().maxCoeff();
    if (!pi.allFinite() || residual > 1e-10)
        throw NumericalFailure("stationary solve residual too large");
    for (int i = 0; i < m; ++i) {
        if (pi[i] < -1e-12) throw NumericalFailure("stationary solve produced negative mass");
        if (pi[i] < 0.0) pi[i] = 0.0;
    }
    pi /= pi.sum();
    return pi;
}

double spectral_gap(const KernelMatrix& k, Reversibility policy) {
    int m = k.size();
    if (m == 1) return 1.0;
    if (k.pi.size() != m) throw std::invalid_argument("spectral_gap needs the stationary law");
    Eigen::MatrixXd P = k.P;
    const Eigen::VectorXd& pi = k.pi;
    double scale = pi.maxCoeff();
    double defect = 0.0;
    for (int x = 0; x < m; ++x)
        for (int y = x + 1; y < m; ++y)
            defect = std::max(defect, std::abs(pi[x] * P(x, y) - pi[y] * P(y, x)));
    if (defect > 1e-12 * scale) {
        if (policy == Reversibility::Reject)
            throw std::invalid_argument("kernel is not reversible for its stationary law");
        // additive reversibilisation (P + D^-1 P^T D) / 2
        Eigen::MatrixXd R = P;
        for (int x = 0; x < m; ++x)
            for (int y = 0; y < m; ++y) R(x, y) = 0.5 * (P(x, y) + pi[y] * P(y, x) / pi[x]);
        P = R;
    }
    Eigen::MatrixXd S(m, m);
    for (int x = 0; x < m; ++x)
        for (int y = 0; y < m; ++y) S(x, y) = std::sqrt(pi[x] / pi[y]) * P(x, y);
    S = 0.5 * (S + S.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalFailure("eigensolver did not converge");
    const Eigen::VectorXd& ev = es.eigenvalues();  // ascending
    if (std::abs(ev[m - 1] - 1.0) > 1e-8)
        throw NumericalFailure("top eigenvalue of the symmetrised kernel is not 1");
    return 1.0 - ev[m - 2];
}

double l2_norm_pi(const FunctionOnStates& f, const Eigen::VectorXd& pi) {
    return std::sqrt(f.array().square().matrix().dot(pi));
}

double variance_pi(const FunctionOnStates& f, const Eigen::VectorXd& pi) {
    // literal (1/2) sum_xy |f(x)-f(y)|^2 pi(x) pi(y)
    int m = static_cast<int>(f.size());
    double v = 0.0;
    for (int x = 0; x < m; ++x) {
        double px = pi[x];
        if (px == 0.0) continue;
        for (int y = x + 1; y < m; ++y) {
            double d = f[x] - f[y];
            v += d * d * px * pi[y];
        }
    }
    return v;
}

double dirichlet_form(const Eigen::MatrixXd& P, const Eigen::VectorXd& pi,
                      const FunctionOnStates& f) {
    int m = static_cast<int>(f.size());
    double e = 0.0;
    for (int x = 0; x < m; ++x) {
        double px = pi[x];
        if (px == 0.0) continue;
        for (int y = 0; y < m; ++y) {
            if (y == x || P(x, y) == 0.0) continue;
            double d = f[x] - f[y];
            e += 0.5 * d * d * P(x, y) * px;
        }
    }
    return e;
}

double entropy_lpi(const FunctionOnStates& f, const Eigen::VectorXd& pi) {
    double n2 = f.array().square().matrix().dot(pi);
    if (n2 <= 0.0) return 0.0;
    double L = 0.0;
    for (int x = 0; x < f.size(); ++x) {
        double fx2 = f[x] * f[x];
        if (fx2 > 0.0 && pi[x] > 0.0) L += fx2 * std::log(fx2 / n2) * pi[x];
    }
    return L;
}

double variational_gap_quotient(const KernelMatrix& k, const FunctionOnStates& f) {
    double v = variance_pi(f, k.pi);
    if (v <= 0.0) return std::numeric_limits<double>::infinity();
    return dirichlet_form(k.P, k.pi, f) / v;
}

namespace {

double ratio_el(const KernelMatrix& k, const Eigen::VectorXd& f, double* E_out, double* L_out) {
    double E = dirichlet_form(k.P, k.pi, f);
    double L = entropy_lpi(f, k.pi);
    if (E_out) *E_out = E;
    if (L_out) *L_out = L;
    // near-constant f: the entropy is a difference of nearly equal sums whose
    // absolute rounding error is ~eps * ||f||^2, so the quotient error grows
    // like eps * ||f||^2 / L; requiring L >= 1e-6 * ||f||^2 keeps that error
    // near 1e-10 relative, and the gap/2 cap below covers the excluded
    // constant-direction limit exactly
    double scale = f.array().square().matrix().dot(k.pi);
    if (L <= 1e-6 * std::max(scale, 1e-300)) return std::numeric_limits<double>::infinity();
    return E / L;
}

}  // namespace

double log_sobolev_estimate(const KernelMatrix& k, int restarts, int iters, std::uint64_t seed) {
    int m = k.size();
    if (m < 2) throw std::invalid_argument("log-Sobolev estimate needs at least two states");
    // E(f,f) = f^T (D - (DP + P^T D)/2) f, precomputed for the gradient
    Eigen::MatrixXd DP = k.pi.asDiagonal() * k.P;
    Eigen::MatrixXd A = Eigen::MatrixXd(k.pi.asDiagonal()) - 0.5 * (DP + DP.transpose());
    Rng rng(seed);
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r) {
        Eigen::VectorXd f(m);
        for (int i = 0; i < m; ++i) {
            // Box-Muller on the pinned uniform stream
            double u1 = std::max(rng.real(), 1e-300), u2 = rng.real();
            f[i] = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
        }
        double E, L;
        double val = ratio_el(k, f, &E, &L);
        if (!std::isfinite(val)) continue;
        double step = 1.0;
        for (int it = 0; it < iters; ++it) {
            double n2 = f.array().square().matrix().dot(k.pi);
            Eigen::VectorXd gE = 2.0 * (A * f);
            Eigen::VectorXd gL(m);
            for (int i = 0; i < m; ++i) {
                double fx2 = f[i] * f[i];
                gL[i] = fx2 > 0.0 ? 2.0 * k.pi[i] * f[i] * std::log(fx2 / n2) : 0.0;
            }
            Eigen::VectorXd g = (L * gE - E * gL) / (L * L);
            double gn = g.norm();
            if (gn < 1e-14) break;
            bool moved = false;
            for (int h = 0; h < 40; ++h) {
                Eigen::VectorXd cand = f - (step / gn) * g;
                double Ec, Lc;
                double vc = ratio_el(k, cand, &Ec, &Lc);
                if (vc < val) {
                    f = cand / std::max(l2_norm_pi(cand, k.pi), 1e-12);
                    val = ratio_el(k, f, &E, &L);
                    step *= 1.5;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if (!moved) break;
        }
        best = std::min(best, val);
    }
    // alpha <= gap/2 for reversible chains (variational quotient in the
    // constant-function limit); the cap is both a correctness guard for the
    // descent and the exact value whenever the infimum is that limit
    best = std::min(best, 0.5 * spectral_gap(k, Reversibility::Symmetrize));
    if (!std::isfinite(best)) throw NumericalFailure("log-Sobolev descent found no usable function");
    return best;
}

KernelMatrix trace_kernel_exact(const KernelMatrix& k, const std::vector<int>& subset) {
    int m = k.size();
    std::vector<char> in(m, 0);
    for (int s : subset) in[s] = 1;
    std::vector<int> rest;
    for (int i = 0; i < m; ++i)
        if (!in[i]) rest.push_back(i);
    int a = static_cast<int>(subset.size()), b = static_cast<int>(rest.size());
    if (a == 0) throw std::invalid_argument("empty trace subset");
    KernelMatrix out;
    if (b == 0) {
        out.P = k.P;
        out.pi = k.pi;
        return out;
    }
    Eigen::MatrixXd Pss(a, a), Psr(a, b), Prr(b, b), Prs(b, a);
    for (int i = 0; i < a; ++i)
        for (int j = 0; j < a; ++j) Pss(i, j) = k.P(subset[i], subset[j]);
    for (int i = 0; i < a; ++i)
        for (int j = 0; j < b; ++j) Psr(i, j) = k.P(subset[i], rest[j]);
    for (int i = 0; i < b; ++i)
        for (int j = 0; j < b; ++j) Prr(i, j) = k.P(rest[i], rest[j]);
    for (int i = 0; i < b; ++i)
        for (int j = 0; j < a; ++j) Prs(i, j) = k.P(rest[i], subset[j]);
    Eigen::MatrixXd I = Eigen::MatrixXd::Identity(b, b);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(I - Prr);
    Eigen::MatrixXd X = lu.solve(Prs);
    if (!X.allFinite() || ((I - Prr) * X - Prs).cwiseAbs().maxCoeff() > 1e-9)
        throw NumericalFailure(
            "trace solve failed: complement is not uniformly transient from the subset");
    out.P = Pss + Psr * X;
    for (int i = 0; i < a; ++i) {
        double s = out.P.row(i).sum();
        if (std::abs(s - 1.0) > 1e-9) throw NumericalFailure("trace kernel row defect");
        out.P.row(i) /= s;  // harmless exact renormalisation of fp dust
    }
    if (k.pi.size() == m) {
        out.pi.resize(a);
        for (int i = 0; i < a; ++i) out.pi[i] = k.pi[subset[i]];
        out.pi /= out.pi.sum();
    }
    return out;
}

KernelMatrix absorb_restriction(const KernelMatrix& k, const std::vector<int>& subset) {
    int a = static_cast<int>(subset.size());
    KernelMatrix out;
    out.P.resize(a, a);
    for (int i = 0; i < a; ++i) {
        double off = 0.0;
        for (int j = 0; j < a; ++j) {
            if (i == j) continue;
            out.P(i, j) = k.P(subset[i], subset[j]);
            off += out.P(i, j);
        }
        out.P(i, i) = 1.0 - off;  // holds everything the subset does not take
    }
    if (k.pi.size() == k.size()) {
        out.pi.resize(a);
        for (int i = 0; i < a; ++i) out.pi[i] = k.pi[subset[i]];
        out.pi /= out.pi.sum();
    }
    return out;
}

std::vector<int> stratum_pair_indices(const TorusLattice& lat, const StateEnumeration& states,
                                      int i) {
    std::vector<int> idx;
    for (int s = 0; s < states.size(); ++s) {
        int str = stratum_of(lat, states.config(s));
        if (str == i || str == i + 1) idx.push_back(s);
    }
    return idx;
}

KernelMatrix projected_kernel(const std::vector<std::uint64_t>& counts, double p, int n) {
    int kmax = static_cast<int>(counts.size());
    if (kmax < 2) throw std::invalid_argument("projection needs at least two strata");
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("density must be in (0,1)");
    // unnormalised stratum masses w_i = |Omega_i| p^i (1-p)^(n-i), i = 1..kmax
    std::vector<double> w(kmax + 1, 0.0);
    for (int i = 1; i <= kmax; ++i)
        w[i] = static_cast<double>(counts[i - 1]) * std::pow(p, i) * std::pow(1.0 - p, n - i);
    int m = kmax - 1;  // projected states 1..kmax-1
    KernelMatrix out;
    out.P = Eigen::MatrixXd::Zero(m, m);
    out.pi.resize(m);
    for (int i = 1; i <= m; ++i) {
        double theta = w[i] + w[i + 1];
        if (theta <= 0.0) throw std::invalid_argument("empty stratum block in projection");
        if (i + 1 <= m) out.P(i - 1, i) = w[i + 1] / (3.0 * theta);
        if (i - 1 >= 1) out.P(i - 1, i - 2) = w[i] / (3.0 * theta);
        out.pi[i - 1] = theta;
    }
    for (int i = 0; i < m; ++i) out.P(i, i) = 1.0 - out.P.row(i).sum();
    out.pi /= out.pi.sum();
    return out;
}

double birth_death_hitting_time(const KernelMatrix& k, int from, int to) {
    int m = k.size();
    const Eigen::MatrixXd& P = k.P;
    const Eigen::VectorXd& mu = k.pi;
    if (mu.size() != m) throw std::invalid_argument("hitting formula needs the stationary law");
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            if (std::abs(i - j) > 1 && std::abs(P(i, j)) > 1e-14)
                throw std::invalid_argument("kernel is not birth-and-death");
    if (from == to) return 0.0;
    double total = 0.0;
    if (from < to) {
        double below = 0.0;
        for (int q = 0; q <= from - 1; ++q) below += mu[q];
        for (int v = from; v <= to - 1; ++v) {
            below += mu[v];
            total += below / (mu[v] * P(v, v + 1));
        }
    } else {
        double above = 0.0;
        for (int q = m - 1; q >= from + 1; --q) above += mu[q];
        for (int v = from; v >= to + 1; --v) {
            above += mu[v];
            total += above / (mu[v] * P(v, v - 1));
        }
    }
    return total;
}

double hitting_time_linear_solve(const Eigen::MatrixXd& P, int from, int to) {
    int m = static_cast<int>(P.rows());
    if (from == to) return 0.0;
    std::vector<int> keep;
    for (int i = 0; i < m; ++i)
        if (i != to) keep.push_back(i);
    int r = static_cast<int>(keep.size());
    Eigen::MatrixXd A(r, r);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) A(i, j) = (i == j ? 1.0 : 0.0) - P(keep[i], keep[j]);
    Eigen::VectorXd h = Eigen::PartialPivLU<Eigen::MatrixXd>(A).solve(Eigen::VectorXd::Ones(r));
    if (!h.allFinite()) throw NumericalFailure("hitting-time solve failed");
    for (int i = 0; i < r; ++i)
        if (keep[i] == from) return h[i];
    throw std::logic_error("unreachable");
}

MadrasRandallReport madras_randall_check(const KernelMatrix& k, const std::vector<int>& stratum,
                                         const std::vector<std::uint64_t>& counts, double p,
                                         int n) {
    MadrasRandallReport rep;
    rep.gap_full = spectral_gap(k);
    KernelMatrix proj = projected_kernel(counts, p, n);
    rep.gap_projected = spectral_gap(proj);
    int kmax = static_cast<int>(counts.size());
    rep.min_gap_restriction = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= kmax - 1; ++i) {
        std::vector<int> idx;
        for (int s = 0; s < static_cast<int>(stratum.size()); ++s)
            if (stratum[s] == i || stratum[s] == i + 1) idx.push_back(s);
        KernelMatrix ri = absorb_restriction(k, idx);
        double g = spectral_gap(ri);
        rep.gap_restrictions.push_back(g);
        rep.min_gap_restriction = std::min(rep.min_gap_restriction, g);
    }
    rep.rhs = rep.gap_projected * rep.min_gap_restriction / 9.0;
    rep.margin = rep.gap_full - rep.rhs;
    return rep;
}

}  // namespace kcip
