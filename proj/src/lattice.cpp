#include "kcip/lattice.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace kcip {

TorusLattice::TorusLattice(int L, int d) : L_(L), d_(d) {
    if (L < 3) throw std::invalid_argument("torus side must be >= 3 (multi-edges otherwise)");
    if (d < 1) throw std::invalid_argument("torus dimension must be >= 1");
    double nf = std::pow(static_cast<double>(L), d);
    if (nf > 1e9) throw std::invalid_argument("torus too large to index with 32-bit vertices");
    n_ = 1;
    for (int i = 0; i < d; ++i) n_ *= L;

    nbr_.resize(static_cast<std::size_t>(n_) * 2 * d);
    std::vector<int> c(d);
    for (int v = 0; v < n_; ++v) {
        int rem = v;
        for (int i = 0; i < d; ++i) {
            c[i] = rem % L;
            rem /= L;
        }
        int stride = 1;
        for (int i = 0; i < d; ++i) {
            int up = c[i] + 1 == L ? 0 : c[i] + 1;
            int dn = c[i] == 0 ? L - 1 : c[i] - 1;
            nbr_[static_cast<std::size_t>(v) * 2 * d + 2 * i] = v + (up - c[i]) * stride;
            nbr_[static_cast<std::size_t>(v) * 2 * d + 2 * i + 1] = v + (dn - c[i]) * stride;
            stride *= L;
        }
    }
}

std::vector<int> TorusLattice::coordinates(int v) const {
    std::vector<int> c(d_);
    for (int i = 0; i < d_; ++i) {
        c[i] = v % L_;
        v /= L_;
    }
    return c;
}

int TorusLattice::vertex_at(const std::vector<int>& coords) const {
    int v = 0, stride = 1;
    for (int i = 0; i < d_; ++i) {
        int c = coords[i] % L_;
        if (c < 0) c += L_;
        v += c * stride;
        stride *= L_;
    }
    return v;
}

std::pair<int, int> TorusLattice::edge(int e) const {
    int v = e / d_, i = e % d_;
    return {v, neighbors(v)[2 * i]};
}

int TorusLattice::graph_distance(int u, int v) const {
    int dist = 0;
    for (int i = 0; i < d_; ++i) {
        int du = std::abs(u % L_ - v % L_);
        dist += std::min(du, L_ - du);
        u /= L_;
        v /= L_;
    }
    return dist;
}

}  // namespace kcip
