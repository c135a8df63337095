#include "kcip/enumeration.hpp"

#include <cmath>

namespace kcip {

namespace {

void require_mask_width(const TorusLattice& lat) {
    if (lat.num_vertices() > 64)
        throw std::invalid_argument("exact enumeration with stored states supports n <= 64 sites");
}

void finish(StateEnumeration& e) {
    e.index.reserve(e.states.size() * 2);
    for (int i = 0; i < e.size(); ++i) e.index.emplace(e.states[i], i);
}

// DFS over ascending site indices; emits k-subsets in site-lexicographic
// order. `hardcore` prunes branches that place adjacent particles.
void dfs_subsets(const TorusLattice& lat, int k, bool hardcore, std::size_t cap,
                 std::vector<std::uint64_t>* out, std::uint64_t* count) {
    int n = lat.num_vertices();
    std::vector<int> chosen;
    chosen.reserve(k);
    Configuration x(n);
    auto rec = [&](auto&& self, int first) -> void {
        if (static_cast<int>(chosen.size()) == k) {
            if (*count >= cap) throw CapExceeded("state enumeration exceeds cap");
            ++*count;
            if (out) {
                std::uint64_t m = 0;
                for (int v : chosen) m |= 1ULL << v;
                out->push_back(m);
            }
            return;
        }
        int need = k - static_cast<int>(chosen.size());
        for (int v = first; v <= n - need; ++v) {
            if (hardcore && has_occupied_neighbor(lat, x, v)) continue;
            chosen.push_back(v);
            x.set(v, true);
            self(self, v + 1);
            x.set(v, false);
            chosen.pop_back();
        }
    };
    rec(rec, 0);
}

}  // namespace

StateEnumeration enumerate_kcip_space(const TorusLattice& lat, std::size_t cap) {
    require_mask_width(lat);
    int n = lat.num_vertices();
    if (n >= 63 || (std::uint64_t{1} << n) - 1 > cap)
        throw CapExceeded("full KCIP space 2^n - 1 exceeds cap");
    StateEnumeration e{Space::KcipFull, n, -1, {}, {}};
    std::uint64_t total = (std::uint64_t{1} << n) - 1;
    e.states.reserve(total);
    for (std::uint64_t m = 1; m <= total; ++m) e.states.push_back(m);
    finish(e);
    return e;
}

StateEnumeration enumerate_omega_k(const TorusLattice& lat, int k, std::size_t cap) {
    require_mask_width(lat);
    if (k < 0 || k > lat.num_vertices()) throw std::invalid_argument("k out of range");
    StateEnumeration e{Space::OmegaK, lat.num_vertices(), k, {}, {}};
    std::uint64_t c = 0;
    dfs_subsets(lat, k, true, cap, &e.states, &c);
    finish(e);
    return e;
}

StateEnumeration enumerate_exclusion_space(const TorusLattice& lat, int k, std::size_t cap) {
    require_mask_width(lat);
    if (k < 0 || k > lat.num_vertices()) throw std::invalid_argument("k out of range");
    StateEnumeration e{Space::Exclusion, lat.num_vertices(), k, {}, {}};
    std::uint64_t c = 0;
    dfs_subsets(lat, k, false, cap, &e.states, &c);
    finish(e);
    return e;
}

std::uint64_t count_omega_k(const TorusLattice& lat, int k, std::size_t cap) {
    if (k < 0 || k > lat.num_vertices()) throw std::invalid_argument("k out of range");
    std::uint64_t c = 0;
    dfs_subsets(lat, k, true, cap, nullptr, &c);
    return c;
}

double well_spaced_threshold(const TorusLattice& lat) {
    double n = lat.num_vertices();
    return std::sqrt(n) / std::pow(std::log(n), 0.25);
}

bool is_well_spaced(const TorusLattice& lat, const Configuration& x, double threshold) {
    std::vector<int> occ = x.occupied_sites();
    for (std::size_t i = 0; i < occ.size(); ++i)
        for (std::size_t j = i + 1; j < occ.size(); ++j)
            if (lat.graph_distance(occ[i], occ[j]) <= threshold) return false;
    return true;
}

bool is_well_spaced(const TorusLattice& lat, const Configuration& x) {
    return is_well_spaced(lat, x, well_spaced_threshold(lat));
}

}  // namespace kcip
