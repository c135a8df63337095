#include "kcip/chains.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kcip {

bool kcip_step(const TorusLattice& lat, Configuration& x, double p, Rng& rng) {
    int v = static_cast<int>(rng.below(lat.num_vertices()));
    double u = rng.real();
    if (!has_occupied_neighbor(lat, x, v)) return false;
    bool before = x.test(v), after = u <= p;
    x.set(v, after);
    return before != after;
}

double kcip_stationary_weight(int particles, int n, double p) {
    if (particles == 0) return 0.0;
    double z = 1.0 - std::pow(1.0 - p, n);
    return std::pow(p, particles) * std::pow(1.0 - p, n - particles) / z;
}

double kcip_stationary_weight(const Configuration& y, double p) {
    return kcip_stationary_weight(y.particles(), y.size(), p);
}

void se_step(const TorusLattice& lat, Configuration& x, Rng& rng) {
    int e = static_cast<int>(rng.below(lat.num_edges()));
    auto [u, v] = lat.edge(e);
    bool a = x.test(u), b = x.test(v);
    if (a != b) {
        x.set(u, b);
        x.set(v, a);
    }
}

void bl_step(const TorusLattice& lat, Configuration& x, Rng& rng) {
    if (rng.below(2) == 0) return;  // lazy half
    int n = lat.num_vertices(), k = x.particles();
    int i = static_cast<int>(rng.below(k));
    int j = static_cast<int>(rng.below(n - k));
    int from = x.occupied_sites()[static_cast<std::size_t>(i)];
    int to = -1;
    for (int v = 0, seen = 0; v < n; ++v) {
        if (!x.test(v) && seen++ == j) {
            to = v;
            break;
        }
    }
    x.set(from, false);
    x.set(to, true);
}

ParticleSystem::ParticleSystem(const TorusLattice& lat, std::vector<int> walker_positions)
    : lat_(&lat), pos_(std::move(walker_positions)) {
    occ_ = pos_;
    std::sort(occ_.begin(), occ_.end());
    occ_.erase(std::unique(occ_.begin(), occ_.end()), occ_.end());
}

int ParticleSystem::stack_size(int site) const {
    int c = 0;
    for (int p : pos_) c += (p == site);
    return c;
}

void ParticleSystem::move_stack(int from_site, int to_site) {
    if (from_site == to_site) return;
    for (int& p : pos_)
        if (p == from_site) p = to_site;
    auto it = std::lower_bound(occ_.begin(), occ_.end(), from_site);
    occ_.erase(it);
    auto jt = std::lower_bound(occ_.begin(), occ_.end(), to_site);
    if (jt == occ_.end() || *jt != to_site) occ_.insert(jt, to_site);
}

bool coalescent_step(const TorusLattice& lat, ParticleSystem& ps, double q, Rng& rng) {
    int l = ps.occupied_count();
    if (q < 0.0 || q * l > 1.0 + 1e-12)
        throw std::invalid_argument("coalescent rate must satisfy q * L_t <= 1");
    double u = rng.real();
    int v = ps.occupied_sites()[rng.below(l)];
    int target = lat.neighbors(v)[rng.below(lat.degree())];
    if (u > q * l) return false;
    ps.move_stack(v, target);
    return ps.occupied_count() < l;
}

int connected_components(const TorusLattice& lat, const Configuration& x) {
    std::vector<int> occ = x.occupied_sites();
    if (occ.empty()) return 0;
    std::vector<char> seen(lat.num_vertices(), 0);
    std::vector<int> stack;
    int comps = 0;
    for (int s : occ) {
        if (seen[s]) continue;
        ++comps;
        stack.push_back(s);
        seen[s] = 1;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            const std::int32_t* nb = lat.neighbors(v);
            for (int i = 0; i < lat.degree(); ++i) {
                int w = nb[i];
                if (x.test(w) && !seen[w]) {
                    seen[w] = 1;
                    stack.push_back(w);
                }
            }
        }
    }
    return comps;
}

}  // namespace kcip
