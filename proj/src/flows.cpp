#include "kcip/flows.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace kcip {

namespace {

// torus L-infinity distance (d = 2), for square intersection tests
int linf_distance(const TorusLattice& lat, int u, int v) {
    int L = lat.side(), best = 0;
    for (int i = 0; i < lat.dim(); ++i) {
        int du = std::abs(u % L - v % L);
        best = std::max(best, std::min(du, L - du));
        u /= L;
        v /= L;
    }
    return best;
}

void check_covering_pre(const TorusLattice& lat, int m) {
    if (lat.dim() != 2) throw std::invalid_argument("coverings are defined for d = 2");
    if (m < 5 || m % 2 == 0) throw std::invalid_argument("square side m must be odd and >= 5");
    if (lat.side() <= 2 * m) throw std::invalid_argument("covering needs L > 2m");
}

}  // namespace

Covering small_covering(const TorusLattice& lat, const Configuration& x, int m) {
    check_covering_pre(lat, m);
    std::vector<int> parts = x.occupied_sites();
    int k = static_cast<int>(parts.size());
    if (k == 0) throw std::invalid_argument("covering of an empty configuration");

    // union-find over particles whose side-m squares intersect
    std::vector<int> parent(k);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    };
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j)
            if (linf_distance(lat, parts[i], parts[j]) <= m - 1) parent[find(i)] = find(j);

    Covering cov;
    cov.m = m;
    cov.covered.assign(lat.num_vertices(), 0);
    std::map<int, std::vector<int>> groups;
    for (int i = 0; i < k; ++i) groups[find(i)].push_back(i);

    int r = (m - 1) / 2, L = lat.side();
    for (auto& [root, members] : groups) {
        std::vector<int> ps, vs;
        for (int i : members) {
            int p = parts[i];
            ps.push_back(p);
            int c0 = p % L, c1 = p / L;
            for (int a = -r; a <= r; ++a)
                for (int b = -r; b <= r; ++b) {
                    int u0 = ((c0 + a) % L + L) % L, u1 = ((c1 + b) % L + L) % L;
                    vs.push_back(u1 * L + u0);
                }
        }
        std::sort(vs.begin(), vs.end());
        vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
        for (int v : vs) cov.covered[v] = 1;
        cov.component_particles.push_back(std::move(ps));
        cov.component_vertices.push_back(std::move(vs));
    }
    return cov;
}

OpenOrder open_vertex_sequence(const TorusLattice& lat, const Configuration& x, int m,
                               int privileged) {
    check_covering_pre(lat, m);
    if (!is_independent_config(lat, x))
        throw std::invalid_argument("open ordering is defined for hard-core configurations");
    std::vector<int> parts = x.occupied_sites();
    int k = static_cast<int>(parts.size());
    if (k == 0) throw std::invalid_argument("empty configuration");
    double kd = k, md = m;
    if (lat.num_vertices() <= kd * kd * kd * kd * md * md)
        throw std::invalid_argument("open ordering needs n > k^4 m^2");

    Covering cov = small_covering(lat, x, m);
    int L = lat.side();
    std::vector<int> remaining = parts;
    OpenOrder out;

    while (remaining.size() > 1) {
        // extremal-coordinate heuristic: particles with the largest first
        // coordinate escape first, the rest follow as fallbacks
        std::vector<int> candidates = remaining;
        std::sort(candidates.begin(), candidates.end(), [&](int a, int b) {
            if (a % L != b % L) return a % L > b % L;
            return a < b;
        });
        bool opened = false;
        for (int cand : candidates) {
            // vertices the escape path must keep distance > 1 from
            auto blocked = [&](int v) {
                if (privileged >= 0 && lat.graph_distance(privileged, v) <= 1) return true;
                for (int other : remaining)
                    if (other != cand && lat.graph_distance(other, v) <= 1) return true;
                return false;
            };
            if (blocked(cand)) continue;
            std::vector<int> prev(lat.num_vertices(), -2);
            std::vector<int> queue{cand};
            prev[cand] = -1;
            int exit = -1;
            for (std::size_t qi = 0; qi < queue.size() && exit < 0; ++qi) {
                int v = queue[qi];
                if (!cov.covers(v)) {
                    exit = v;
                    break;
                }
                const std::int32_t* nb = lat.neighbors(v);
                for (int a = 0; a < lat.degree(); ++a) {
                    int w = nb[a];
                    if (prev[w] != -2 || blocked(w)) continue;
                    prev[w] = v;
                    queue.push_back(w);
                }
            }
            if (exit < 0) continue;
            std::vector<int> path;
            for (int v = exit; v != -1; v = prev[v]) path.push_back(v);
            std::reverse(path.begin(), path.end());
            out.order.push_back(cand);
            out.paths.push_back(std::move(path));
            remaining.erase(std::find(remaining.begin(), remaining.end(), cand));
            opened = true;
            break;
        }
        if (!opened)
            throw std::runtime_error("no open vertex at stage " +
                                     std::to_string(out.order.size() + 1));
    }
    out.order.push_back(remaining.front());  // the last particle needs no escape
    return out;
}

namespace {

bool zsite_ok(const TorusLattice& lat, const std::vector<int>& xsites,
              const std::vector<int>& ysites, int v) {
    for (int u : xsites)
        if (lat.graph_distance(u, v) <= 1) return false;
    for (int u : ysites)
        if (lat.graph_distance(u, v) <= 1) return false;
    return true;
}

// DFS over admissible sites; emits each hard-core k-subset of the free set
template <typename Emit>
void for_each_z(const TorusLattice& lat, const std::vector<int>& free_sites, int k, Emit&& emit) {
    std::vector<int> chosen;
    auto ok_with_chosen = [&](int v) {
        for (int u : chosen)
            if (lat.graph_distance(u, v) <= 1) return false;
        return true;
    };
    auto rec = [&](auto&& self, std::size_t first) -> void {
        if (static_cast<int>(chosen.size()) == k) {
            emit(chosen);
            return;
        }
        for (std::size_t i = first; i < free_sites.size(); ++i) {
            int v = free_sites[i];
            if (!ok_with_chosen(v)) continue;
            chosen.push_back(v);
            self(self, i + 1);
            chosen.pop_back();
        }
    };
    rec(rec, 0);
}

std::vector<int> free_sites_for(const TorusLattice& lat, const std::vector<int>& xsites,
                                const std::vector<int>& ysites) {
    std::vector<int> free;
    for (int v = 0; v < lat.num_vertices(); ++v)
        if (zsite_ok(lat, xsites, ysites, v)) free.push_back(v);
    return free;
}

}  // namespace

bool in_omega_xy(const TorusLattice& lat, const std::vector<int>& xsites,
                 const std::vector<int>& ysites, const std::vector<int>& zsites) {
    for (std::size_t i = 0; i < zsites.size(); ++i) {
        if (!zsite_ok(lat, xsites, ysites, zsites[i])) return false;
        for (std::size_t j = i + 1; j < zsites.size(); ++j)
            if (lat.graph_distance(zsites[i], zsites[j]) <= 1) return false;
    }
    return true;
}

std::uint64_t count_omega_xy(const TorusLattice& lat, const std::vector<int>& xsites,
                             const std::vector<int>& ysites) {
    std::uint64_t c = 0;
    for_each_z(lat, free_sites_for(lat, xsites, ysites), static_cast<int>(xsites.size()),
               [&](const std::vector<int>&) { ++c; });
    return c;
}

std::vector<int> sample_omega_xy(const TorusLattice& lat, const std::vector<int>& xsites,
                                 const std::vector<int>& ysites, Rng& rng, ZSampler how,
                                 std::int64_t max_tries) {
    int k = static_cast<int>(xsites.size());
    if (how == ZSampler::Exact) {
        std::vector<std::vector<int>> zs;
        for_each_z(lat, free_sites_for(lat, xsites, ysites), k,
                   [&](const std::vector<int>& z) { zs.push_back(z); });
        if (zs.empty()) throw std::domain_error("Omega^{X,Y} is empty");
        return zs[rng.below(zs.size())];
    }
    int n = lat.num_vertices();
    for (std::int64_t t = 0; t < max_tries; ++t) {
        // uniform k-subset via distinct uniform draws
        std::vector<int> z;
        while (static_cast<int>(z.size()) < k) {
            int v = static_cast<int>(rng.below(n));
            if (std::find(z.begin(), z.end(), v) == z.end()) z.push_back(v);
        }
        std::sort(z.begin(), z.end());
        if (in_omega_xy(lat, xsites, ysites, z)) return z;
    }
    throw std::domain_error("Omega^{X,Y} rejection sampling exhausted its budget");
}

namespace {

std::vector<std::vector<int>> assemble_path(const TorusLattice& lat, const std::vector<int>& xo,
                                            const std::vector<int>& zo, const std::vector<int>& yo) {
    int k = static_cast<int>(xo.size());
    std::vector<std::vector<int>> path;
    path.reserve(2 * k + 1);
    // sigma_i carries z_1..z_{i-1} then x_i..x_k; eta_i carries y_1..y_{i-1}
    // then z_i..z_k; sigma_{k+1} = eta_1 = Z is emitted once
    for (int i = 1; i <= k + 1; ++i) {
        std::vector<int> s;
        for (int j = 0; j < i - 1; ++j) s.push_back(zo[j]);
        for (int j = i - 1; j < k; ++j) s.push_back(xo[j]);
        std::sort(s.begin(), s.end());
        path.push_back(std::move(s));
    }
    for (int i = 2; i <= k + 1; ++i) {
        std::vector<int> s;
        for (int j = 0; j < i - 1; ++j) s.push_back(yo[j]);
        for (int j = i - 1; j < k; ++j) s.push_back(zo[j]);
        std::sort(s.begin(), s.end());
        path.push_back(std::move(s));
    }
    for (const auto& s : path) {
        Configuration c = Configuration::from_sites(lat.num_vertices(), s);
        if (c.particles() != k || !is_independent_config(lat, c))
            throw std::logic_error("flow path left Omega_{n,k}");
    }
    return path;
}

}  // namespace

std::vector<std::vector<int>> bl_flow_sample(const TorusLattice& lat, std::vector<int> xsites,
                                             std::vector<int> ysites, Rng& rng, ZSampler how) {
    int k = static_cast<int>(xsites.size());
    if (static_cast<int>(ysites.size()) != k) throw std::invalid_argument("|X| != |Y|");
    std::vector<int> z = sample_omega_xy(lat, xsites, ysites, rng, how);
    auto shuffle = [&](std::vector<int>& v) {
        for (int i = static_cast<int>(v.size()) - 1; i > 0; --i)
            std::swap(v[i], v[rng.below(i + 1)]);
    };
    shuffle(xsites);
    shuffle(z);
    shuffle(ysites);
    return assemble_path(lat, xsites, z, ysites);
}

std::map<std::vector<std::uint64_t>, double> enumerate_bl_flow(const TorusLattice& lat,
                                                               const std::vector<int>& xsites,
                                                               const std::vector<int>& ysites) {
    if (lat.num_vertices() > 64)
        throw std::invalid_argument("exhaustive flow enumeration supports n <= 64");
    int k = static_cast<int>(xsites.size());
    std::vector<std::vector<int>> zs;
    for_each_z(lat, free_sites_for(lat, xsites, ysites), k,
               [&](const std::vector<int>& z) { zs.push_back(z); });
    if (zs.empty()) throw std::domain_error("Omega^{X,Y} is empty");

    std::map<std::vector<std::uint64_t>, double> dist;
    std::vector<int> xo = xsites, yo = ysites;
    std::sort(xo.begin(), xo.end());
    std::sort(yo.begin(), yo.end());
    double fact = 1.0;
    for (int i = 2; i <= k; ++i) fact *= i;
    double combo_w = 1.0 / (static_cast<double>(zs.size()) * fact * fact * fact);
    do {
        std::vector<int> yp = yo;
        std::sort(yp.begin(), yp.end());
        do {
            for (const auto& zbase : zs) {
                std::vector<int> zo = zbase;
                std::sort(zo.begin(), zo.end());
                do {
                    auto path = assemble_path(lat, xo, zo, yp);
                    std::vector<std::uint64_t> key;
                    key.reserve(path.size());
                    for (const auto& s : path) {
                        std::uint64_t m = 0;
                        for (int v : s) m |= std::uint64_t{1} << v;
                        key.push_back(m);
                    }
                    dist[key] += combo_w;
                } while (std::next_permutation(zo.begin(), zo.end()));
            }
        } while (std::next_permutation(yp.begin(), yp.end()));
    } while (std::next_permutation(xo.begin(), xo.end()));
    return dist;
}

}  // namespace kcip
