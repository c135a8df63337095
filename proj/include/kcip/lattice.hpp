#pragma once

#include <cstdint>
#include <vector>

namespace kcip {

// Discrete torus Z_L^d. Vertices are flattened mixed-radix indices with
// coordinate 0 least significant: v = sum_i coord[i] * L^i. Requires L >= 3
// so that +e_i and -e_i neighbours are distinct (no multi-edges).
class TorusLattice {
public:
    TorusLattice(int L, int d);

    int side() const { return L_; }
    int dim() const { return d_; }
    int num_vertices() const { return n_; }
    int degree() const { return 2 * d_; }
    int num_edges() const { return n_ * d_; }

    // neighbours of v in fixed order: (+e_0, -e_0, +e_1, -e_1, ...)
    const std::int32_t* neighbors(int v) const { return &nbr_[static_cast<std::size_t>(v) * 2 * d_]; }

    std::vector<int> coordinates(int v) const;
    int vertex_at(const std::vector<int>& coords) const;

    // undirected edges as ordered pairs (u, u + e_i); edge e = v*d + i
    std::pair<int, int> edge(int e) const;

    // graph distance: sum over coordinates of min(|du|, L - |du|)
    int graph_distance(int u, int v) const;

    bool adjacent(int u, int v) const { return graph_distance(u, v) == 1; }

private:
    int L_, d_, n_;
    std::vector<std::int32_t> nbr_;  // n * 2d table
};

}  // namespace kcip
