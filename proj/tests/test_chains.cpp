#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "kcip/chains.hpp"
#include "kcip/configuration.hpp"
#include "kcip/lattice.hpp"
#include "kcip/rng.hpp"

using namespace kcip;

TEST_CASE("kcip_step consumes exactly two draws and follows the update rule") {
    TorusLattice lat(4, 2);
    double p = 0.2;
    Configuration x = Configuration::from_sites(lat.num_vertices(), {0, 5});
    Configuration y = x;
    Rng a(42), b(42);  // identical streams: one drives the step, one replays it
    for (int t = 0; t < 5000; ++t) {
        kcip_step(lat, x, p, a);
        int v = static_cast<int>(b.below(lat.num_vertices()));
        double u = b.real();
        if (has_occupied_neighbor(lat, y, v)) y.set(v, u <= p);
        REQUIRE(x == y);
    }
    CHECK(a.next_u64() == b.next_u64());  // streams stayed in lock-step
}

TEST_CASE("kcip_step reports occupancy flips") {
    TorusLattice lat(3, 1);
    Configuration x = Configuration::from_sites(3, {0});
    Rng rng(7);
    for (int t = 0; t < 2000; ++t) {
        Configuration before = x;
        bool flipped = kcip_step(lat, x, 0.4, rng);
        CHECK(flipped == !(before == x));
    }
}

TEST_CASE("stationary weight is the conditioned product law") {
    int n = 3;
    double p = 0.25;
    // hand values: p^k (1-p)^(n-k) / (1 - (1-p)^n), n = 3, p = 1/4
    double z = 1.0 - 0.75 * 0.75 * 0.75;  // 0.578125
    CHECK(kcip_stationary_weight(1, n, p) == doctest::Approx(0.25 * 0.5625 / z).epsilon(1e-14));
    CHECK(kcip_stationary_weight(3, n, p) == doctest::Approx(0.015625 / z).epsilon(1e-14));
    CHECK(kcip_stationary_weight(0, n, p) == 0.0);

    // sums to one over the 2^n - 1 nonempty configurations
    double total = 0.0;
    for (int mask = 1; mask < 8; ++mask) {
        Configuration x = Configuration::from_mask(n, static_cast<std::uint64_t>(mask));
        total += kcip_stationary_weight(x, p);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("se_step swaps one uniformly drawn edge") {
    TorusLattice lat(4, 2);
    Configuration x = Configuration::from_sites(16, {0, 1, 9});
    Configuration y = x;
    Rng a(3), b(3);
    for (int t = 0; t < 5000; ++t) {
        se_step(lat, x, a);
        auto [u, v] = lat.edge(static_cast<int>(b.below(lat.num_edges())));
        bool bu = y.test(u), bv = y.test(v);
        y.set(u, bv);
        y.set(v, bu);
        REQUIRE(x == y);
        REQUIRE(x.particles() == 3);  // exclusion conserves particles
    }
    CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("bl_step is lazy and moves a uniform particle to a uniform hole") {
    TorusLattice lat(3, 2);
    Configuration x = Configuration::from_sites(9, {2, 6});
    Configuration y = x;
    Rng a(11), b(11);
    for (int t = 0; t < 5000; ++t) {
        bl_step(lat, x, a);
        if (b.below(2) != 0) {
            auto occ = y.occupied_sites();
            int i = static_cast<int>(b.below(occ.size()));
            int j = static_cast<int>(b.below(9 - occ.size()));
            int from = occ[static_cast<std::size_t>(i)];
            int to = -1;
            for (int v = 0, seen = 0; v < 9; ++v)
                if (!y.test(v) && seen++ == j) {
                    to = v;
                    break;
                }
            y.set(from, false);
            y.set(to, true);
        }
        REQUIRE(x == y);
        REQUIRE(x.particles() == 2);
    }
    CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("particle system tracks stacks") {
    TorusLattice lat(3, 2);
    ParticleSystem ps(lat, {0, 0, 4});
    CHECK(ps.walkers() == 3);
    CHECK(ps.occupied_count() == 2);
    CHECK(ps.stack_size(0) == 2);
    CHECK(ps.stack_size(4) == 1);
    ps.move_stack(0, 4);
    CHECK(ps.occupied_count() == 1);
    CHECK(ps.stack_size(4) == 3);
    CHECK(ps.walkers() == 3);
}

TEST_CASE("coalescent_step: three draws, slowdown gate, merge flag") {
    TorusLattice lat(4, 2);
    ParticleSystem ps(lat, {0, 1, 10});
    double q = 0.2;  // q * L_t <= 0.6 < 1
    ParticleSystem mirror = ps;
    Rng a(5), b(5);
    for (int t = 0; t < 3000; ++t) {
        int l = mirror.occupied_count();
        bool merged = coalescent_step(lat, ps, q, a);
        double u = b.real();
        int v = mirror.occupied_sites()[b.below(l)];
        int tgt = lat.neighbors(v)[b.below(lat.degree())];
        bool expect_merge = false;
        if (u <= q * l) {
            int before = mirror.occupied_count();
            mirror.move_stack(v, tgt);
            expect_merge = mirror.occupied_count() < before;
        }
        REQUIRE(merged == expect_merge);
        REQUIRE(ps.positions() == mirror.positions());
        REQUIRE(ps.walkers() == 3);  // walkers never disappear, they stack
    }
    CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("coalescent_step rejects q above the slowdown bound") {
    TorusLattice lat(4, 2);
    ParticleSystem ps(lat, {0, 5, 10});
    Rng rng(1);
    CHECK_THROWS_AS(coalescent_step(lat, ps, 0.5, rng), std::invalid_argument);  // qL = 1.5
}

TEST_CASE("connected components of the particle subgraph") {
    TorusLattice lat(3, 2);
    CHECK(connected_components(lat, Configuration::from_sites(9, {0, 4, 8})) == 3);
    CHECK(connected_components(lat, Configuration::from_sites(9, {0, 1})) == 1);
    CHECK(connected_components(lat, Configuration::from_sites(9, {0, 1, 2})) == 1);  // wraps
    CHECK(connected_components(lat, Configuration::from_sites(9, {0, 5})) == 2);
    CHECK(connected_components(lat, Configuration(9)) == 0);
}
