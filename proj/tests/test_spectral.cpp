#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "kcip/enumeration.hpp"
#include "kcip/kernels.hpp"
#include "kcip/rng.hpp"
#include "kcip/spectral.hpp"

using namespace kcip;

namespace {

KernelMatrix two_state(double a, double b) {
    KernelMatrix k;
    k.P.resize(2, 2);
    k.P << 1.0 - a, a, b, 1.0 - b;
    k.pi.resize(2);
    k.pi << b / (a + b), a / (a + b);
    return k;
}

// product of two uniform two-point chains, coordinate picked uniformly:
// the pre-registered log-Sobolev oracle (alpha = theta for one coordinate,
// theta/2 for the balanced product)
KernelMatrix two_point_product(double theta) {
    KernelMatrix k;
    k.P = Eigen::MatrixXd::Zero(4, 4);
    for (int x = 0; x < 4; ++x) {
        for (int c = 0; c < 2; ++c) {
            int y = x ^ (1 << c);
            k.P(x, y) += 0.5 * theta;
            k.P(x, x) += 0.5 * (1.0 - theta);
        }
    }
    k.pi = Eigen::VectorXd::Constant(4, 0.25);
    return k;
}

}  // namespace

TEST_CASE("stationary law of a two-state chain") {
    auto k = two_state(0.3, 0.1);
    Eigen::VectorXd pi = stationary_distribution(k.P);
    CHECK(pi[0] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(pi[1] == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("stationary solve rejects reducible kernels") {
    Eigen::MatrixXd I = Eigen::MatrixXd::Identity(2, 2);
    CHECK_THROWS_AS(stationary_distribution(I), std::runtime_error);
}

TEST_CASE("two-state spectral gap is a + b") {
    CHECK(spectral_gap(two_state(0.3, 0.1)) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(spectral_gap(two_state(0.05, 0.9)) == doctest::Approx(0.95).epsilon(1e-12));
}

TEST_CASE("1x1 kernel has gap 1 by convention") {
    KernelMatrix k;
    k.P = Eigen::MatrixXd::Ones(1, 1);
    k.pi = Eigen::VectorXd::Ones(1);
    CHECK(spectral_gap(k) == 1.0);
}

TEST_CASE("perfect uniform kernel has gap exactly one half") {
    TorusLattice lat(3, 2);
    auto omega2 = enumerate_omega_k(lat, 2);
    auto l = build_kernel_matrix(lat, {ChainKind::PerfectUniform, 0.0}, omega2);
    CHECK(spectral_gap(l) == doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("non-reversible kernels: reject or symmetrise") {
    KernelMatrix cyc;
    cyc.P.resize(3, 3);
    cyc.P << 0, 1, 0, 0, 0, 1, 1, 0, 0;
    cyc.pi = Eigen::VectorXd::Constant(3, 1.0 / 3.0);
    CHECK_THROWS_AS(spectral_gap(cyc, Reversibility::Reject), std::invalid_argument);
    // additive reversibilisation of the 3-cycle: gap = 1 - cos(2 pi / 3) = 3/2
    CHECK(spectral_gap(cyc, Reversibility::Symmetrize) == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("functional toolkit on hand values") {
    auto k = two_state(0.3, 0.1);  // pi = (1/4, 3/4)
    Eigen::VectorXd f(2);
    f << 1.0, -1.0;
    CHECK(l2_norm_pi(f, k.pi) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(variance_pi(f, k.pi) == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(dirichlet_form(k.P, k.pi, f) == doctest::Approx(0.3).epsilon(1e-14));
    // the two-state non-constant f is the second eigenfunction: E/V = gap
    CHECK(variational_gap_quotient(k, f) == doctest::Approx(0.4).epsilon(1e-12));

    Eigen::VectorXd g(2);
    g << 2.0, 0.0;  // ||g||^2 = 1, L(g) = 4 log(4) * 1/4
    CHECK(entropy_lpi(g, k.pi) == doctest::Approx(std::log(4.0)).epsilon(1e-13));

    Eigen::VectorXd c = Eigen::VectorXd::Ones(2);
    CHECK(variational_gap_quotient(k, c) == std::numeric_limits<double>::infinity());
}

TEST_CASE("random trial functions never beat the eigen gap") {
    TorusLattice lat(3, 1);
    auto states = enumerate_kcip_space(lat);
    auto k = build_kernel_matrix(lat, {ChainKind::Kcip, 1.0 / 3.0}, states);
    double gap = spectral_gap(k);
    CHECK(gap > 0.0);
    Rng rng(2024);
    double best = std::numeric_limits<double>::infinity();
    for (int t = 0; t < 200; ++t) {
        Eigen::VectorXd f(k.size());
        for (int i = 0; i < k.size(); ++i) f[i] = rng.real() - 0.5;
        double q = variational_gap_quotient(k, f);
        REQUIRE(q >= gap - 1e-10);
        best = std::min(best, q);
    }
    CHECK(best < 20.0 * gap);  // sanity: random functions land within an order or two
}

TEST_CASE("log-Sobolev estimate matches the two-point and product oracles") {
    double theta = 0.3;
    auto single = two_state(theta, theta);
    double est1 = log_sobolev_estimate(single, 30, 300, 7);
    CHECK(est1 >= theta - 1e-9);  // it is an upper estimate of alpha = theta
    CHECK(est1 <= theta * 1.05);

    auto prod = two_point_product(theta);
    double est2 = log_sobolev_estimate(prod, 40, 400, 7);
    CHECK(est2 >= theta / 2.0 - 1e-9);  // alpha of the balanced product halves
    CHECK(est2 <= theta / 2.0 * 1.05);

    // ordering sanity: alpha <= gap / 2 ... gap relation alpha <= gap holds
    CHECK(est1 <= spectral_gap(single) + 1e-12);
    CHECK(est2 <= spectral_gap(prod) + 1e-12);
}

TEST_CASE("trace kernel Schur complement against a hand oracle") {
    KernelMatrix k;
    k.P.resize(3, 3);
    k.P << 0.2, 0.3, 0.5, 0.4, 0.4, 0.2, 0.6, 0.3, 0.1;
    k.pi = stationary_distribution(k.P);
    auto q = trace_kernel_exact(k, {0, 1});
    // hand Schur complement: Q = [[8/15, 7/15], [8/15, 7/15]]
    CHECK(q.P(0, 0) == doctest::Approx(8.0 / 15.0).epsilon(1e-12));
    CHECK(q.P(0, 1) == doctest::Approx(7.0 / 15.0).epsilon(1e-12));
    CHECK(q.P(1, 0) == doctest::Approx(8.0 / 15.0).epsilon(1e-12));
    CHECK(q.P(1, 1) == doctest::Approx(7.0 / 15.0).epsilon(1e-12));
    // conditioned stationary law equals the trace chain's own stationary law
    Eigen::VectorXd own = stationary_distribution(q.P);
    CHECK((own - q.pi).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(q.pi[0] == doctest::Approx(8.0 / 15.0).epsilon(1e-10));
}

TEST_CASE("absorbing restriction folds outward mass into the diagonal") {
    KernelMatrix k;
    k.P.resize(3, 3);
    k.P << 0.2, 0.3, 0.5, 0.4, 0.4, 0.2, 0.6, 0.3, 0.1;
    k.pi = stationary_distribution(k.P);
    auto r = absorb_restriction(k, {0, 1});
    CHECK(r.P(0, 1) == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(r.P(0, 0) == doctest::Approx(0.7).epsilon(1e-14));
    CHECK(r.P(1, 0) == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(r.P(1, 1) == doctest::Approx(0.6).epsilon(1e-14));
}

TEST_CASE("projected birth-death kernel: frozen entry and exact stationarity") {
    TorusLattice lat(3, 2);
    double p = 1.0 / 9.0;
    std::vector<std::uint64_t> counts{9, static_cast<std::uint64_t>(count_omega_k(lat, 2)),
                                      static_cast<std::uint64_t>(count_omega_k(lat, 3))};
    REQUIRE(counts[1] == 18);
    auto proj = projected_kernel(counts, p, 9);
    REQUIRE(proj.size() == 2);
    // w2/w1 = 2p/(1-p) = 1/4, so Ptilde(1,2) = (1/4) / (3 * 5/4) = 1/15
    CHECK(proj.P(0, 1) == doctest::Approx(1.0 / 15.0).epsilon(1e-13));
    for (int i = 0; i < 2; ++i) REQUIRE(proj.P.row(i).sum() == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(detailed_balance_violation(proj) < 1e-16);
    // mutilde is proportional to the Theta block masses
    double w1 = 9 * std::pow(p, 1) * std::pow(1 - p, 8);
    double w2 = 18 * std::pow(p, 2) * std::pow(1 - p, 7);
    double w3 = static_cast<double>(counts[2]) * std::pow(p, 3) * std::pow(1 - p, 6);
    double t1 = w1 + w2, t2 = w2 + w3;
    CHECK(proj.pi[0] == doctest::Approx(t1 / (t1 + t2)).epsilon(1e-13));
}

TEST_CASE("projection rejects an empty stratum") {
    CHECK_THROWS_AS(projected_kernel({9, 0, 0}, 0.1, 9), std::invalid_argument);
}

TEST_CASE("birth-death hitting times: formula equals linear solve") {
    // two-state sanity: expected time to move 0 -> 1 is 1/a
    auto k2 = two_state(0.3, 0.1);
    CHECK(birth_death_hitting_time(k2, 0, 1) == doctest::Approx(1.0 / 0.3).epsilon(1e-12));
    CHECK(hitting_time_linear_solve(k2.P, 0, 1) == doctest::Approx(1.0 / 0.3).epsilon(1e-12));

    // a five-state birth-death chain with assorted rates
    int m = 5;
    KernelMatrix k;
    k.P = Eigen::MatrixXd::Zero(m, m);
    double up[] = {0.3, 0.25, 0.2, 0.15};
    double down[] = {0.1, 0.2, 0.3, 0.4};
    for (int i = 0; i < m; ++i) {
        if (i + 1 < m) k.P(i, i + 1) = up[i];
        if (i - 1 >= 0) k.P(i, i - 1) = down[i - 1];
        k.P(i, i) = 1.0 - k.P.row(i).sum();
    }
    k.pi = stationary_distribution(k.P);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
            double f = birth_death_hitting_time(k, a, b);
            double s = hitting_time_linear_solve(k.P, a, b);
            REQUIRE(f == doctest::Approx(s).epsilon(1e-11));
        }
    CHECK(birth_death_hitting_time(k, 2, 2) == 0.0);

    KernelMatrix bad;
    bad.P = Eigen::MatrixXd::Constant(3, 3, 1.0 / 3.0);
    bad.pi = Eigen::VectorXd::Constant(3, 1.0 / 3.0);
    CHECK_THROWS_AS(birth_death_hitting_time(bad, 0, 2), std::invalid_argument);
}

TEST_CASE("Madras-Randall certificate on the traced low strata") {
    TorusLattice lat(3, 2);
    double p = 1.0 / 9.0;
    auto states = enumerate_kcip_space(lat);
    auto k = build_kernel_matrix(lat, {ChainKind::Kcip, p}, states);
    std::vector<int> subset, stratum;
    for (int i = 0; i < states.size(); ++i) {
        int s = stratum_of(lat, states.config(i));
        if (s >= 1 && s <= 3) {
            subset.push_back(i);
            stratum.push_back(s);
        }
    }
    auto traced = trace_kernel_exact(k, subset);
    std::vector<std::uint64_t> counts{9, 18, count_omega_k(lat, 3)};
    auto rep = madras_randall_check(traced, stratum, counts, p, 9);
    CHECK(rep.gap_full > 0.0);
    CHECK(rep.gap_projected > 0.0);
    CHECK(rep.gap_restrictions.size() == 2);
    CHECK(rep.rhs == doctest::Approx(rep.gap_projected * rep.min_gap_restriction / 9.0));
    CHECK(rep.holds());
}

TEST_CASE("hitting formula and solve agree on the projected chain") {
    std::vector<std::uint64_t> counts{9, 18, 6};
    auto proj = projected_kernel(counts, 1.0 / 9.0, 9);
    double f = birth_death_hitting_time(proj, 0, 1);
    double s = hitting_time_linear_solve(proj.P, 0, 1);
    CHECK(f == doctest::Approx(s).epsilon(1e-12));
}
