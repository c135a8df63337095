#include "kcip/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kcip {

std::vector<std::int64_t> checkpoint_grid(std::int64_t horizon, double gamma) {
    if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    if (gamma <= 1.0) throw std::invalid_argument("checkpoint ratio must exceed 1");
    std::vector<std::int64_t> ts;
    for (double v = 1.0; v < static_cast<double>(horizon); v *= gamma) {
        auto t = static_cast<std::int64_t>(std::ceil(v));
        if (t >= horizon) break;
        if (ts.empty() || t != ts.back()) ts.push_back(t);
    }
    ts.push_back(horizon);
    return ts;
}

void for_each_replica(int replicas, Exec exec, const std::function<void(int)>& fn) {
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int r = 0; r < replicas; ++r) fn(r);
    } else {
        for (int r = 0; r < replicas; ++r) fn(r);
    }
}

namespace {

void check_checkpoints(const std::vector<std::int64_t>& cps, std::int64_t horizon) {
    for (std::size_t i = 0; i < cps.size(); ++i) {
        if (cps[i] < 1 || cps[i] > horizon) throw std::invalid_argument("checkpoint out of range");
        if (i > 0 && cps[i] <= cps[i - 1]) throw std::invalid_argument("checkpoints not increasing");
    }
}

}  // namespace

TrajectoryStats simulate_kcip(const TorusLattice& lat, Configuration start, double p,
                              std::int64_t horizon, const std::vector<std::int64_t>& checkpoints,
                              Rng& rng, bool track_components) {
    if (start.empty()) throw std::invalid_argument("KCIP start must be nonempty");
    check_checkpoints(checkpoints, horizon);
    TrajectoryStats out;
    out.horizon = horizon;
    out.records.reserve(checkpoints.size());
    Configuration x = std::move(start);
    int comps = track_components ? connected_components(lat, x) : -1;
    std::int64_t collisions = 0;
    std::size_t ci = 0;
    for (std::int64_t t = 1; t <= horizon && ci < checkpoints.size(); ++t) {
        while (ci < checkpoints.size() && checkpoints[ci] == t) {
            out.records.push_back({t, x.particles(), comps, collisions});
            ++ci;
        }
        if (ci >= checkpoints.size()) break;
        bool flipped = kcip_step(lat, x, p, rng);
        if (track_components && flipped) {
            int c = connected_components(lat, x);
            if (c < comps) ++collisions;
            comps = c;
        }
    }
    return out;
}

std::int64_t collision_count(const TorusLattice& lat, const std::vector<Configuration>& traj) {
    std::int64_t c = 0;
    for (std::size_t u = 0; u + 1 < traj.size(); ++u)
        if (connected_components(lat, traj[u + 1]) < connected_components(lat, traj[u])) ++c;
    return c;
}

namespace {

double tv_distance(const Eigen::VectorXd& mu, const Eigen::VectorXd& pi) {
    return 0.5 * (mu - pi).cwiseAbs().sum();
}

}  // namespace

std::vector<std::pair<std::int64_t, double>> tv_mixing_curve_exact(
    const KernelMatrix& k, int start, const std::vector<std::int64_t>& checkpoints) {
    if (k.pi.size() != k.size()) throw std::invalid_argument("TV curve needs the stationary law");
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(k.size());
    mu[start] = 1.0;
    std::vector<std::pair<std::int64_t, double>> out;
    std::int64_t t = 0;
    for (std::int64_t cp : checkpoints) {
        for (; t < cp; ++t) mu = (k.P.transpose() * mu).eval();
        out.emplace_back(cp, tv_distance(mu, k.pi));
    }
    return out;
}

std::int64_t tv_mixing_time_exact(const KernelMatrix& k, int start, double eps,
                                  std::int64_t max_t) {
    if (k.pi.size() != k.size()) throw std::invalid_argument("TV curve needs the stationary law");
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(k.size());
    mu[start] = 1.0;
    for (std::int64_t t = 0; t <= max_t; ++t) {
        if (tv_distance(mu, k.pi) < eps) return t;
        mu = (k.P.transpose() * mu).eval();
    }
    throw std::runtime_error("mixing time exceeds the step budget");
}

Configuration random_hardcore_configuration(const TorusLattice& lat, int k, Rng& rng) {
    int n = lat.num_vertices();
    if (k < 1 || k > n) throw std::invalid_argument("particle count out of range");
    for (int attempt = 0; attempt < 1000; ++attempt) {
        Configuration x(n);
        std::int64_t budget = static_cast<std::int64_t>(200) * n;
        bool ok = true;
        for (int placed = 0; placed < k && ok; ++placed) {
            while (true) {
                if (--budget < 0) {
                    ok = false;
                    break;
                }
                int v = static_cast<int>(rng.below(n));
                if (!x.test(v) && !has_occupied_neighbor(lat, x, v)) {
                    x.set(v, true);
                    break;
                }
            }
        }
        if (ok) return x;
    }
    throw std::runtime_error("hard-core placement stalled; k too close to the packing bound");
}

Configuration hardcore_start(const TorusLattice& lat, int k, Rng& rng) {
    int n = lat.num_vertices();
    // Dart-throwing jams near 0.36 n (random sequential adsorption bound);
    // denser hard-core starts are drawn as a uniform k-subset of a uniformly
    // chosen checkerboard parity class, which is an independent set of size
    // n/2 whenever L is even.
    if (4 * k <= n || lat.side() % 2 != 0 || 2 * k > n)
        return random_hardcore_configuration(lat, k, rng);
    int parity = static_cast<int>(rng.below(2));
    std::vector<int> cls;
    cls.reserve(n / 2);
    for (int v = 0; v < n; ++v) {
        int sum = 0;
        for (int c : lat.coordinates(v)) sum += c;
        if (sum % 2 == parity) cls.push_back(v);
    }
    std::vector<int> idx = random_ksubset(static_cast<int>(cls.size()), k, rng);
    std::vector<int> sites;
    sites.reserve(k);
    for (int i : idx) sites.push_back(cls[i]);
    return Configuration::from_sites(n, sites);
}

std::vector<int> random_ksubset(int n, int k, Rng& rng) {
    std::vector<int> s;
    while (static_cast<int>(s.size()) < k) {
        int v = static_cast<int>(rng.below(n));
        if (std::find(s.begin(), s.end(), v) == s.end()) s.push_back(v);
    }
    std::sort(s.begin(), s.end());
    return s;
}

double normal_ci_halfwidth(const std::vector<double>& xs) {
    std::size_t n = xs.size();
    if (n < 2) return 0.0;
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    double sd = std::sqrt(ss / static_cast<double>(n - 1));
    return 1.96 * sd / std::sqrt(static_cast<double>(n));
}

DriftResult drift_estimate(const TorusLattice& lat, double p, int v1, double epsilon,
                           int replicas, std::uint64_t master_seed, Exec exec) {
    if (replicas < 1) throw std::invalid_argument("need at least one replica");
    double n = lat.num_vertices();
    DriftResult res;
    res.horizon = static_cast<std::int64_t>(std::ceil(epsilon * n * n * n));
    res.final_counts.assign(replicas, 0);
    for_each_replica(replicas, exec, [&](int r) {
        Rng rng = Rng::for_replica(master_seed, static_cast<std::uint64_t>(r));
        Configuration x = hardcore_start(lat, v1, rng);
        for (std::int64_t t = 0; t < res.horizon; ++t) kcip_step(lat, x, p, rng);
        res.final_counts[r] = x.particles();
    });
    std::vector<double> xs(res.final_counts.begin(), res.final_counts.end());
    double mean = 0.0;
    for (double x : xs) mean += x;
    res.mean = mean / std::max<std::size_t>(1, xs.size());
    res.ci_halfwidth = normal_ci_halfwidth(xs);
    return res;
}

OccupancyProfile coalescent_occupancy_profile(const TorusLattice& lat, int k, double q,
                                              std::int64_t horizon,
                                              const std::vector<std::int64_t>& checkpoints,
                                              int replicas, std::uint64_t master_seed, Exec exec) {
    if (q < 0.0 || q * k > 1.0 + 1e-12)
        throw std::invalid_argument("coalescent rate must satisfy q <= 1/k");
    check_checkpoints(checkpoints, horizon);
    OccupancyProfile prof;
    prof.per_replica.assign(replicas, {});
    for_each_replica(replicas, exec, [&](int r) {
        Rng rng = Rng::for_replica(master_seed, static_cast<std::uint64_t>(r));
        ParticleSystem ps(lat, random_ksubset(lat.num_vertices(), k, rng));
        std::vector<int>& ls = prof.per_replica[r];
        ls.reserve(checkpoints.size());
        std::size_t ci = 0;
        for (std::int64_t t = 1; t <= horizon && ci < checkpoints.size(); ++t) {
            while (ci < checkpoints.size() && checkpoints[ci] == t) {
                ls.push_back(ps.occupied_count());
                ++ci;
            }
            if (ci >= checkpoints.size()) break;
            coalescent_step(lat, ps, q, rng);
        }
    });
    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
        std::vector<double> xs;
        xs.reserve(replicas);
        for (int r = 0; r < replicas; ++r) xs.push_back(prof.per_replica[r][c]);
        double mean = 0.0;
        for (double x : xs) mean += x;
        prof.points.push_back({checkpoints[c], mean / replicas, normal_ci_halfwidth(xs)});
    }
    return prof;
}

bool in_low_strata(const TorusLattice& lat, const Configuration& x, int max_stratum) {
    if (x.particles() < 1 || x.particles() > max_stratum) return false;
    return is_independent_config(lat, x);
}

std::int64_t occupation_count_kcip(const TorusLattice& lat, Configuration start, double p,
                                   double r, std::int64_t horizon, Rng& rng) {
    int max_stratum = static_cast<int>(std::floor(r * std::log(lat.num_vertices())));
    std::int64_t count = 0;
    Configuration x = std::move(start);
    for (std::int64_t t = 1; t <= horizon; ++t) {
        if (in_low_strata(lat, x, max_stratum)) ++count;
        kcip_step(lat, x, p, rng);
    }
    return count;
}

std::optional<std::int64_t> first_time_occupation_exceeds(const TorusLattice& lat,
                                                          Configuration start, double p, double r,
                                                          std::int64_t target,
                                                          std::int64_t max_steps, Rng& rng) {
    int max_stratum = static_cast<int>(std::floor(r * std::log(lat.num_vertices())));
    std::int64_t count = 0;
    Configuration x = std::move(start);
    for (std::int64_t t = 1; t <= max_steps; ++t) {
        if (in_low_strata(lat, x, max_stratum)) ++count;
        if (count > target) return t;
        kcip_step(lat, x, p, rng);
    }
    return std::nullopt;  // censored
}

namespace {

bool has_adjacent_pair(const TorusLattice& lat, const Configuration& x) {
    return !is_independent_config(lat, x);
}

}  // namespace

CollisionTimes collision_time_simulation(const TorusLattice& lat, int k, std::int64_t horizon,
                                         int replicas, std::uint64_t master_seed, Exec exec) {
    CollisionTimes out;
    out.tau.assign(replicas, 0);
    out.censored.assign(replicas, 0);
    for_each_replica(replicas, exec, [&](int r) {
        Rng rng = Rng::for_replica(master_seed, static_cast<std::uint64_t>(r));
        Configuration x =
            Configuration::from_sites(lat.num_vertices(), random_ksubset(lat.num_vertices(), k, rng));
        if (has_adjacent_pair(lat, x)) {
            out.tau[r] = 0;
            return;
        }
        for (std::int64_t t = 1; t <= horizon; ++t) {
            se_step(lat, x, rng);
            if (has_adjacent_pair(lat, x)) {
                out.tau[r] = t;
                return;
            }
        }
        out.tau[r] = horizon;
        out.censored[r] = 1;
    });
    return out;
}

TraceStream::TraceStream(const TorusLattice& lat, Configuration start, double p, Predicate in_s,
                         Rng rng)
    : lat_(&lat), x_(std::move(start)), p_(p), in_s_(std::move(in_s)), rng_(rng) {}

std::optional<TraceStream::Visit> TraceStream::next(std::int64_t max_total_steps) {
    // eta(s) = inf{t > eta(s-1): X_t in S}, eta(0) = 0: the start state does
    // not count as a visit
    while (t_ < max_total_steps) {
        ++t_;
        kcip_step(*lat_, x_, p_, rng_);
        if (in_s_(x_)) {
            ++s_;
            return Visit{t_, s_, x_};
        }
    }
    return std::nullopt;
}

}  // namespace kcip
