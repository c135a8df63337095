// kcip-lab: simulation and exact-analysis toolkit for the constrained Ising
// particle process on the discrete torus, with companion chains.
//
// Exit codes: 0 success, 2 configuration error, 3 state-space cap breach,
// 4 numerical failure.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>

#include "kcip/chains.hpp"
#include "kcip/enumeration.hpp"
#include "kcip/estimators.hpp"
#include "kcip/flows.hpp"
#include "kcip/io.hpp"
#include "kcip/kernels.hpp"
#include "kcip/spectral.hpp"

namespace {

using json = nlohmann::json;

struct Params {
    int L = 3;
    int d = 2;
    double c = std::numeric_limits<double>::quiet_NaN();
    double p = std::numeric_limits<double>::quiet_NaN();
    int k = 0;
    double q = -1.0;
    std::int64_t horizon = 0;
    int replicas = 1;
    std::uint64_t seed = 1;
    std::string out;
    std::string format = "csv";
    std::size_t max_states = 0;  // 0 = use defaults
    double epsilon = 0.1;
    double gamma = 1.25;

    std::size_t enum_cap() const { return max_states ? max_states : kcip::kDefaultEnumCap; }
    std::size_t eigen_cap() const { return max_states ? max_states : kcip::kDefaultEigenCap; }

    double density(const kcip::TorusLattice& lat) const {
        bool has_c = !std::isnan(c), has_p = !std::isnan(p);
        if (has_c == has_p)
            throw CLI::ValidationError("--c/--p", "exactly one of --c and --p is required");
        double val = has_p ? p : c / lat.num_vertices();
        if (!(val > 0.0 && val < 1.0))
            throw CLI::ValidationError("--c/--p", "density must land in (0,1)");
        return val;
    }
};

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<kcip::CsvValue>> rows;
};

std::string render_json(const Table& t) {
    json arr = json::array();
    for (const auto& row : t.rows) {
        json obj;
        for (std::size_t i = 0; i < t.columns.size(); ++i) {
            const auto& v = row[i];
            if (std::holds_alternative<std::int64_t>(v))
                obj[t.columns[i]] = std::get<std::int64_t>(v);
            else if (std::holds_alternative<double>(v))
                obj[t.columns[i]] = std::get<double>(v);
            else
                obj[t.columns[i]] = std::get<std::string>(v);
        }
        arr.push_back(std::move(obj));
    }
    return arr.dump(2) + "\n";
}

std::string render_csv(const Table& t) {
    kcip::CsvTable csv(t.columns);
    for (const auto& row : t.rows) csv.add_row(row);
    return csv.body();
}

std::string join_sites(const std::vector<int>& sites) {
    std::string s;
    for (std::size_t i = 0; i < sites.size(); ++i) {
        if (i) s += ';';
        s += std::to_string(sites[i]);
    }
    return s;
}

// ---- subcommand bodies ------------------------------------------------

Table run_simulate(const Params& prm, json& extra) {
    kcip::TorusLattice lat(prm.L, prm.d);
    double p = prm.density(lat);
    if (prm.k < 1) throw CLI::ValidationError("--k", "simulate needs an initial particle count");
    if (prm.horizon < 1) throw CLI::ValidationError("--horizon", "simulate needs a horizon");
    auto cps = kcip::checkpoint_grid(prm.horizon, prm.gamma);
    std::vector<kcip::TrajectoryStats> stats(prm.replicas);
    kcip::for_each_replica(prm.replicas, kcip::Exec::Parallel, [&](int r) {
        kcip::Rng rng = kcip::Rng::for_replica(prm.seed, r);
        kcip::Configuration x = kcip::Configuration::from_sites(
            lat.num_vertices(), kcip::random_ksubset(lat.num_vertices(), prm.k, rng));
        stats[r] = kcip::simulate_kcip(lat, std::move(x), p, prm.horizon, cps, rng, true);
        stats[r].replica = r;
    });
    Table t{{"replica", "t", "particles", "components", "collisions"}, {}};
    for (const auto& s : stats)
        for (const auto& rec : s.records)
            t.rows.push_back({std::int64_t{s.replica}, rec.t, std::int64_t{rec.particles},
                              std::int64_t{rec.components}, rec.collisions});
    extra["checkpoints"] = cps.size();
    return t;
}

Table run_exact(const Params& prm, json& extra) {
    kcip::TorusLattice lat(prm.L, prm.d);
    double p = prm.density(lat);
    auto states = kcip::enumerate_kcip_space(lat, prm.enum_cap());
    auto K = kcip::build_kernel_matrix(lat, {kcip::ChainKind::Kcip, p}, states,
                                       kcip::Exec::Parallel, prm.eigen_cap());
    Eigen::VectorXd pi_solve = kcip::stationary_distribution(K.P);
    double gap = kcip::spectral_gap(K);
    Table t{{"state", "mask", "particles", "stationary"}, {}};
    for (int i = 0; i < states.size(); ++i)
        t.rows.push_back({std::int64_t{i}, static_cast<std::int64_t>(states.states[i]),
                          std::int64_t{std::popcount(states.states[i])}, K.pi[i]});
    extra["states"] = states.size();
    extra["spectral_gap"] = gap;
    extra["stationary_solve_max_abs_diff"] = (pi_solve - K.pi).cwiseAbs().maxCoeff();
    extra["detailed_balance_defect"] = kcip::detailed_balance_violation(K);
    return t;
}

Table run_trace(const Params& prm, json& extra) {
    kcip::TorusLattice lat(prm.L, prm.d);
    double p = prm.density(lat);
    if (prm.k < 1) throw CLI::ValidationError("--k", "trace needs the top stratum index");
    auto states = kcip::enumerate_kcip_space(lat, prm.enum_cap());
    auto K = kcip::build_kernel_matrix(lat, {kcip::ChainKind::Kcip, p}, states,
                                       kcip::Exec::Parallel, prm.eigen_cap());
    std::vector<int> subset;
    for (int i = 0; i < states.size(); ++i) {
        int s = kcip::stratum_of(lat, states.config(i));
        if (s >= 1 && s <= prm.k) subset.push_back(i);
    }
    if (subset.empty()) throw CLI::ValidationError("--k", "no states in the requested strata");
    auto traced = kcip::trace_kernel_exact(K, subset);

    std::vector<std::int64_t> visits(subset.size(), 0);
    std::int64_t total_visits = 0;
    if (prm.horizon > 0) {
        kcip::Rng rng(prm.seed);
        kcip::Configuration start = states.config(subset.front());
        kcip::TraceStream stream(
            lat, start, p,
            [&](const kcip::Configuration& x) {
                int s = kcip::stratum_of(lat, x);
                return s >= 1 && s <= prm.k;
            },
            rng);
        while (auto v = stream.next(prm.horizon)) {
            int idx = states.index_of(v->state.mask());
            auto it = std::lower_bound(subset.begin(), subset.end(), idx);
            ++visits[it - subset.begin()];
            ++total_visits;
        }
    }
    Table t{{"state", "mask", "particles", "stationary", "visits", "freq"}, {}};
    for (std::size_t i = 0; i < subset.size(); ++i) {
        std::uint64_t mask = states.states[subset[i]];
        double freq = total_visits ? static_cast<double>(visits[i]) / total_visits : 0.0;
        t.rows.push_back({static_cast<std::int64_t>(i), static_cast<std::int64_t>(mask),
                          std::int64_t{std::popcount(mask)}, traced.pi[i], visits[i], freq});
    }
    extra["subset_states"] = subset.size();
    extra["trace_visits"] = total_visits;
    extra["trace_gap"] = kcip::spectral_gap(traced);
    return t;
}

std::vector<std::uint64_t> stratum_counts(const kcip::TorusLattice& lat, int k, std::size_t cap) {
    std::vector<std::uint64_t> counts;
    for (int i = 1; i <= k; ++i) counts.push_back(kcip::count_omega_k(lat, i, cap));
    return counts;
}

Table run_project(const Params& prm, json& extra) {
    kcip::TorusLattice lat(prm.L, prm.d);
    double p = prm.density(lat);
    if (prm.k < 2) throw CLI::ValidationError("--k", "projection needs at least two strata");
    auto counts = stratum_counts(lat, prm.k, prm.enum_cap());
    auto proj = kcip::projected_kernel(counts, p, lat.num_vertices());
    Table t{{"i", "j", "ptilde", "mu_i"}, {}};
    int m = proj.size();
    for (int i = 1; i <= m; ++i)
        for (int j = std::max(1, i - 1); j <= std::min(m, i + 1); ++j)
            t.rows.push_back({std::int64_t{i}, std::int64_t{j}, proj.P(i - 1, j - 1),
                              proj.pi[i - 1]});
    json jc = json::array();
    for (auto c : counts) jc.push_back(c);
    extra["stratum_counts"] = jc;
    if (m >= 2) {
        extra["hit_formula_1_to_top"] = kcip::birth_death_hitting_time(proj, 0, m - 1);
        extra["hit_solve_1_to_top"] = kcip::hitting_time_linear_solve(proj.P, 0, m - 1);
    }
    return t;
}

Table run_decompose(const Params& prm, json& extra) {
    kcip::TorusLattice lat(prm.L, prm.d);
    double p = prm.density(lat);
    if (prm.k < 2) throw CLI::ValidationError("--k", "decomposition needs at least two strata");
    auto states = kcip::enumerate_kcip_space(lat, prm.enum_cap());
    auto K = kcip::build_kernel_matrix(lat, {kcip::ChainKind::Kcip, p}, states,
                                       kcip::Exec::Parallel, prm.eigen_cap());
    std::vector<int> subset;
    std::vector<int> stratum;
    for (int i = 0; i < states.size(); ++i) {
        int s = kcip::stratum_of(lat, states.config(i));
        if (s >= 1 && s <= prm.k) {
            subset.push_back(i);
            stratum.push_back(s);
        }
    }
    auto traced = kcip::trace_kernel_exact(K, subset);
    auto counts = stratum_counts(lat, prm.k, prm.enum_cap());
    auto rep = kcip::madras_randall_check(traced, stratum, counts, p, lat.num_vertices());
    Table t{{"quantity", "value"}, {}};
    t.rows.push_back({std::string("gap_full"), rep.gap_full});
    t.rows.push_back({std::string("gap_projected"), rep.gap_projected});
    for (std::size_t i = 0; i < rep.gap_restrictions.size(); ++i)
        t.rows.push_back({"gap_restriction_" + std::to_string(i + 1), rep.gap_restrictions[i]});
    t.rows.push_back({std::string("rhs"), rep.rhs});
    t.rows.push_back({std::string("margin"), rep.margin});
    t.rows.push_back({std::string("holds"), std::int64_t{rep.holds() ? 1 : 0}});
    extra["holds"] = rep.holds();
    return t;
}

Table run_drift(const Params& prm, json& extra) {
    kcip::TorusLattice lat(prm.L, prm.d);
    double p = prm.density(lat);
    if (prm.k < 1) throw CLI::ValidationError("--k", "drift needs the initial particle count");
    auto res = kcip::drift_estimate(lat, p, prm.k, prm.epsilon, prm.replicas, prm.seed);
    Table t{{"replica", "v1", "final_particles"}, {}};
    for (int r = 0; r < prm.replicas; ++r)
        t.rows.push_back({std::int64_t{r}, std::int64_t{prm.k}, std::int64_t{res.final_counts[r]}});
    extra["horizon"] = res.horizon;
    extra["mean_final"] = res.mean;
    extra["ci_halfwidth"] = res.ci_halfwidth;
    return t;
}

Table run_coalesce(const Params& prm, json& extra) {
    kcip::TorusLattice lat(prm.L, prm.d);
    if (prm.k < 2) throw CLI::ValidationError("--k", "coalescent needs at least two walkers");
    if (prm.horizon < 1) throw CLI::ValidationError("--horizon", "coalesce needs a horizon");
    double q = prm.q >= 0.0 ? prm.q : 1.0 / prm.k;
    auto cps = kcip::checkpoint_grid(prm.horizon, prm.gamma);
    auto prof =
        kcip::coalescent_occupancy_profile(lat, prm.k, q, prm.horizon, cps, prm.replicas, prm.seed);
    double n = lat.num_vertices();
    Table t{{"t", "mean_l", "ci_halfwidth", "c_fit"}, {}};
    for (const auto& pt : prof.points) {
        double cfit = pt.t > 1 ? pt.mean_l * (pt.t - 1) / (n * std::log(static_cast<double>(pt.t)))
                               : 0.0;
        t.rows.push_back({pt.t, pt.mean_l, pt.ci_halfwidth, cfit});
    }
    extra["q"] = q;
    return t;
}

Table run_mix(const Params& prm, json& extra) {
    kcip::TorusLattice lat(prm.L, prm.d);
    double p = prm.density(lat);
    if (prm.horizon < 1) throw CLI::ValidationError("--horizon", "mix needs a horizon");
    auto states = kcip::enumerate_kcip_space(lat, prm.enum_cap());
    auto K = kcip::build_kernel_matrix(lat, {kcip::ChainKind::Kcip, p}, states,
                                       kcip::Exec::Parallel, prm.eigen_cap());
    int start = states.index_of((std::uint64_t{1} << lat.num_vertices()) - 1);  // all ones
    auto cps = kcip::checkpoint_grid(prm.horizon, prm.gamma);
    auto curve = kcip::tv_mixing_curve_exact(K, start, cps);
    Table t{{"t", "tv"}, {}};
    for (auto [tt, tv] : curve) t.rows.push_back({tt, tv});
    try {
        extra["t_mix_quarter"] = kcip::tv_mixing_time_exact(K, start, 0.25, prm.horizon);
    } catch (const std::runtime_error&) {
        extra["t_mix_quarter"] = nullptr;  // censored at the horizon
    }
    return t;
}

Table run_flows(const Params& prm, json& extra) {
    kcip::TorusLattice lat(prm.L, prm.d);
    if (prm.k < 1) throw CLI::ValidationError("--k", "flows need the particle count");
    kcip::ZSampler how =
        lat.num_vertices() <= 64 ? kcip::ZSampler::Exact : kcip::ZSampler::Rejection;
    Table t{{"sample", "step", "sites"}, {}};
    std::int64_t empty_pairs = 0;
    for (int s = 0; s < prm.replicas; ++s) {
        kcip::Rng rng = kcip::Rng::for_replica(prm.seed, s);
        auto X = kcip::random_hardcore_configuration(lat, prm.k, rng).occupied_sites();
        auto Y = kcip::random_hardcore_configuration(lat, prm.k, rng).occupied_sites();
        try {
            auto path = kcip::bl_flow_sample(lat, X, Y, rng, how);
            for (std::size_t step = 0; step < path.size(); ++step)
                t.rows.push_back({std::int64_t{s}, static_cast<std::int64_t>(step),
                                  join_sites(path[step])});
        } catch (const std::domain_error&) {
            ++empty_pairs;  // Omega^{X,Y} empty for this draw; reported, not fatal
        }
    }
    extra["empty_omega_xy_pairs"] = empty_pairs;
    extra["sampler"] = how == kcip::ZSampler::Exact ? "exact" : "rejection";
    return t;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"constrained-Ising process lab: simulation and exact spectral analysis"};
    app.fallthrough();
    Params prm;

    app.add_option("--L", prm.L, "torus side length (>= 3)");
    app.add_option("--d", prm.d, "torus dimension");
    app.add_option("--c", prm.c, "density parameter via p = c/n");
    app.add_option("--p", prm.p, "particle density p directly");
    app.add_option("--k", prm.k, "particle count / stratum index (per subcommand)");
    app.add_option("--q", prm.q, "coalescent rate (default 1/k)");
    app.add_option("--horizon", prm.horizon, "number of steps");
    app.add_option("--replicas", prm.replicas, "independent replicas");
    app.add_option("--seed", prm.seed, "master seed (replica streams derive from it)");
    app.add_option("--out", prm.out, "output path (stdout when omitted)");
    app.add_option("--format", prm.format, "table format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--max-exact-states", prm.max_states,
                   "cap override for enumeration and dense kernels");
    app.add_option("--epsilon", prm.epsilon, "drift horizon factor: ceil(epsilon n^3) steps");
    app.add_option("--checkpoint-gamma", prm.gamma, "geometric checkpoint ratio");
    app.set_config("--config", "", "flat key=value file; flags override it");

    if (const char* env = std::getenv("KCIP_LAB_MAX_STATES")) {
        char* end = nullptr;
        unsigned long long v = std::strtoull(env, &end, 10);
        if (end && *end == '\0' && v > 0) prm.max_states = static_cast<std::size_t>(v);
        // the --max-exact-states flag, when given, overrides the environment
    }

    struct Command {
        Table (*fn)(const Params&, json&);
        const char* help;
    };
    std::map<std::string, Command> commands{
        {"simulate", {run_simulate, "run the constrained-Ising chain, record checkpoints"}},
        {"exact", {run_exact, "enumerate states, emit kernel diagnostics and stationary law"}},
        {"trace", {run_trace, "exact trace (induced) kernel on the low strata"}},
        {"project", {run_project, "projected overlap-union chain and its stationary law"}},
        {"decompose", {run_decompose, "decomposition gap bound from restrictions + projection"}},
        {"drift", {run_drift, "Monte Carlo particle-count drift at horizon ceil(eps*n^3)"}},
        {"coalesce", {run_coalesce, "coalescing random-walk occupancy profile"}},
        {"mix", {run_mix, "exact total-variation mixing curve from the all-ones start"}},
        {"flows", {run_flows, "sample through-Z exchange paths between hard-core pairs"}}};
    for (auto& [name, cmd] : commands) app.add_subcommand(name, cmd.help);
    app.require_subcommand(0, 1);

    std::size_t env_max = prm.max_states;
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    if (prm.max_states == 0 && env_max != 0) prm.max_states = env_max;

    auto subs = app.get_subcommands();
    if (subs.empty()) {
        std::cerr << "error: a subcommand is required (see --help)\n";
        return 2;
    }
    std::string sub = subs.front()->get_name();

    auto started = std::chrono::steady_clock::now();
    try {
        json extra;
        Table table = commands.at(sub).fn(prm, extra);
        std::string body = prm.format == "json" ? render_json(table) : render_csv(table);
        if (prm.out.empty()) {
            std::cout << body;
        } else {
            std::ofstream f(prm.out, std::ios::binary);
            if (!f) throw std::invalid_argument("cannot open output file: " + prm.out);
            f << body;
            f.close();

            double wall =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
            json manifest;
            manifest["tool"] = "kcip-lab";
            manifest["version"] = "1.0.0";
            manifest["git_hash"] = KCIP_GIT_HASH;
            manifest["subcommand"] = sub;
            json jp;
            jp["L"] = prm.L;
            jp["d"] = prm.d;
            if (!std::isnan(prm.c)) jp["c"] = prm.c;
            if (!std::isnan(prm.p)) jp["p"] = prm.p;
            jp["k"] = prm.k;
            if (prm.q >= 0.0) jp["q"] = prm.q;
            jp["horizon"] = prm.horizon;
            jp["replicas"] = prm.replicas;
            jp["seed"] = prm.seed;
            jp["format"] = prm.format;
            jp["epsilon"] = prm.epsilon;
            jp["checkpoint_gamma"] = prm.gamma;
            jp["max_exact_states"] = prm.max_states;
            manifest["parameters"] = jp;
            manifest["results"] = extra;
            manifest["output"] = {{"path", prm.out}, {"rows", table.rows.size()}};
            manifest["wall_time_seconds"] = wall;
            std::ofstream mf(prm.out + ".manifest.json", std::ios::binary);
            mf << manifest.dump(2) << "\n";
        }
        return 0;
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const kcip::CapExceeded& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}
