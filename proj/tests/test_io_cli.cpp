#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "kcip/io.hpp"

using namespace kcip;
using nlohmann::json;
namespace fs = std::filesystem;

TEST_CASE("format_double: shortest round-trip rendering") {
    CHECK(format_double(0.25) == "0.25");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(0.0) == "0");
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
    for (double v : {1.0 / 3.0, 1e300, 6.626e-34, -17.125, 0.06666666666666667}) {
        CHECK(std::stod(format_double(v)) == v);
    }
}

TEST_CASE("CsvTable renders exact bytes and validates row width") {
    CsvTable t({"a", "b", "c"});
    t.add_row({std::int64_t{1}, 0.5, std::string("x")});
    t.add_row({std::int64_t{-3}, 2.0, std::string("y;z")});
    CHECK(t.body() == "a,b,c\n1,0.5,x\n-3,2,y;z\n");
    CHECK(t.rows() == 2);
    CHECK_THROWS_AS(t.add_row({std::int64_t{1}}), std::invalid_argument);

    fs::path p = fs::temp_directory_path() / "kcip_csv_unit_test.csv";
    t.write(p.string());
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    CHECK(ss.str() == t.body());
    fs::remove(p);

    CHECK_THROWS_AS(t.write("/nonexistent-dir/impossible/x.csv"), std::runtime_error);
}

// ---- CLI end-to-end (subprocess) ---------------------------------------

namespace {

fs::path work_dir() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "kcip-cli-tests";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

struct CliResult {
    int code = -1;
    std::string out;
};

CliResult run_cli(const std::string& args, const std::string& env = "") {
    static int counter = 0;
    fs::path capture = work_dir() / ("stdout_" + std::to_string(counter++) + ".txt");
    std::string cmd;
    if (!env.empty()) cmd += env + " ";
    cmd += "'" + std::string(KCIP_CLI) + "'";
    if (!args.empty()) cmd += " " + args;
    cmd += " >'" + capture.string() + "' 2>/dev/null";
    int rc = std::system(cmd.c_str());
    CliResult res;
    res.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    res.out = slurp(capture);
    return res;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& body) {
    std::vector<std::vector<std::string>> rows;
    std::stringstream ss(body);
    std::string line;
    while (std::getline(ss, line)) {
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

}  // namespace

TEST_CASE("cli: projected kernel output carries the 1/15 entry") {
    CliResult r = run_cli("project --L 3 --d 2 --c 1 --k 3");
    REQUIRE(r.code == 0);
    auto rows = parse_csv(r.out);
    // three strata overlap into two unions, so the projected chain has two
    // states: header + full 2x2 block
    REQUIRE(rows.size() == 5);
    CHECK(rows[0] == std::vector<std::string>{"i", "j", "ptilde", "mu_i"});
    bool found = false;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        REQUIRE(rows[i].size() == 4);
        if (rows[i][0] == "1" && rows[i][1] == "2") {
            CHECK(std::stod(rows[i][2]) == doctest::Approx(1.0 / 15.0).epsilon(1e-12));
            found = true;
        }
    }
    CHECK(found);
}

TEST_CASE("cli: configuration errors exit with code 2") {
    CHECK(run_cli("exact --L 3 --d 2 --c 1 --nope").code == 2);       // unknown flag
    CHECK(run_cli("").code == 2);                                     // no subcommand
    CHECK(run_cli("exact --L 3 --d 2 --c 1 --p 0.1").code == 2);      // both densities
    CHECK(run_cli("exact --L 3 --d 2").code == 2);                    // neither density
    CHECK(run_cli("exact --L 3 --d 2 --c 1 --out /nonexistent-dir/x.csv").code == 2);
    CHECK(run_cli("exact --L 2 --d 2 --c 1").code == 2);              // side too small
}

TEST_CASE("cli: state caps exit with code 3 and the flag overrides the environment") {
    CHECK(run_cli("exact --L 3 --d 2 --c 1", "KCIP_LAB_MAX_STATES=100").code == 3);
    CHECK(run_cli("exact --L 3 --d 2 --c 1 --max-exact-states 1024",
                  "KCIP_LAB_MAX_STATES=100").code == 0);
    CHECK(run_cli("exact --L 3 --d 2 --c 1 --max-exact-states 100").code == 3);
    CHECK(run_cli("exact --L 3 --d 2 --c 1", "KCIP_LAB_MAX_STATES=1024").code == 0);
}

TEST_CASE("cli: reruns are byte-identical and file output equals stdout output") {
    fs::path a = work_dir() / "rerun_a.csv";
    fs::path b = work_dir() / "rerun_b.csv";
    std::string args = "simulate --L 4 --d 2 --c 1 --k 2 --horizon 200 --replicas 4 --seed 9";
    REQUIRE(run_cli(args + " --out '" + a.string() + "'").code == 0);
    REQUIRE(run_cli(args + " --out '" + b.string() + "'").code == 0);
    std::string body = slurp(a);
    REQUIRE_FALSE(body.empty());
    CHECK(body == slurp(b));

    CliResult direct = run_cli(args);
    REQUIRE(direct.code == 0);
    CHECK(direct.out == body);
}

TEST_CASE("cli: run manifest records tool, parameters and results") {
    fs::path out = work_dir() / "exact_run.csv";
    REQUIRE(run_cli("exact --L 3 --d 2 --c 1 --out '" + out.string() + "'").code == 0);
    fs::path mp = out;
    mp += ".manifest.json";
    REQUIRE(fs::exists(mp));
    json m = json::parse(slurp(mp));
    CHECK(m.at("tool") == "kcip-lab");
    CHECK(m.at("subcommand") == "exact");
    CHECK(m.at("version").is_string());
    CHECK(m.at("git_hash").is_string());
    CHECK(m.at("parameters").at("L") == 3);
    CHECK(m.at("parameters").at("d") == 2);
    CHECK(m.at("parameters").at("c") == doctest::Approx(1.0));
    CHECK(m.at("results").at("states") == 511);
    CHECK(m.at("results").at("spectral_gap").get<double>() > 0.0);
    CHECK(m.at("results").at("detailed_balance_defect").get<double>() < 1e-12);
    CHECK(m.at("output").at("rows") == 511);
    CHECK(m.at("wall_time_seconds").get<double>() >= 0.0);
}

TEST_CASE("cli: json format emits a parseable array with a normalised law") {
    CliResult r = run_cli("exact --L 3 --d 2 --c 1 --format json");
    REQUIRE(r.code == 0);
    json arr = json::parse(r.out);
    REQUIRE(arr.is_array());
    REQUIRE(arr.size() == 511);
    double total = 0.0;
    for (const auto& row : arr) {
        REQUIRE(row.contains("state"));
        REQUIRE(row.contains("mask"));
        REQUIRE(row.contains("particles"));
        REQUIRE(row.contains("stationary"));
        total += row.at("stationary").get<double>();
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("cli: config files stand in for flags and flags win on conflict") {
    fs::path cfg = work_dir() / "run.cfg";
    {
        std::ofstream f(cfg);
        f << "# projected-kernel run\n"
          << "L=3\n"
          << "d=2\n"
          << "c=1.0\n"
          << "k=3\n";
    }
    CliResult via_cfg = run_cli("project --config '" + cfg.string() + "'");
    CliResult via_flags = run_cli("project --L 3 --d 2 --c 1 --k 3");
    REQUIRE(via_cfg.code == 0);
    REQUIRE(via_flags.code == 0);
    CHECK(via_cfg.out == via_flags.out);

    fs::path cfg2 = work_dir() / "run2.cfg";
    {
        std::ofstream f(cfg2);
        f << "L=3\nd=2\nc=1.0\nk=2\n";
    }
    CliResult overridden = run_cli("project --config '" + cfg2.string() + "' --k 3");
    REQUIRE(overridden.code == 0);
    CHECK(overridden.out == via_flags.out);
}
