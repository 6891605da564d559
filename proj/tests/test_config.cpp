#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "qdyn/config.hpp"
#include "qdyn/run.hpp"

using namespace qdyn;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "qdyn_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string key_path(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const ParseError& e) {
        return e.key_path;
    }
    return "<no error>";
}

}  // namespace

TEST_CASE("minimal config fills documented defaults") {
    const auto cfg = parse_config(R"({"model":"ohmic","omega_c":1.0,"s":3.0})");
    CHECK(model_name(cfg.model) == "ohmic");
    CHECK(get_parameter(cfg.model, "s") == 3.0);
    CHECK(cfg.t_max == 10.0);
    CHECK(cfg.n_points == 2000);
    CHECK(cfg.initial.theta == doctest::Approx(1.5707963267948966));
    CHECK_FALSE(cfg.sweep.has_value());
    CHECK_FALSE(cfg.analysis.any());
    CHECK(cfg.tol.fd_step == 1e-4);
    CHECK(cfg.tol.ode_tol == 1e-9);
    CHECK(cfg.out_dir == ".");
}

TEST_CASE("config rejections carry key paths") {
    CHECK(key_path([] { parse_config("not json"); }) == "<document>");
    CHECK(key_path([] { parse_config(R"({"omega_c":1.0})"); }) == "model");
    CHECK(key_path([] { parse_config(R"({"model":"nope"})"); }) == "model");
    CHECK(key_path([] {
              parse_config(R"({"model":"ohmic","bogus":1})");
          }) == "bogus");
    CHECK(key_path([] {
              parse_config(R"({"model":"ohmic","xi":0.3})");
          }) == "xi");  // not an ohmic parameter
    CHECK(key_path([] {
              parse_config(R"({"model":"ohmic","sweep":{"parameter":"s","foo":2}})");
          }) == "sweep.foo");
    CHECK(key_path([] {
              parse_config(R"({"model":"ohmic","tolerances":{"fd_step":"x"}})");
          }) == "tolerances.fd_step");

    // Sweep parameter must belong to the selected model.
    CHECK_THROWS_AS(
        parse_config(R"({"model":"ohmic","sweep":{"parameter":"xi","min":0,"max":1}})"),
        Error);

    // Zero tolerances violate the config invariants.
    CHECK_THROWS_AS(
        parse_config(R"({"model":"ohmic","tolerances":{"fd_step":0.0}})"),
        Error);

    // Model invariants apply at parse time.
    CHECK_THROWS_AS(parse_config(R"({"model":"pauli_tanh","omega":2.0})"), Error);

    // Sweep endpoints must themselves be feasible parameter values.
    CHECK_THROWS_AS(
        parse_config(
            R"({"model":"pauli_tanh","sweep":{"parameter":"omega","min":0.1,"max":2.0}})"),
        Error);
}

TEST_CASE("distance pairs and sweep blocks parse") {
    const auto cfg = parse_config(R"({
        "model": "jc", "lambda": 1.0, "gamma_m": 5.0,
        "sweep": {"parameter": "gamma_m", "min": 0.6, "max": 5.0, "points": 8},
        "analysis": {"speed": false, "blp": true, "divisibility": true},
        "distance_pairs": [{"theta1": 0.0, "phi1": 0.0, "theta2": 3.14159, "phi2": 0.0}],
        "seed": 7, "jobs": 2
    })");
    REQUIRE(cfg.sweep.has_value());
    CHECK(cfg.sweep->parameter == "gamma_m");
    CHECK(cfg.sweep->points == 8);
    CHECK(cfg.analysis.blp);
    REQUIRE(cfg.distance_pairs.size() == 1);
    CHECK(cfg.seed == 7);
    CHECK(cfg.jobs == 2);
}

TEST_CASE("run writes only trajectory.csv when nothing else is asked") {
    const auto dir = fresh_dir("bare");
    auto cfg = parse_config(R"({"model":"pauli_tanh","lambda":1.0,"omega":0.5})");
    cfg.out_dir = dir.string();
    cfg.n_points = 64;
    const auto outputs = run(cfg);
    REQUIRE(outputs.files.size() == 1);
    CHECK(fs::exists(dir / "trajectory.csv"));
    CHECK_FALSE(fs::exists(dir / "speed.csv"));
    CHECK_FALSE(fs::exists(dir / "sweep.csv"));
    CHECK_FALSE(fs::exists(dir / "report.json"));

    const std::string csv = slurp(dir / "trajectory.csv");
    CHECK(csv.substr(0, 18) == "t,x,y,z,fidelity\n0");
    CHECK(csv.find("\r") == std::string::npos);
}

TEST_CASE("identical config and seed give byte-identical outputs") {
    auto cfg = parse_config(R"({
        "model": "ohmic", "omega_c": 1.0, "s": 3.0,
        "n_points": 48, "t_max": 6.0,
        "sweep": {"parameter": "s", "min": 2.1, "max": 4.0, "points": 6},
        "analysis": {"speed": true, "blp": true, "divisibility": true},
        "distance_pairs": [{"theta1": 1.5707963, "phi1": 0.0,
                            "theta2": 1.5707964, "phi2": 3.1415926}],
        "seed": 99
    })");
    const auto dir_a = fresh_dir("det_a");
    const auto dir_b = fresh_dir("det_b");
    cfg.out_dir = dir_a.string();
    cfg.jobs = 1;
    run(cfg);
    cfg.out_dir = dir_b.string();
    cfg.jobs = 2;  // parallelism must not change the bytes
    run(cfg);
    for (const char* name : {"trajectory.csv", "speed.csv", "sweep.csv", "report.json"})
        CHECK(slurp(dir_a / name) == slurp(dir_b / name));
}

TEST_CASE("sweep artifacts carry the documented physics") {
    // Ohmic s-sweep: v0^2 strictly increasing across the listed range. The
    // backflow amplitude collapses exponentially for larger s, so the probed
    // window stays below 3.5 to keep blp well above the assertion floor.
    auto cfg = parse_config(R"({
        "model": "ohmic", "omega_c": 1.0, "s": 3.0, "n_points": 32,
        "sweep": {"parameter": "s", "min": 2.1, "max": 3.5, "points": 10},
        "analysis": {"blp": true, "divisibility": true}
    })");
    const auto dir = fresh_dir("sweep_ohmic");
    cfg.out_dir = dir.string();
    cfg.jobs = 2;
    run(cfg);

    std::ifstream in(dir / "sweep.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "parameter,v0_squared,blp,indivisible");
    double prev_v = -1.0;
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double param, v0, blp;
        int indivisible;
        ls >> param >> v0 >> blp >> indivisible;
        CHECK(v0 > prev_v);
        prev_v = v0;
        CHECK(blp > 1e-4);        // whole range is in the backflow region
        CHECK(indivisible == 1);
        ++rows;
    }
    CHECK(rows == 10);

    // tanh-Pauli omega-sweep: no backflow, indivisible throughout.
    auto cfg2 = parse_config(R"({
        "model": "pauli_tanh", "lambda": 1.0, "omega": 0.5, "n_points": 32,
        "sweep": {"parameter": "omega", "min": 0.1, "max": 1.0, "points": 6},
        "analysis": {"blp": true, "divisibility": true}
    })");
    const auto dir2 = fresh_dir("sweep_tanh");
    cfg2.out_dir = dir2.string();
    run(cfg2);
    std::ifstream in2(dir2 / "sweep.csv");
    std::getline(in2, header);
    while (std::getline(in2, line)) {
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double param, v0, blp;
        int indivisible;
        ls >> param >> v0 >> blp >> indivisible;
        CHECK(blp <= 1e-8);
        CHECK(indivisible == 1);
    }

    const std::string report = slurp(dir2 / "report.json");
    CHECK(report.find("\"verdict\": \"strictly-decreasing\"") != std::string::npos);
}

TEST_CASE("reference summary checks have teeth") {
    // Default tolerances: every row passes except the damping row, whose
    // claimed lambda/2 divisibility boundary disagrees with the implemented
    // decoherence function (boundary at lambda; see the acceptance notes).
    const auto report = build_summary_report();
    REQUIRE(report.rows.size() == 6);
    for (const auto& row : report.rows) {
        if (row.model == "jc")
            CHECK_FALSE(row.pass);
        else
            CHECK(row.pass);
    }
    CHECK_FALSE(report.pass);

    // An impossible relative tolerance trips the stencil truncation floor:
    // the finite-difference checks cannot do better than ~1e-7.
    SummaryTolerances strangled;
    strangled.fd_rel_tol = 1e-9;
    const auto floor_report = build_summary_report(strangled);
    bool some_speed_check_failed = false;
    for (const auto& c : floor_report.rows[0].speed_checks)
        some_speed_check_failed = some_speed_check_failed || !c.pass;
    CHECK(some_speed_check_failed);
}

TEST_CASE("numbers serialize with 17 significant digits") {
    const auto dir = fresh_dir("digits");
    auto cfg = parse_config(R"({"model":"jc","lambda":1.0,"gamma_m":0.3})");
    cfg.out_dir = dir.string();
    cfg.n_points = 8;
    cfg.t_max = 1.0;
    run(cfg);
    const std::string csv = slurp(dir / "trajectory.csv");
    // A value like 0.xxxxxxxxxxxxxxxxx must survive with full precision.
    CHECK(csv.find("0.99") != std::string::npos);
    std::istringstream ss(csv);
    std::string header, first, second;
    std::getline(ss, header);
    std::getline(ss, first);
    std::getline(ss, second);
    // Parse back and re-serialize: values round-trip exactly.
    std::replace(second.begin(), second.end(), ',', ' ');
    std::istringstream ls(second);
    double t, x, y, z, f;
    ls >> t >> x >> y >> z >> f;
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    CHECK(second.find(buf) != std::string::npos);
}

#ifdef QDYN_CLI_PATH
TEST_CASE("command-line interface exit codes") {
    const std::string cli = QDYN_CLI_PATH;
    const auto dir = fresh_dir("cli");
    const auto cfg_path = dir / "cfg.json";
    std::ofstream(cfg_path) << R"({"model":"pauli_tan","lambda":1.0,"omega":0.5})";

    auto run_cli = [&](const std::string& args) {
        const std::string cmd = cli + " " + args + " >" + (dir / "out.log").string() +
                                " 2>" + (dir / "err.log").string();
        const int status = std::system(cmd.c_str());
        return WEXITSTATUS(status);
    };

    CHECK(run_cli("simulate --config " + cfg_path.string() + " --out " +
                  (dir / "sim").string()) == 0);
    CHECK(fs::exists(dir / "sim" / "trajectory.csv"));

    // Usage and config errors exit with 2.
    CHECK(run_cli("bogusverb") == 2);
    CHECK(run_cli("simulate --config " + (dir / "missing.json").string()) == 2);
    std::ofstream(dir / "bad.json") << R"({"model":"ohmic","bogus":3})";
    CHECK(run_cli("simulate --config " + (dir / "bad.json").string()) == 2);
    CHECK(run_cli("sweep --config " + cfg_path.string()) == 2);  // no sweep block

    // Sweep via overrides.
    CHECK(run_cli("sweep --config " + cfg_path.string() +
                  " --param omega --range 0.5:2.5:5 --theta 1.5707963 --out " +
                  (dir / "sw").string()) == 0);
    CHECK(fs::exists(dir / "sw" / "sweep.csv"));
}
#endif
