// qdyn: single-qubit open-dynamics simulator and analysis front-end.
//
// Verbs:
//   simulate   trajectory (and optionally speed) of one model
//   sweep      parameter sweep: initial speed, backflow, divisibility
//   nonmarkov  backflow measure and divisibility verdict for one model
//   table1     six-model reference summary (speeds, regions, monotonicity)
//
// Exit codes: 0 success, 1 computation or summary failure, 2 usage error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "qdyn/run.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string model;
    std::string param;
    std::string range;  // a:b:n
    double theta = -1.0;
    std::string out_dir;
    int jobs = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "JSON run configuration");
    cmd->add_option("--model", args.model,
                    "model selector (ohmic, polarization, jc, pauli_tanh, pauli_tan)");
    cmd->add_option("--param", args.param, "sweep parameter name");
    cmd->add_option("--range", args.range, "sweep range as min:max:points");
    cmd->add_option("--theta", args.theta, "initial-state polar angle");
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--jobs", args.jobs, "parallel sweep evaluations (QDYN_JOBS)");
}

qdyn::RunConfig load_config(const CommonArgs& args) {
    qdyn::RunConfig cfg;
    if (!args.config_path.empty()) {
        std::ifstream in(args.config_path);
        if (!in)
            throw qdyn::ParseError("cannot read config file", args.config_path);
        std::ostringstream buf;
        buf << in.rdbuf();
        cfg = qdyn::parse_config(buf.str());
    } else {
        cfg.model = qdyn::OhmicDephasing{};
    }
    if (!args.model.empty()) {
        const std::string text = "{\"model\":\"" + args.model + "\"}";
        cfg.model = qdyn::parse_config(text).model;
    }
    if (!args.param.empty() || !args.range.empty()) {
        qdyn::SweepSpec sweep = cfg.sweep.value_or(qdyn::SweepSpec{});
        if (!args.param.empty()) sweep.parameter = args.param;
        if (!args.range.empty()) {
            double lo = 0.0, hi = 0.0;
            int n = 0;
            char c1 = 0, c2 = 0;
            std::istringstream rs(args.range);
            if (!(rs >> lo >> c1 >> hi >> c2 >> n) || c1 != ':' || c2 != ':')
                throw qdyn::ParseError("expected min:max:points", "--range");
            sweep.lo = lo;
            sweep.hi = hi;
            sweep.points = n;
        }
        cfg.sweep = sweep;
    }
    if (args.theta >= 0.0) cfg.initial.theta = args.theta;
    if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
    if (args.jobs > 0) cfg.jobs = args.jobs;
    cfg.validate();
    return cfg;
}

int run_files(const qdyn::RunConfig& cfg) {
    const auto outputs = qdyn::run(cfg);
    std::cout << qdyn::units_note() << "\n";
    for (const auto& f : outputs.files) std::cout << "wrote " << f.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"single-qubit open-dynamics simulator"};
    app.require_subcommand(1);

    CommonArgs args;
    CLI::App* simulate = app.add_subcommand("simulate", "trajectory of one model");
    CLI::App* sweep = app.add_subcommand("sweep", "parameter sweep");
    CLI::App* nonmarkov =
        app.add_subcommand("nonmarkov", "backflow and divisibility analysis");
    CLI::App* table1 =
        app.add_subcommand("table1", "six-model reference summary");
    for (CLI::App* cmd : {simulate, sweep, nonmarkov, table1})
        add_common(cmd, args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (simulate->parsed()) {
            auto cfg = load_config(args);
            cfg.sweep.reset();
            return run_files(cfg);
        }
        if (sweep->parsed()) {
            auto cfg = load_config(args);
            if (!cfg.sweep)
                throw qdyn::ParseError("sweep needs a sweep block or --param/--range",
                                       "sweep");
            if (!cfg.analysis.any()) cfg.analysis = {false, true, true};
            return run_files(cfg);
        }
        if (nonmarkov->parsed()) {
            auto cfg = load_config(args);
            cfg.sweep.reset();
            cfg.analysis = {false, true, true};
            return run_files(cfg);
        }
        // table1
        qdyn::SummaryTolerances tol;
        if (!args.config_path.empty()) {
            const auto cfg = load_config(args);
            tol.fd_step = cfg.tol.fd_step;
            tol.blp_epsilon = cfg.tol.blp_epsilon;
            tol.cp_epsilon = cfg.tol.cp_epsilon;
        }
        const auto report = qdyn::build_summary_report(tol);
        std::cout << qdyn::summary_to_text(report);
        std::string out_dir = args.out_dir.empty() ? "." : args.out_dir;
        std::filesystem::create_directories(out_dir);
        const auto path = std::filesystem::path(out_dir) / "table1.json";
        std::ofstream out(path, std::ios::binary);
        out << qdyn::summary_to_json(report);
        std::cout << "wrote " << path.string() << "\n";
        return report.pass ? 0 : 1;
    } catch (const qdyn::ParseError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const qdyn::DomainError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const qdyn::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
