#include "heislab/runner.hpp"

#if __has_include(<CLI11.hpp>)
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif

#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

struct Overrides {
    std::string config_path;
    std::optional<std::string> suite;
    std::optional<int> grid;
    std::optional<int> hermite_K;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    bool parallel = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config_path, "JSON config file")->check(CLI::ExistingFile);
    cmd->add_option("--suite", o.suite, "hermite, doi, plancherel, grid, bound, trace, product or all");
    cmd->add_option("--grid", o.grid, "nodes per axis of the base grid");
    cmd->add_option("--hermite-K", o.hermite_K, "Hermite cutoff");
    cmd->add_option("--seed", o.seed, "seed for random test matrices");
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_flag("--parallel", o.parallel, "run experiment rows concurrently");
}

heislab::RunConfig load(const Overrides& o) {
    heislab::Json j = heislab::Json::object();
    if (!o.config_path.empty()) {
        try {
            j = heislab::read_json_file(o.config_path);
        } catch (const std::exception& e) {
            throw heislab::UsageError(e.what());
        }
    }
    if (o.suite) j["suite"] = *o.suite;
    if (o.grid) {
        heislab::Json& g = j["grid"];
        if (!g.is_object()) g = heislab::Json::object();
        g.erase("N");
        g["Nx"] = g["Ny"] = g["Nt"] = *o.grid;
    }
    if (o.hermite_K) j["hermite"]["K"] = *o.hermite_K;
    if (o.seed) j["seed"] = *o.seed;
    if (o.out) j["output_dir"] = *o.out;
    if (o.parallel) j["parallel"] = true;
    return heislab::RunConfig::from_json(j);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical laboratory for Riesz transform commutators on the Heisenberg group"};
    app.require_subcommand(1);

    Overrides run_opts;
    auto* run = app.add_subcommand("run", "run one suite or all of them");
    add_common(run, run_opts);

    Overrides sweep_opts;
    std::string axis;
    std::vector<double> values;
    auto* sw = app.add_subcommand("sweep", "rerun a suite along one refinement axis");
    add_common(sw, sweep_opts);
    sw->add_option("--axis", axis, "grid_size, hermite_K or quadrature_nodes")->required();
    sw->add_option("--values", values, "comma-separated axis values")->delimiter(',')->required();

    std::string report_dir = "lab-out";
    auto* rep = app.add_subcommand("report", "merge the run log into summary.json");
    rep->add_option("--out", report_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? heislab::exit_code::ok : heislab::exit_code::usage_error;
    }

    try {
        if (*run) return heislab::run_suite(load(run_opts), std::cout);
        if (*sw) return heislab::run_sweep(load(sweep_opts), heislab::parse_axis(axis), values, std::cout);
        return heislab::report(report_dir, std::cout);
    } catch (const heislab::UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return heislab::exit_code::usage_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return heislab::exit_code::runtime_error;
    }
}
