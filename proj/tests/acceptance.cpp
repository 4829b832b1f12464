// Runs every suite from an acceptance config and prints one PASS/FAIL line
// per numbered criterion, read back from the written report.json files.
#include "heislab/runner.hpp"

#if __has_include(<CLI11.hpp>)
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif

#include <filesystem>
#include <iostream>
#include <map>

using namespace heislab;

int main(int argc, char** argv) {
    CLI::App app{"heislab acceptance run"};
    std::string config_path;
    std::string out;
    app.add_option("--config", config_path, "acceptance config")->required()->check(CLI::ExistingFile);
    app.add_option("--out", out, "output directory")->required();
    CLI11_PARSE(app, argc, argv);

    RunConfig config;
    try {
        config = RunConfig::from_json(read_json_file(config_path));
    } catch (const std::exception& e) {
        std::cerr << "acceptance: " << e.what() << '\n';
        return exit_code::usage_error;
    }
    config.suite = "all";
    config.output_dir = out;
    std::filesystem::remove_all(config.output_dir);

    const int rc = run_suite(config, std::cerr);
    if (rc == exit_code::usage_error || rc == exit_code::runtime_error) return rc;

    std::map<int, ThresholdCheck> by_criterion;
    for (const auto& suite : suite_names()) {
        const Json rep = read_json_file(config.output_dir / suite / "report.json");
        for (const auto& c : rep.at("summary").at("checks")) {
            const int crit = c.at("criterion").get<int>();
            if (crit == 0) continue;
            ThresholdCheck t;
            t.key = c.at("key").get<std::string>();
            t.criterion = crit;
            t.value = c.at("value").get<double>();
            t.pass = c.at("pass").get<bool>();
            by_criterion[crit] = t;
        }
    }

    constexpr int kCriteria = 11;
    int failed = 0;
    for (int k = 1; k <= kCriteria; ++k) {
        const auto it = by_criterion.find(k);
        if (it == by_criterion.end()) {
            std::cout << "FAIL criterion " << k << ": no check reported\n";
            ++failed;
            continue;
        }
        const ThresholdCheck& c = it->second;
        std::cout << (c.pass ? "PASS" : "FAIL") << " criterion " << k << ": " << c.key
                  << " value=" << format_double(c.value) << '\n';
        failed += c.pass ? 0 : 1;
    }
    std::cout << (kCriteria - failed) << "/" << kCriteria << " criteria passed\n";
    return failed == 0 ? 0 : 1;
}
