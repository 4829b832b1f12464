#pragma once

#include "heislab/experiments.hpp"
#include "heislab/grid.hpp"
#include "heislab/io.hpp"
#include "heislab/plancherel.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace heislab {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int threshold_failure = 1;
inline constexpr int usage_error = 2;
inline constexpr int runtime_error = 3;
}  // namespace exit_code

// Raised for configuration problems; maps to exit_code::usage_error.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

const std::vector<std::string>& suite_names();  // without "all"

struct Refinement {
    GridSpec grid;
    int hermite_K = 8;
};

struct RunConfig {
    std::string suite = "all";
    GridSpec grid;
    std::optional<Refinement> refine;
    int hermite_n = 1;
    int hermite_K = 6;
    QuadratureSpec quadrature;
    std::string family = "bumps5";
    std::string trace_family = "bumps3";
    int riesz_index = 1;
    Json thresholds = Json::object();
    std::uint64_t seed = 42;
    std::filesystem::path output_dir = "lab-out";
    bool parallel = false;
    bool dump_operators = false;  // writes R_l of the base grid as a binary dump

    // Missing keys take defaults; thresholds are merged over the defaults.
    static RunConfig from_json(const Json& j);
    Json to_json() const;
    // Digest of everything that affects results (not output_dir or parallel).
    std::string digest() const;
    void validate() const;
};

Json default_thresholds();

// One acceptance number per key; criterion is 0 for keys outside the list.
struct ThresholdCheck {
    std::string key;
    int criterion = 0;
    double value = 0.0;
    bool pass = false;
    Json detail = Json::object();
};

struct SuiteResult {
    std::string suite;
    Json metrics = Json::object();
    std::vector<ThresholdCheck> checks;
    std::vector<ExperimentReport> reports;
    double seconds = 0.0;  // wall time, kept out of artifacts

    bool passed() const;
    Json to_json(const RunConfig& config) const;
};

// Runs one named suite (not "all") and evaluates its thresholds. Each suite
// sets metrics["sweep_metric"].
SuiteResult execute_suite(const RunConfig& config, const std::string& suite);
std::vector<SuiteResult> execute(const RunConfig& config);

// Executes, writes artifacts under config.output_dir, appends to the run log.
int run_suite(const RunConfig& config, std::ostream& log);

enum class SweepAxis { grid_size, hermite_K, quadrature_nodes };
SweepAxis parse_axis(const std::string& name);

struct SweepRow {
    double value = 0.0;
    double metric = 0.0;
    double delta = 0.0;  // metric minus previous metric; 0 for the first row
    bool passed = false;
};

// Runs the suite once per value (no refinement) and tracks metrics["sweep_metric"].
std::vector<SweepRow> sweep(const RunConfig& config, SweepAxis axis, const std::vector<double>& values,
                            std::ostream& log);
int run_sweep(const RunConfig& config, SweepAxis axis, const std::vector<double>& values, std::ostream& log);

// Merges the run log of output_dir into summary.json; latest entry per
// (suite, digest) wins and every entry stays in that key's history.
Json merge_runs(const std::vector<Json>& entries);
int report(const std::filesystem::path& output_dir, std::ostream& log);

}  // namespace heislab
