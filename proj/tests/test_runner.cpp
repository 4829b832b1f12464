#include "heislab/runner.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace heislab;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("heislab_runner_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunConfig config_for(const std::string& suite, const fs::path& out) {
    RunConfig c = RunConfig::from_json(Json{{"suite", suite}, {"grid", {{"N", 7}}}});
    c.output_dir = out;
    return c;
}

Json entry(const std::string& suite, const std::string& digest, const std::string& ts, bool passed) {
    return Json{{"suite", suite}, {"digest", digest}, {"timestamp", ts}, {"passed", passed}};
}

}  // namespace

// ---------------------------------------------------------------- config

TEST(RunConfig, DefaultsAndShortcuts) {
    const RunConfig c = RunConfig::from_json(Json::object());
    EXPECT_EQ(c.suite, "all");
    EXPECT_EQ(c.grid.Nx, 13);
    EXPECT_FALSE(c.refine.has_value());
    EXPECT_EQ(c.thresholds, default_thresholds());
    EXPECT_NO_THROW(c.validate());

    const RunConfig r = RunConfig::from_json(
        Json::parse(R"({"grid": {"N": 9, "L": 1.5, "Lt": 0.5}, "refine": {"grid": {"N": 11}}, "hermite": {"K": 4}})"));
    EXPECT_EQ(r.grid.Nx, 9);
    EXPECT_EQ(r.grid.Nt, 9);
    EXPECT_EQ(r.grid.Lx, 1.5);
    ASSERT_TRUE(r.refine.has_value());
    EXPECT_EQ(r.refine->grid.Nx, 11);
    EXPECT_EQ(r.refine->grid.Lx, 1.5);
    EXPECT_EQ(r.refine->grid.Lt, 0.5);
    EXPECT_EQ(r.hermite_K, 4);
}

TEST(RunConfig, ThresholdMerge) {
    const RunConfig c = RunConfig::from_json(Json::parse(R"({"thresholds": {"bound.ratio_spread": {"max_spread": 3}}})"));
    EXPECT_EQ(c.thresholds["bound.ratio_spread"]["max_spread"], 3);
    EXPECT_EQ(c.thresholds["trace.ratio_cov"], default_thresholds()["trace.ratio_cov"]);
    EXPECT_THROW(RunConfig::from_json(Json::parse(R"({"thresholds": {"nope": {}}})")), UsageError);
    // Erasing a needed threshold is caught by validation.
    const RunConfig erased = RunConfig::from_json(Json::parse(R"({"thresholds": {"hermite.exactness": null}})"));
    EXPECT_THROW(erased.validate(), UsageError);
    RunConfig other = erased;
    other.suite = "doi";
    EXPECT_NO_THROW(other.validate());
}

TEST(RunConfig, RejectsBadInput) {
    EXPECT_THROW(RunConfig::from_json(Json::array()), UsageError);
    EXPECT_THROW(RunConfig::from_json(Json{{"grid", {{"N", "big"}}}}), UsageError);
    EXPECT_THROW(RunConfig::from_json(Json{{"suite", "nope"}}).validate(), UsageError);
    EXPECT_THROW(RunConfig::from_json(Json{{"family", "nope"}}).validate(), UsageError);
    EXPECT_THROW(RunConfig::from_json(Json{{"riesz_index", 3}}).validate(), UsageError);
    EXPECT_THROW(RunConfig::from_json(Json{{"grid", {{"N", 31}}}}).validate(), UsageError);
    EXPECT_THROW(RunConfig::from_json(Json{{"hermite", {{"K", 0}}}}).validate(), UsageError);
}

TEST(RunConfig, DigestTracksResultsOnly) {
    RunConfig a = RunConfig::from_json(Json::object());
    RunConfig b = a;
    b.output_dir = "elsewhere";
    b.parallel = true;
    b.suite = "grid";
    EXPECT_EQ(a.digest(), b.digest());
    b.seed = 7;
    EXPECT_NE(a.digest(), b.digest());
    EXPECT_EQ(RunConfig::from_json(a.to_json()).digest(), a.digest());
}

TEST(Sweep, ParseAxis) {
    EXPECT_EQ(parse_axis("grid_size"), SweepAxis::grid_size);
    EXPECT_EQ(parse_axis("hermite_K"), SweepAxis::hermite_K);
    EXPECT_EQ(parse_axis("quadrature_nodes"), SweepAxis::quadrature_nodes);
    EXPECT_THROW(parse_axis("seed"), UsageError);
}

// ---------------------------------------------------------------- runs

TEST(RunSuite, HermitePassesAndWritesArtifacts) {
    const fs::path out = fresh_dir("hermite");
    std::ostringstream log;
    EXPECT_EQ(run_suite(config_for("hermite", out), log), exit_code::ok) << log.str();
    EXPECT_NE(log.str().find("PASS hermite.exactness"), std::string::npos);
    const Json rep = Json::parse(slurp(out / "hermite" / "report.json"));
    EXPECT_EQ(rep["suite"], "hermite");
    EXPECT_TRUE(rep["summary"]["passed"].get<bool>());
    EXPECT_TRUE(rep["summary"]["metrics"].contains("sweep_metric"));
    const std::string first = slurp(out / "hermite" / "report.json");
    EXPECT_EQ(run_suite(config_for("hermite", out), log), exit_code::ok);
    EXPECT_EQ(slurp(out / "hermite" / "report.json"), first);

    std::ifstream runs(out / "runs.jsonl");
    std::string line;
    int n = 0;
    while (std::getline(runs, line)) {
        const Json e = Json::parse(line);
        EXPECT_EQ(e["suite"], "hermite");
        EXPECT_EQ(e["timestamp"].get<std::string>().size(), 24u);  // YYYY-MM-DDTHH:MM:SS.mmmZ
        ++n;
    }
    EXPECT_EQ(n, 2);
    fs::remove_all(out);
}

TEST(RunSuite, ThresholdFailureExitsOne) {
    const fs::path out = fresh_dir("fail");
    RunConfig c = config_for("hermite", out);
    c.thresholds["hermite.exactness"]["max_error"] = -1.0;
    std::ostringstream log;
    EXPECT_EQ(run_suite(c, log), exit_code::threshold_failure);
    EXPECT_NE(log.str().find("FAIL hermite.exactness"), std::string::npos);
    fs::remove_all(out);
}

TEST(RunSuite, UsageErrorsExitTwo) {
    const fs::path out = fresh_dir("usage");
    std::ostringstream log;
    RunConfig c = config_for("bound", out);
    c.family = "constant";
    EXPECT_EQ(run_suite(c, log), exit_code::usage_error);
    EXPECT_NE(log.str().find("no nonconstant member"), std::string::npos);
    c = config_for("nope", out);
    EXPECT_EQ(run_suite(c, log), exit_code::usage_error);
    EXPECT_FALSE(fs::exists(out / "runs.jsonl"));
    fs::remove_all(out);
}

TEST(RunSweep, EmptyAndInapplicable) {
    const fs::path out = fresh_dir("sweep_usage");
    std::ostringstream log;
    EXPECT_EQ(run_sweep(config_for("doi", out), SweepAxis::hermite_K, {}, log), exit_code::usage_error);
    EXPECT_EQ(run_sweep(config_for("doi", out), SweepAxis::grid_size, {7}, log), exit_code::usage_error);
    EXPECT_EQ(run_sweep(config_for("all", out), SweepAxis::hermite_K, {4}, log), exit_code::usage_error);
    EXPECT_EQ(run_sweep(config_for("doi", out), SweepAxis::hermite_K, {2.5}, log), exit_code::usage_error);
    fs::remove_all(out);
}

TEST(RunSweep, DoiOverHermiteK) {
    const fs::path out = fresh_dir("sweep_doi");
    std::ostringstream log;
    EXPECT_EQ(run_sweep(config_for("doi", out), SweepAxis::hermite_K, {4, 6}, log), exit_code::ok) << log.str();
    const Json j = Json::parse(slurp(out / "sweep" / "doi_hermite_K.json"));
    ASSERT_EQ(j["sweep"].size(), 2u);
    EXPECT_EQ(j["sweep"][0]["value"], 4.0);
    EXPECT_EQ(j["sweep"][0]["delta"], 0.0);
    const std::string csv = slurp(out / "sweep" / "doi_hermite_K.csv");
    EXPECT_EQ(csv.substr(0, csv.find("\r\n")), "value,metric,delta,passed");
    fs::remove_all(out);
}

// ---------------------------------------------------------------- report

TEST(MergeRuns, LatestWinsHistoryKept) {
    const Json m = merge_runs({entry("grid", "d1", "2026-01-01T00:00:00.000Z", false),
                               entry("grid", "d1", "2026-01-02T00:00:00.000Z", true),
                               entry("grid", "d1", "2025-12-31T00:00:00.000Z", false),
                               entry("grid", "d2", "2026-01-01T00:00:00.000Z", false)});
    ASSERT_EQ(m["runs"].size(), 2u);
    const Json& d1 = m["runs"][0];
    EXPECT_EQ(d1["digest"], "d1");
    EXPECT_TRUE(d1["latest"]["passed"].get<bool>());
    EXPECT_EQ(d1["history"].size(), 3u);
    EXPECT_EQ(m["runs"][1]["history"].size(), 1u);
    EXPECT_THROW(merge_runs({}), UsageError);
}

TEST(MergeRuns, TiesGoToLaterEntry) {
    const Json m = merge_runs({entry("doi", "d", "2026-01-01T00:00:00.000Z", false),
                               entry("doi", "d", "2026-01-01T00:00:00.000Z", true)});
    EXPECT_TRUE(m["runs"][0]["latest"]["passed"].get<bool>());
}

TEST(Report, EmptyDirectoryIsUsageError) {
    const fs::path out = fresh_dir("report_empty");
    fs::create_directories(out);
    std::ostringstream log;
    EXPECT_EQ(report(out, log), exit_code::usage_error);
    fs::remove_all(out);
}

TEST(Report, SummarizesRunLog) {
    const fs::path out = fresh_dir("report");
    std::ostringstream log;
    ASSERT_EQ(run_suite(config_for("hermite", out), log), exit_code::ok);
    EXPECT_EQ(report(out, log), exit_code::ok);
    const Json s = Json::parse(slurp(out / "summary.json"));
    ASSERT_EQ(s["runs"].size(), 1u);
    EXPECT_EQ(s["runs"][0]["suite"], "hermite");
    fs::remove_all(out);
}
