#include "heislab/experiments.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace heislab;

namespace {

ExperimentRow row(std::string id, double ratio, bool excluded = false) {
    ExperimentRow r;
    r.id = std::move(id);
    r.ratio = ratio;
    r.excluded = excluded;
    return r;
}

const GridSpec& small_grid() {
    static const GridSpec s = GridSpec::cube(11);
    return s;
}

}  // namespace

TEST(Summarize, StatisticsSkipExcludedRows) {
    const ExperimentSummary s = summarize({row("a", 1.0), row("b", 2.0), row("c", 4.0), row("z", 100.0, true)});
    EXPECT_EQ(s.rows_used, 3u);
    EXPECT_EQ(s.spread, 4.0);
    const double mean = 7.0 / 3.0;
    EXPECT_DOUBLE_EQ(s.mean_ratio, mean);
    EXPECT_DOUBLE_EQ(s.relative_spread, 3.0 / mean);
    const double var = ((1 - mean) * (1 - mean) + (2 - mean) * (2 - mean) + (4 - mean) * (4 - mean)) / 3.0;
    EXPECT_DOUBLE_EQ(s.cov, std::sqrt(var) / mean);
    EXPECT_EQ(summarize({row("z", 1.0, true)}).rows_used, 0u);
}

TEST(Report, CsvAndJsonShape) {
    ExperimentReport r;
    r.name = "bound";
    r.rows = {row("g", 0.5), row("one", 0.0, true)};
    r.recompute_summary();
    std::ostringstream os;
    r.write_csv(os);
    EXPECT_EQ(os.str().substr(0, os.str().find("\r\n")), "experiment,id,lhs,rhs,ratio,excluded");
    const Json j = r.to_json();
    EXPECT_TRUE(j["rows"][1]["ratio"].is_null());
    EXPECT_EQ(j["rows"][0]["ratio"], 0.5);
}

TEST(DecayFitRange, ResolvedModeCount) {
    const std::size_t resolved = static_cast<std::size_t>(std::lround(std::pow(6.5, kResolvedModeExponent)));
    EXPECT_EQ(resolved, 67u);
    const IndexRange r = decay_fit_range(GridSpec::cube(13), 2197);
    const IndexRange m = middle_decade(67, 2197);
    EXPECT_EQ(r.lo, m.lo);
    EXPECT_EQ(r.hi, m.hi);
}

TEST(Dixmier, FromPowerLawSpectrum) {
    // mu_k = k^{-1/4}: the fourth powers are harmonic.
    std::vector<double> v(4000);
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = std::pow(k + 1.0, -0.25);
    const DixmierValue d = dixmier_from_spectrum(SingularSpectrum(v), 1);
    std::vector<double> h(4000);
    for (std::size_t k = 0; k < h.size(); ++k) h[k] = 1.0 / (k + 1.0);
    EXPECT_NEAR(d.value, dixmier_approximant(SingularSpectrum(h), 4000), 1e-12);
    EXPECT_EQ(d.window, 4000u);
    EXPECT_LE(d.band_lo, d.value);
    EXPECT_GE(d.band_hi, d.value);
    EXPECT_LT(d.relative_band(), 0.1);
    EXPECT_THROW(dixmier_from_spectrum(SingularSpectrum(std::vector<double>(10, 1.0)), 1), std::invalid_argument);
}

TEST(YFibers, ShapeAndIndependence) {
    const auto b = enumerate_basis(1, 6);
    for (int l : {1, 2}) {
        const YSymbolSet y = build_y_fibers(b, l);
        ASSERT_EQ(y.y.size(), 3u);
        const CMatrix h = oscillator_power(*b, -0.5);
        EXPECT_LT((y.y[0].minus - h).norm(), 1e-14);
        EXPECT_LT((y.y[0].plus - h).norm(), 1e-14);
        const GramReport g = gram_min_eigenvalue(y);
        EXPECT_TRUE(g.independent);
        EXPECT_GT(g.min_eigenvalue, 1e-6);
        EXPECT_GT(g.coercivity, 0.0);
        EXPECT_LT((g.gram - g.gram.adjoint()).norm(), 1e-12);
    }
}

TEST(YFibers, DependentSetHasZeroGramEigenvalue) {
    const auto b = enumerate_basis(1, 4);
    const FiberOperator y0 = product_fiber_operator(b, "y0");
    const GramReport g = gram_min_eigenvalue({y0, 2.0 * y0}, 200);
    EXPECT_FALSE(g.independent);
    EXPECT_LT(std::abs(g.min_eigenvalue), 1e-12);
}

TEST(Bochner, XSetAgreesAndScalesQuartically) {
    const auto m = grid_model(small_grid());
    const auto fam = sample_family(small_grid(), named_family("bumps3"));
    const YSymbolSet y = build_y_fibers(enumerate_basis(1, 4), 1);
    const GridFunction& f = fam[0].values;
    const double a = bochner_rhs(*m, f, y);
    EXPECT_GT(a, 0.0);
    EXPECT_NEAR(bochner_rhs_x(*m, f, y), a, 1e-10 * a);
    EXPECT_NEAR(bochner_rhs(*m, GridFunction(2.0 * f), y), 16.0 * a, 1e-10 * a);
}

TEST(BoundExperiment, ConstantRowsExcluded) {
    const auto m = grid_model(small_grid());
    auto fam = sample_family(small_grid(), named_family("bumps3"));
    for (auto& c : sample_family(small_grid(), named_family("constant"))) fam.push_back(c);
    const ExperimentReport r = bound_experiment(*m, fam, 1);
    ASSERT_EQ(r.rows.size(), 5u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_FALSE(r.rows[i].excluded);
        EXPECT_GT(r.rows[i].ratio, 0.0);
    }
    EXPECT_TRUE(r.rows[3].excluded);
    EXPECT_TRUE(r.rows[4].excluded);
    EXPECT_EQ(r.summary.rows_used, 3u);
}

TEST(BoundExperiment, ParallelMatchesSerial) {
    const auto m = grid_model(small_grid());
    const auto fam = sample_family(small_grid(), named_family("bumps3"));
    const ExperimentReport a = bound_experiment(*m, fam, 2);
    const ExperimentReport b = bound_experiment(*m, fam, 2, {true});
    ASSERT_EQ(a.rows.size(), b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) EXPECT_EQ(a.rows[i].ratio, b.rows[i].ratio);
}

TEST(TraceFormula, ScaledPairSharesRatio) {
    const auto m = grid_model(small_grid());
    auto fam = sample_family(small_grid(), named_family("scaled_pair"));
    fam.push_back(sample_family(small_grid(), named_family("bumps3"))[1]);
    const ExperimentReport r = trace_formula_experiment(*m, fam, 1, enumerate_basis(1, 4));
    ASSERT_EQ(r.rows.size(), 3u);
    EXPECT_NEAR(r.rows[1].lhs, 16.0 * r.rows[0].lhs, 1e-9 * r.rows[1].lhs);
    EXPECT_NEAR(r.rows[1].rhs, 16.0 * r.rows[0].rhs, 1e-9 * r.rows[1].rhs);
    EXPECT_NEAR(r.rows[1].ratio, r.rows[0].ratio, 1e-12 * r.rows[0].ratio);
}

TEST(Product, FiberOperatorsByName) {
    const auto b = enumerate_basis(1, 3);
    EXPECT_EQ((product_fiber_operator(b, "identity").plus - CMatrix::Identity(4, 4)).norm(), 0.0);
    EXPECT_THROW(product_fiber_operator(b, "bogus"), std::invalid_argument);
    EXPECT_NO_THROW(product_fiber_operator(b, "riesz:2"));
    EXPECT_NO_THROW(product_fiber_operator(b, "a:1"));
}

TEST(Product, RhsOracleForY0) {
    const GridSpec& s = small_grid();
    const auto fam = sample_family(s, named_family("bumps3"));
    const auto b = enumerate_basis(1, 5);
    ProductTuple t{"y0", {fam[0], fam[0], fam[1], fam[1]}, {"y0", "y0", "y0", "y0"}};
    // tr_sigma(H^{-2} (x) 1) = 2 sum_alpha (2 alpha + 1)^{-2}.
    double tr = 0.0;
    for (int a = 0; a <= 5; ++a) tr += 2.0 / ((2.0 * a + 1.0) * (2.0 * a + 1.0));
    const double integral =
        (fam[0].values.array().square() * fam[1].values.array().square()).sum() * s.cell_volume();
    EXPECT_NEAR(product_rhs(s, t, b), integral * tr, 1e-12 * integral * tr);
    t.x.pop_back();
    EXPECT_THROW(product_rhs(s, t, b), std::invalid_argument);
}

TEST(Product, NeedsThreeTuples) {
    const auto m = grid_model(GridSpec::cube(7));
    EXPECT_THROW(product_trace_check(*m, {}, enumerate_basis(1, 2)), std::invalid_argument);
    clear_grid_models();
}
