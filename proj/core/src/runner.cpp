#include "heislab/runner.hpp"

#include "heislab/doi.hpp"
#include "heislab/families.hpp"
#include "heislab/hermite.hpp"
#include "heislab/schatten.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

namespace heislab {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

const std::map<std::string, int>& criterion_of() {
    static const std::map<std::string, int> m = {
        {"hermite.exactness", 1},  {"doi.exactness", 2},          {"doi.phi_n", 3},
        {"plancherel.trace", 4},   {"plancherel.weak_norm", 5},   {"plancherel.quadrature", 0},
        {"grid.decomposition", 6}, {"bound.decay_slope", 7},      {"bound.ratio_spread", 8},
        {"trace.ratio_cov", 9},    {"trace.gram", 10},            {"trace.dixmier_calibration", 11},
        {"product.ratio_spread", 0},
    };
    return m;
}

std::string suite_of(const std::string& key) { return key.substr(0, key.find('.')); }

double rel_diff(const CMatrix& a, const CMatrix& b) {
    const double scale = std::max({a.norm(), b.norm(), 1.0});
    return (a - b).norm() / scale;
}

Json patch_grid(const GridSpec& base, const Json& patch) {
    Json g = base.to_json();
    for (auto it = patch.begin(); it != patch.end(); ++it) {
        if (it.key() == "N") {
            g["Nx"] = g["Ny"] = g["Nt"] = it.value();
        } else if (it.key() == "L") {
            g["Lx"] = g["Ly"] = it.value();
        } else {
            g[it.key()] = it.value();
        }
    }
    return g;
}

std::string grid_label(const GridSpec& s) {
    return std::to_string(s.Nx) + "x" + std::to_string(s.Ny) + "x" + std::to_string(s.Nt);
}

ThresholdCheck make_check(const std::string& key, double value, bool pass, Json detail = Json::object()) {
    ThresholdCheck c;
    c.key = key;
    c.criterion = criterion_of().at(key);
    c.value = value;
    c.pass = pass;
    c.detail = std::move(detail);
    return c;
}

const Json& threshold(const RunConfig& config, const std::string& key) {
    if (!config.thresholds.contains(key)) throw UsageError("missing thresholds for '" + key + "'");
    return config.thresholds.at(key);
}

std::vector<double> logspace(double lo_exp, double hi_exp, int count) {
    std::vector<double> v;
    for (int i = 0; i < count; ++i) v.push_back(std::pow(10.0, lo_exp + (hi_exp - lo_exp) * i / (count - 1)));
    return v;
}

// ------------------------------------------------------------------ hermite

double hermite_max_error(int n, int K) {
    const auto b = enumerate_basis(n, K);
    const RVector mask = interior_mask(*b);
    const CMatrix P = mask.cast<cplx>().asDiagonal();
    double err = 0.0;
    const auto dim = static_cast<Eigen::Index>(b->dim());
    CMatrix h = CMatrix::Zero(dim, dim);
    for (int j = 1; j <= n; ++j) {
        const CMatrix p = momentum_matrix(*b, j), q = position_matrix(*b, j), lad = ladder_matrix(*b, j);
        err = std::max(err, rel_diff(p + I_unit * q, lad));
        err = std::max(err, rel_diff(q + I_unit * p, I_unit * lad.adjoint()));
        h += p * p + q * q;
        for (int k = 1; k <= n; ++k) {
            const CMatrix pk = momentum_matrix(*b, k), qk = position_matrix(*b, k);
            const CMatrix ccr = P * (p * qk - qk * p) * P;
            const CMatrix want = j == k ? CMatrix(-I_unit * P) : CMatrix::Zero(dim, dim);
            err = std::max(err, rel_diff(ccr, want));
            err = std::max(err, rel_diff(P * (p * pk - pk * p) * P, CMatrix::Zero(dim, dim)));
            err = std::max(err, rel_diff(P * (q * qk - qk * q) * P, CMatrix::Zero(dim, dim)));
        }
    }
    const CMatrix diag = oscillator_diagonal(*b).cast<cplx>().asDiagonal();
    err = std::max(err, rel_diff(P * h * P, P * diag * P));
    return err;
}

SuiteResult hermite_suite(const RunConfig& config) {
    const Json& th = threshold(config, "hermite.exactness");
    SuiteResult r;
    const auto t0 = Clock::now();
    std::set<int> Ks = {4, 6, 8, config.hermite_K};
    double worst = 0.0;
    Json per = Json::array();
    for (int n : {1, 2}) {
        for (int K : Ks) {
            const double e = hermite_max_error(n, K);
            worst = std::max(worst, e);
            per.push_back({{"n", n}, {"K", K}, {"max_error", e}});
        }
    }
    const double sec = seconds_since(t0);
    const bool fast = sec < th.at("max_seconds").get<double>();
    r.metrics["cases"] = per;
    r.metrics["sweep_metric"] = hermite_max_error(config.hermite_n, config.hermite_K);
    r.checks.push_back(make_check("hermite.exactness", worst, worst <= th.at("max_error").get<double>() && fast,
                                  {{"runtime_ok", fast}}));
    return r;
}

// ------------------------------------------------------------------ doi

double doi_lemma_residual(const SpectralDecomposition& db, const CMatrix& B, const CMatrix& A) {
    const CMatrix Binv = db.eigenvectors * db.eigenvalues.cwiseInverse().cast<cplx>().asDiagonal() *
                         db.eigenvectors.adjoint();
    const CMatrix lhs = (B * A - A * B) * Binv;
    const CMatrix B2 = B * B;
    const CMatrix rhs = doi_apply(db, db, symbols::frac_lambda(), Binv * (B2 * A - A * B2) * Binv);
    return rel_diff(lhs, rhs);
}

double doi_fiber_residual(int n, int K) {
    const auto b = enumerate_basis(n, K);
    const CMatrix B = oscillator_matrix(*b);
    const auto db = SpectralDecomposition::of_diagonal(oscillator_diagonal(*b));
    double err = 0.0;
    for (int j = 1; j <= n; ++j) {
        err = std::max(err, doi_lemma_residual(db, B, position_matrix(*b, j)));
        err = std::max(err, doi_lemma_residual(db, B, momentum_matrix(*b, j)));
    }
    return err;
}

// Closed form of phi_n against the resolvent quadrature on a diagonal A.
Json phi_n_study(const RunConfig& config, double& max_error, double& limit_error) {
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> u(1.0, 50.0);
    RVector d(5);
    for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = u(rng);
    std::sort(d.data(), d.data() + d.size());
    const auto sd = SpectralDecomposition::of_diagonal(d);
    const CMatrix V = CMatrix::Ones(5, 5);
    Json rows = Json::array();
    max_error = 0.0;
    for (double m : {1.0, 10.0, 100.0}) {
        const CMatrix q = resolvent_quadrature_A(V, sd, {m, 1024});
        double e = 0.0;
        for (Eigen::Index i = 0; i < 5; ++i) {
            for (Eigen::Index j = 0; j < 5; ++j) e = std::max(e, std::abs(q(i, j) - phi_n_symbol(d(i), d(j), m)));
        }
        max_error = std::max(max_error, e);
        rows.push_back({{"m", m}, {"max_error", e}});
    }
    // m -> infinity: the gap to (pi/2) psi is first order in 1/m, so the limit is
    // estimated by Richardson extrapolation from m and 2m.
    const double m = 1e3;
    const CMatrix q1 = resolvent_quadrature_A(V, sd, {m, 1024});
    const CMatrix q2 = resolvent_quadrature_A(V, sd, {2.0 * m, 1024});
    const CMatrix extrap = 2.0 * q2 - q1;
    limit_error = 0.0;
    double raw_gap = 0.0;
    for (Eigen::Index i = 0; i < 5; ++i) {
        for (Eigen::Index j = 0; j < 5; ++j) {
            const double target = std::numbers::pi / 2.0 * psi_value(d(i), d(j));
            limit_error = std::max(limit_error, std::abs(extrap(i, j) - target));
            raw_gap = std::max(raw_gap, std::abs(q1(i, j) - target));
        }
    }
    Json out;
    out["cutoffs"] = rows;
    out["limit_cutoff"] = m;
    out["single_cutoff_gap"] = raw_gap;
    return out;
}

SuiteResult doi_suite(const RunConfig& config) {
    const Json& th = threshold(config, "doi.exactness");
    SuiteResult r;
    const auto t0 = Clock::now();
    std::mt19937_64 rng(config.seed);
    double mult = 0.0, lin = 0.0, lemma = 0.0;
    const Symbol f = symbols::frac_lambda(), g = symbols::min_over_sum(), fg = symbols::product(f, g);
    for (int i = 0; i < 50; ++i) {
        const Eigen::Index dim = 2 + i % 11;
        const auto d0 = SpectralDecomposition::of_hermitian(random_hermitian_in(dim, 1.0, 2.0, rng));
        const auto d1 = SpectralDecomposition::of_hermitian(random_hermitian_in(dim, 1.0, 2.0, rng));
        const CMatrix A = random_gaussian(dim, dim, rng), C = random_gaussian(dim, dim, rng);
        mult = std::max(mult, rel_diff(doi_apply(d0, d1, f, doi_apply(d0, d1, g, A)), doi_apply(d0, d1, fg, A)));
        const cplx a(0.7, -0.3), c(-1.1, 0.4);
        lin = std::max(lin, rel_diff(doi_apply(d0, d1, f, a * A + c * C),
                                     a * doi_apply(d0, d1, f, A) + c * doi_apply(d0, d1, f, C)));
        const CMatrix B = d0.reconstruct();
        lemma = std::max(lemma, doi_lemma_residual(d0, B, random_hermitian(dim, rng)));
    }
    const double sec = seconds_since(t0);
    const double fiber = doi_fiber_residual(config.hermite_n, config.hermite_K);
    const double worst = std::max({mult, lin, lemma, fiber});
    const bool fast = sec < th.at("max_seconds").get<double>();
    r.metrics["multiplicativity"] = mult;
    r.metrics["linearity"] = lin;
    r.metrics["commutator_identity"] = lemma;
    r.metrics["oscillator_identity"] = fiber;
    r.metrics["sweep_metric"] = fiber;
    // Empirical Schur multiplier norms; the constants are not known in closed form.
    {
        std::mt19937_64 srng(config.seed + 1);
        Json schur = Json::object();
        for (const Symbol& s : {symbols::frac_lambda(), symbols::sgn_diff(), symbols::psi()}) {
            double worst_ratio = 0.0;
            for (Eigen::Index dim : {4, 8, 16}) {
                const auto d = SpectralDecomposition::of_hermitian(random_hermitian_in(dim, 1.0, 50.0, srng));
                worst_ratio = std::max(worst_ratio, schur_norm_ratio(d, d, s, 20, srng));
            }
            schur[s.name] = worst_ratio;
        }
        r.metrics["schur_norm_ratio"] = schur;
    }
    r.checks.push_back(make_check("doi.exactness", worst, worst <= th.at("max_error").get<double>() && fast,
                                  {{"runtime_ok", fast}}));

    const Json& tp = threshold(config, "doi.phi_n");
    double max_error = 0.0, limit_error = 0.0;
    Json study = phi_n_study(config, max_error, limit_error);
    study["limit_error"] = limit_error;
    r.metrics["phi_n"] = study;
    const bool ok = max_error <= tp.at("max_error").get<double>() && limit_error <= tp.at("limit_error").get<double>();
    r.checks.push_back(make_check("doi.phi_n", max_error, ok, {{"limit_error", limit_error}}));
    return r;
}

// ------------------------------------------------------------------ plancherel

SuiteResult plancherel_suite(const RunConfig& config) {
    SuiteResult r;
    const Json& tt = threshold(config, "plancherel.trace");
    const double e1 = std::abs(tau_radial([](double s) { return std::exp(-s); }, 1).value - 1.0);
    const double e2 = std::abs(tau_radial([](double s) { return std::exp(-2.0 * s); }, 1).value - 0.25);
    const double e3 = std::abs(incursion_distribution(1, 1.0 - std::pow(2.0, -0.25)) - 0.5);
    const IncursionReport inc = incursion_profile(1, logspace(-5.0, -2.0, 16));
    const double slope_gap = std::abs(inc.fitted_exponent + 0.5);
    const double trace_err = std::max(e1, e2);
    const bool trace_ok = trace_err <= tt.at("max_error").get<double>() &&
                          e3 <= tt.at("incursion_error").get<double>() &&
                          slope_gap <= tt.at("exponent_tolerance").get<double>();
    r.metrics["tau_exp"] = e1;
    r.metrics["tau_exp2"] = e2;
    r.metrics["incursion_value_error"] = e3;
    r.metrics["incursion_exponent"] = inc.fitted_exponent;
    r.checks.push_back(make_check("plancherel.trace", trace_err, trace_ok,
                                  {{"incursion_error", e3}, {"exponent", inc.fitted_exponent}}));

    const Json& tw = threshold(config, "plancherel.weak_norm");
    std::mt19937_64 rng(config.seed);
    double werr = 0.0;
    for (int i = 0; i < 20; ++i) {
        const auto b = enumerate_basis(1, 1 + i % 9);
        const auto d = static_cast<Eigen::Index>(b->dim());
        FiberOperator x = FiberOperator::zero(b);
        x.minus = random_gaussian(d, d, rng);
        x.plus = random_gaussian(d, d, rng);
        const WeakNormLift w = weak_norm_lift(x, 1);
        const BruteForceWeakNorm bf = weak_norm_brute_force(w);
        werr = std::max({werr, std::abs(w.quasinorm - bf.quasinorm) / w.quasinorm, bf.max_distribution_error});
    }
    const auto b1 = enumerate_basis(1, 2);
    const FiberOperator rank_one = FiberOperator::tensor(b1, matrix_unit(*b1, {0}, {0}), 0.0, 1.0);
    const double rank_err = std::abs(weak_norm_lift(rank_one, 1).quasinorm - std::pow(0.5, 0.25));
    r.metrics["rank_one_error"] = rank_err;
    r.checks.push_back(make_check("plancherel.weak_norm", werr,
                                  werr <= tw.at("max_error").get<double>() &&
                                      rank_err <= tw.at("rank_one_error").get<double>(),
                                  {{"rank_one_error", rank_err}}));

    // tau(e^{-|s|H}) on the signed quadrature against its closed form.
    const Json& tq = threshold(config, "plancherel.quadrature");
    const int n = config.hermite_n;
    const auto b = enumerate_basis(n, config.hermite_K);
    const auto q = PlancherelQuadrature::build(n, config.quadrature);
    const DirectIntegralOperator y = lift(
        FiberOperator::identity(b), q, [](double) { return 1.0; }, [](double v) { return std::exp(-v); });
    double exact = 0.0;
    double nfact = std::tgamma(n + 1.0);
    for (std::size_t i = 0; i < b->dim(); ++i) exact += 2.0 * nfact / std::pow(2.0 * b->grade(i) + n, n + 1.0);
    const double qerr = std::abs(tau(y).real() - exact) / exact;
    r.metrics["quadrature_nodes"] = q.size();
    r.metrics["quadrature_error"] = qerr;
    r.metrics["sweep_metric"] = qerr;
    r.checks.push_back(make_check("plancherel.quadrature", qerr, qerr <= tq.at("max_error").get<double>()));

    ExperimentReport rep;
    rep.name = "incursion";
    rep.config_digest = config.digest();
    for (std::size_t i = 0; i < inc.s.size(); ++i) {
        ExperimentRow row;
        row.id = format_double(inc.s[i]);
        row.lhs = inc.distribution[i];
        row.rhs = inc.mu[i];
        row.ratio = inc.mu[i] > 0.0 ? inc.distribution[i] / inc.mu[i] : 0.0;
        rep.rows.push_back(row);
    }
    rep.recompute_summary();
    std::ostringstream csv;
    write_incursion_csv(csv, inc);
    rep.diagnostics["incursion_csv"] = csv.str();
    r.reports.push_back(std::move(rep));
    return r;
}

// ------------------------------------------------------------------ grid

std::vector<SampledFunction> sample_nonconstant(const GridSpec& spec, const std::string& family) {
    Family fam;
    try {
        fam = named_family(family);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    auto s = sample_family(spec, fam);
    const bool all_constant = std::all_of(s.begin(), s.end(), [](const SampledFunction& f) {
        return f.values.size() == 0 || f.values.maxCoeff() == f.values.minCoeff();
    });
    if (all_constant) throw UsageError("family '" + family + "' has no nonconstant member");
    return s;
}

SuiteResult grid_suite(const RunConfig& config) {
    SuiteResult r;
    const Json& th = threshold(config, "grid.decomposition");
    const auto model = grid_model(config.grid);
    const GridSpec& spec = config.grid;
    auto fam = sample_nonconstant(spec, config.family);
    fam.resize(std::min<std::size_t>(fam.size(), 3));

    double residual = 0.0, deviation = 0.0, inv_comm = 0.0;
    Json per = Json::array();
    for (const auto& f : fam) {
        for (int l = 1; l <= 2 * spec.n; ++l) {
            const DecompositionReport d = riesz_decomposition_check(*model, l, f.values);
            residual = std::max(residual, d.relative_residual);
            deviation = std::max(deviation, d.product_rule_deviation);
            per.push_back({{"id", f.id}, {"l", l}, {"residual", d.relative_residual},
                           {"product_rule_deviation", d.product_rule_deviation}});
        }
        inv_comm = std::max(inv_comm, inverse_commutator_check(*model, f.values));
    }
    double rotation = 0.0;
    for (int k = 1; k <= 2 * spec.n; ++k) {
        rotation = std::max(rotation, quarter_rotation(spec, model->fields(), k, 8, config.seed).residual);
    }

    // Vertical translation commutes with X, Y away from the boundary.
    const GridFunction probe = random_interior_function(spec, 3, config.seed);
    const auto shift = t_translation(spec, 1);
    double translation = 0.0;
    for (const auto& X : model->fields().X) {
        const GridFunction a = shift.transpose() * (X * (shift * probe));
        translation = std::max(translation, (a - X * probe).norm() / std::max((X * probe).norm(), 1e-300));
    }

    const double p = 2.0 * spec.n + 2.0;
    Json poincare = Json::array();
    for (const auto& f : fam) {
        poincare.push_back({{"id", f.id},
                            {"ball", poincare_ratio(spec, model->fields(), f.values, 1.0, PoincareMode::ball, p)},
                            {"annulus", poincare_ratio(spec, model->fields(), f.values, 1.0, PoincareMode::annulus, p)}});
    }

    r.metrics["kernel_dim"] = model->spectrum().kernel_dim;
    r.metrics["lambda_max"] = model->spectrum().lambda_max();
    Json norms = Json::array();
    for (int l = 1; l <= 2 * spec.n; ++l) norms.push_back(model->riesz_norm(l));
    r.metrics["riesz_norms"] = norms;
    r.metrics["decomposition"] = per;
    r.metrics["product_rule_deviation"] = deviation;
    r.metrics["inverse_commutator_residual"] = inv_comm;
    r.metrics["t_laplacian_commutation"] = t_laplacian_commutation_residual(*model);
    r.metrics["translation_residual"] = translation;
    r.metrics["poincare"] = poincare;
    r.metrics["rotation_residual"] = rotation;
    r.metrics["sweep_metric"] = residual;
    const bool ok = residual <= th.at("max_residual").get<double>() && rotation <= th.at("max_rotation").get<double>();
    r.checks.push_back(make_check("grid.decomposition", residual, ok, {{"rotation_residual", rotation}}));

    if (config.dump_operators) {
        const auto dir = config.output_dir / "grid";
        std::filesystem::create_directories(dir);
        const GridOperator& R = model->riesz(config.riesz_index);
        dump_operator(dir / ("riesz_" + std::to_string(config.riesz_index) + ".bin"), R, spec, "riesz",
                      (R - R.transpose()).norm() / std::max(R.norm(), 1e-300));
    }
    return r;
}

// ------------------------------------------------------------------ bound

struct GridStage {
    GridSpec grid;
    int K = 0;
    bool refined = false;
};

std::vector<GridStage> stages(const RunConfig& config) {
    std::vector<GridStage> s = {{config.grid, config.hermite_K, false}};
    if (config.refine) s.push_back({config.refine->grid, config.refine->hermite_K, true});
    return s;
}

std::vector<double> row_slopes(const ExperimentReport& rep) {
    std::vector<double> out;
    for (const auto& row : rep.rows) {
        if (!row.excluded) out.push_back(row.extra.at("slope").get<double>());
    }
    return out;
}

SuiteResult bound_suite(const RunConfig& config) {
    SuiteResult r;
    const Json& ts = threshold(config, "bound.decay_slope");
    const Json& tr = threshold(config, "bound.ratio_spread");
    const double lo = ts.at("min_slope").get<double>(), hi = ts.at("max_slope").get<double>();
    const double target = ts.at("target").get<double>();
    const double budget = ts.at("max_seconds_per_grid").get<double>();

    std::vector<std::vector<double>> slopes;
    std::vector<double> spreads;
    bool in_range = true, fast = true;
    Json sweep = Json::array();
    for (const auto& st : stages(config)) {
        const auto t0 = Clock::now();
        const auto fam = sample_nonconstant(st.grid, config.family);
        const auto model = grid_model(st.grid);
        ExperimentReport rep = bound_experiment(*model, fam, config.riesz_index, {config.parallel});
        const double sec = seconds_since(t0);
        fast = fast && sec <= budget;
        rep.name = "bound_" + grid_label(st.grid);
        rep.config_digest = config.digest();
        const auto s = row_slopes(rep);
        for (double v : s) in_range = in_range && v >= lo && v <= hi;
        slopes.push_back(s);
        spreads.push_back(rep.summary.spread);
        sweep.push_back({{"grid", grid_label(st.grid)}, {"spread", rep.summary.spread}, {"slopes", s}});
        r.reports.push_back(std::move(rep));
        if (st.refined) clear_grid_models();
    }

    bool toward = true;
    Json moves = Json::array();
    if (slopes.size() == 2) {
        for (std::size_t i = 0; i < slopes[0].size() && i < slopes[1].size(); ++i) {
            const bool m = std::abs(slopes[1][i] - target) < std::abs(slopes[0][i] - target);
            toward = toward && m;
            moves.push_back(m);
        }
    }
    double worst = 0.0;
    for (double v : slopes.back()) worst = std::max(worst, std::abs(v - target));
    r.metrics["refinement"] = sweep;
    r.metrics["sweep_metric"] = spreads.front();
    r.checks.push_back(make_check("bound.decay_slope", worst, in_range && toward && fast,
                                  {{"in_range", in_range},
                                   {"moves_toward_target", moves},
                                   {"refined", slopes.size() == 2},
                                   {"runtime_ok", fast}}));
    const bool spread_ok = spreads.front() <= tr.at("max_spread").get<double>() &&
                           (spreads.size() < 2 || spreads[1] <= spreads[0]);
    r.checks.push_back(make_check("bound.ratio_spread", spreads.front(), spread_ok,
                                  {{"refined_spread", spreads.size() == 2 ? Json(spreads[1]) : Json(nullptr)}}));
    return r;
}

// ------------------------------------------------------------------ trace

SuiteResult trace_suite(const RunConfig& config) {
    SuiteResult r;
    const Json& tc = threshold(config, "trace.ratio_cov");
    const int l = config.riesz_index;

    std::vector<double> covs;
    Json sweep = Json::array();
    double scaled_gap = 0.0;
    double rhs_x_gap = 0.0;
    for (const auto& st : stages(config)) {
        const auto fam = sample_nonconstant(st.grid, config.trace_family);
        const auto model = grid_model(st.grid);
        const auto basis = enumerate_basis(st.grid.n, st.K);
        ExperimentReport rep = trace_formula_experiment(*model, fam, l, basis, {config.parallel});
        rep.name = "trace_" + grid_label(st.grid) + "_K" + std::to_string(st.K);
        rep.config_digest = config.digest();
        covs.push_back(rep.summary.cov);
        sweep.push_back({{"grid", grid_label(st.grid)},
                         {"K", st.K},
                         {"cov", rep.summary.cov},
                         {"max_relative_band", rep.diagnostics["max_relative_band"]}});
        if (!st.refined) {
            const auto pair = sample_family(st.grid, named_family("scaled_pair"));
            const YSymbolSet y = build_y_fibers(basis, l);
            double ratio[2];
            for (int i = 0; i < 2; ++i) {
                ratio[i] = dixmier_lhs(*model, pair[i].values, l).value / bochner_rhs(*model, pair[i].values, y);
            }
            scaled_gap = std::abs(ratio[1] - ratio[0]) / std::abs(ratio[0]);
            for (const auto& f : fam) {
                const double a = bochner_rhs(*model, f.values, y), b = bochner_rhs_x(*model, f.values, y);
                rhs_x_gap = std::max(rhs_x_gap, std::abs(a - b) / std::max(std::abs(a), 1e-300));
            }
        }
        r.reports.push_back(std::move(rep));
        if (st.refined) clear_grid_models();
    }
    const bool cov_ok = covs.front() <= tc.at("max_cov").get<double>() && (covs.size() < 2 || covs[1] < covs[0]) &&
                        scaled_gap <= tc.at("scaled_pair_tolerance").get<double>();
    r.metrics["refinement"] = sweep;
    r.metrics["scaled_pair_gap"] = scaled_gap;
    r.metrics["x_symbol_gap"] = rhs_x_gap;
    r.metrics["sweep_metric"] = covs.front();
    r.checks.push_back(make_check("trace.ratio_cov", covs.front(), cov_ok,
                                  {{"refined_cov", covs.size() == 2 ? Json(covs[1]) : Json(nullptr)},
                                   {"scaled_pair_gap", scaled_gap}}));

    // Independence and coercivity of the fiber symbols.
    const Json& tg = threshold(config, "trace.gram");
    std::set<int> Ks = {4, 6, 8, config.hermite_K};
    double min_eig = std::numeric_limits<double>::infinity();
    double coer_dev = 0.0;
    Json gram = Json::array();
    for (int ll = 1; ll <= 2 * config.grid.n; ++ll) {
        std::map<int, double> coer;
        for (int K : Ks) {
            const GramReport g = gram_min_eigenvalue(build_y_fibers(enumerate_basis(config.grid.n, K), ll).y, 4000,
                                                     config.seed);
            min_eig = std::min(min_eig, g.min_eigenvalue);
            coer[K] = g.coercivity;
            gram.push_back({{"l", ll}, {"K", K}, {"min_eigenvalue", g.min_eigenvalue}, {"coercivity", g.coercivity}});
        }
        const double ref = coer.rbegin()->second;
        for (const auto& [K, c] : coer) coer_dev = std::max(coer_dev, std::abs(c - ref) / ref);
    }
    r.metrics["gram"] = gram;
    const bool gram_ok = min_eig > tg.at("min_eigenvalue").get<double>() &&
                         coer_dev <= tg.at("coercivity_tolerance").get<double>();
    r.checks.push_back(make_check("trace.gram", min_eig, gram_ok, {{"coercivity_deviation", coer_dev}}));

    // Approximant on diag 1/(k+1), whose limit is 1.
    const Json& td = threshold(config, "trace.dixmier_calibration");
    std::vector<double> harmonic(10000);
    for (std::size_t k = 0; k < harmonic.size(); ++k) harmonic[k] = 1.0 / static_cast<double>(k + 1);
    const SingularSpectrum hs(harmonic);
    Json cal = Json::array();
    double prev = std::numeric_limits<double>::infinity(), last = 0.0;
    bool monotone = true;
    for (std::size_t N : {100u, 1000u, 10000u}) {
        const double e = std::abs(dixmier_approximant(hs, N) - 1.0);
        monotone = monotone && e < prev;
        prev = last = e;
        cal.push_back({{"N", N}, {"error", e}});
    }
    r.metrics["dixmier_calibration"] = cal;
    r.checks.push_back(make_check("trace.dixmier_calibration", last,
                                  last <= td.at("tolerance").get<double>() && monotone, {{"monotone", monotone}}));
    return r;
}

// ------------------------------------------------------------------ product

SuiteResult product_suite(const RunConfig& config) {
    SuiteResult r;
    const Json& th = threshold(config, "product.ratio_spread");
    const auto fam = sample_nonconstant(config.grid, config.trace_family);
    if (fam.size() < 3) throw UsageError("product suite needs a family with at least 3 functions");
    const auto model = grid_model(config.grid);
    const auto basis = enumerate_basis(config.grid.n, config.hermite_K);
    const auto& f = fam[0];
    const auto& g = fam[1];
    const auto& h = fam[2];
    const std::string rl = "riesz:" + std::to_string(config.riesz_index);
    const std::vector<ProductTuple> tuples = {
        {"ffgg_y0", {f, f, g, g}, {"y0", "y0", "y0", "y0"}},
        {"ffgg_riesz", {f, f, g, g}, {rl, rl, "y0", "y0"}},
        {"gghh_a1", {g, g, h, h}, {"a:1", "a:1", "y0", "y0"}},
    };
    ExperimentReport rep = product_trace_check(*model, tuples, basis);
    rep.config_digest = config.digest();
    r.metrics["sweep_metric"] = rep.summary.relative_spread;
    r.checks.push_back(make_check("product.ratio_spread", rep.summary.relative_spread,
                                  rep.summary.relative_spread <= th.at("max_relative_spread").get<double>()));
    r.reports.push_back(std::move(rep));
    return r;
}

std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%S") << '.' << std::setw(3) << std::setfill('0') << ms << 'Z';
    return os.str();
}

void write_artifacts(const RunConfig& config, const SuiteResult& r) {
    const auto dir = config.output_dir / r.suite;
    std::filesystem::create_directories(dir);
    write_text_file(dir / "report.json", dump_json(r.to_json(config)));
    for (const auto& rep : r.reports) {
        std::ostringstream os;
        rep.write_csv(os);
        write_text_file(dir / (rep.name + ".csv"), os.str());
        if (rep.diagnostics.contains("incursion_csv")) {
            write_text_file(dir / "incursion.csv", rep.diagnostics["incursion_csv"].get<std::string>());
        }
    }
}

Json check_json(const ThresholdCheck& c) {
    Json j;
    j["key"] = c.key;
    j["criterion"] = c.criterion;
    j["value"] = c.value;
    j["pass"] = c.pass;
    j["detail"] = c.detail;
    return j;
}

}  // namespace

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names = {"hermite", "doi", "plancherel", "grid", "bound", "trace", "product"};
    return names;
}

Json default_thresholds() {
    Json t;
    t["hermite.exactness"] = {{"max_error", 1e-12}, {"max_seconds", 5.0}};
    t["doi.exactness"] = {{"max_error", 1e-11}, {"max_seconds", 5.0}};
    t["doi.phi_n"] = {{"max_error", 1e-6}, {"limit_error", 1e-4}};
    t["plancherel.trace"] = {{"max_error", 1e-8}, {"incursion_error", 1e-10}, {"exponent_tolerance", 0.05}};
    t["plancherel.weak_norm"] = {{"max_error", 1e-10}, {"rank_one_error", 1e-12}};
    t["plancherel.quadrature"] = {{"max_error", 1e-8}};
    t["grid.decomposition"] = {{"max_residual", 1e-9}, {"max_rotation", 1e-12}};
    t["bound.decay_slope"] = {
        {"min_slope", -0.35}, {"max_slope", -0.15}, {"target", -0.25}, {"max_seconds_per_grid", 600.0}};
    t["bound.ratio_spread"] = {{"max_spread", 8.0}};
    t["trace.ratio_cov"] = {{"max_cov", 0.5}, {"scaled_pair_tolerance", 1e-12}};
    t["trace.gram"] = {{"min_eigenvalue", 1e-6}, {"coercivity_tolerance", 0.1}};
    t["trace.dixmier_calibration"] = {{"tolerance", 0.15}};
    t["product.ratio_spread"] = {{"max_relative_spread", 0.5}};
    return t;
}

RunConfig RunConfig::from_json(const Json& j) {
    if (!j.is_object()) throw UsageError("config: expected a JSON object");
    RunConfig c;
    try {
        c.suite = j.value("suite", c.suite);
        if (j.contains("grid")) c.grid = GridSpec::from_json(j.at("grid"));
        if (j.contains("refine") && !j.at("refine").is_null()) {
            const Json& rf = j.at("refine");
            Refinement ref;
            ref.grid = GridSpec::from_json(patch_grid(c.grid, rf.value("grid", Json::object())));
            ref.hermite_K = rf.value("hermite_K", ref.hermite_K);
            c.refine = ref;
        }
        if (j.contains("hermite")) {
            c.hermite_n = j.at("hermite").value("n", c.hermite_n);
            c.hermite_K = j.at("hermite").value("K", c.hermite_K);
        }
        if (j.contains("quadrature")) c.quadrature = QuadratureSpec::from_json(j.at("quadrature"));
        c.family = j.value("family", c.family);
        c.trace_family = j.value("trace_family", c.trace_family);
        c.riesz_index = j.value("riesz_index", c.riesz_index);
        c.thresholds = default_thresholds();
        if (j.contains("thresholds")) {
            for (auto it = j.at("thresholds").begin(); it != j.at("thresholds").end(); ++it) {
                if (it.value().is_null()) {
                    c.thresholds.erase(it.key());
                } else if (c.thresholds.contains(it.key())) {
                    c.thresholds[it.key()].update(it.value());
                } else {
                    throw UsageError("unknown threshold key '" + it.key() + "'");
                }
            }
        }
        c.seed = j.value("seed", c.seed);
        c.output_dir = j.value("output_dir", c.output_dir.string());
        c.parallel = j.value("parallel", c.parallel);
        c.dump_operators = j.value("dump_operators", c.dump_operators);
    } catch (const UsageError&) {
        throw;
    } catch (const std::exception& e) {
        throw UsageError(std::string("config: ") + e.what());
    }
    return c;
}

Json RunConfig::to_json() const {
    Json j;
    j["suite"] = suite;
    j["grid"] = grid.to_json();
    if (refine) {
        j["refine"] = {{"grid", refine->grid.to_json()}, {"hermite_K", refine->hermite_K}};
    } else {
        j["refine"] = nullptr;
    }
    j["hermite"] = {{"n", hermite_n}, {"K", hermite_K}};
    j["quadrature"] = quadrature.to_json();
    j["family"] = family;
    j["trace_family"] = trace_family;
    j["riesz_index"] = riesz_index;
    j["thresholds"] = thresholds;
    j["seed"] = seed;
    j["output_dir"] = output_dir.string();
    j["parallel"] = parallel;
    j["dump_operators"] = dump_operators;
    return j;
}

std::string RunConfig::digest() const {
    Json j = to_json();
    j.erase("suite");
    j.erase("output_dir");
    j.erase("parallel");
    j.erase("dump_operators");
    return hex_digest(fnv1a64(j.dump()));
}

void RunConfig::validate() const {
    const auto& names = suite_names();
    if (suite != "all" && std::find(names.begin(), names.end(), suite) == names.end()) {
        throw UsageError("unknown suite '" + suite + "'");
    }
    try {
        grid.validate();
        if (refine) refine->grid.validate();
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
    if (hermite_n < 1) throw UsageError("hermite n must be positive");
    if (hermite_K < 1 || (refine && refine->hermite_K < 1)) throw UsageError("hermite K must be positive");
    if (riesz_index < 1 || riesz_index > 2 * grid.n) throw UsageError("riesz_index out of range");
    const auto fams = family_names();
    for (const auto& f : {family, trace_family}) {
        if (std::find(fams.begin(), fams.end(), f) == fams.end()) throw UsageError("unknown family '" + f + "'");
    }
    for (const auto& [key, crit] : criterion_of()) {
        (void)crit;
        const std::string s = suite_of(key);
        if ((suite == "all" || suite == s) && !thresholds.contains(key)) {
            throw UsageError("missing thresholds for '" + key + "'");
        }
    }
}

bool SuiteResult::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const ThresholdCheck& c) { return c.pass; });
}

Json SuiteResult::to_json(const RunConfig& config) const {
    Json j;
    j["config"] = config.to_json();
    j["suite"] = suite;
    j["digest"] = config.digest();
    Json rows = Json::array();
    for (const auto& r : reports) {
        Json rj = r.to_json();
        rj["diagnostics"].erase("incursion_csv");
        rows.push_back(std::move(rj));
    }
    j["rows"] = std::move(rows);
    Json checks_j = Json::array();
    for (const auto& c : checks) checks_j.push_back(check_json(c));
    Json metrics_j = metrics;
    Json sweep_j = metrics_j.contains("refinement") ? metrics_j["refinement"] : Json::array();
    metrics_j.erase("refinement");
    j["summary"] = {{"passed", passed()}, {"checks", checks_j}, {"metrics", metrics_j}};
    j["sweep"] = sweep_j;
    return j;
}

SuiteResult execute_suite(const RunConfig& config, const std::string& suite) {
    const auto t0 = Clock::now();
    SuiteResult r;
    if (suite == "hermite") {
        r = hermite_suite(config);
    } else if (suite == "doi") {
        r = doi_suite(config);
    } else if (suite == "plancherel") {
        r = plancherel_suite(config);
    } else if (suite == "grid") {
        r = grid_suite(config);
    } else if (suite == "bound") {
        r = bound_suite(config);
    } else if (suite == "trace") {
        r = trace_suite(config);
    } else if (suite == "product") {
        r = product_suite(config);
    } else {
        throw UsageError("unknown suite '" + suite + "'");
    }
    r.suite = suite;
    r.seconds = seconds_since(t0);
    return r;
}

std::vector<SuiteResult> execute(const RunConfig& config) {
    config.validate();
    std::vector<SuiteResult> out;
    if (config.suite == "all") {
        for (const auto& s : suite_names()) out.push_back(execute_suite(config, s));
    } else {
        out.push_back(execute_suite(config, config.suite));
    }
    return out;
}

int run_suite(const RunConfig& config, std::ostream& log) {
    try {
        const auto results = execute(config);
        bool ok = true;
        std::filesystem::create_directories(config.output_dir);
        std::ofstream runs(config.output_dir / "runs.jsonl", std::ios::app);
        for (const auto& r : results) {
            write_artifacts(config, r);
            Json entry;
            entry["suite"] = r.suite;
            entry["digest"] = config.digest();
            entry["timestamp"] = iso_timestamp();
            entry["passed"] = r.passed();
            Json cs = Json::array();
            for (const auto& c : r.checks) cs.push_back(check_json(c));
            entry["checks"] = cs;
            runs << entry.dump() << '\n';
            for (const auto& c : r.checks) {
                log << (c.pass ? "PASS " : "FAIL ") << c.key << " value=" << format_double(c.value) << '\n';
            }
            log << r.suite << ": " << (r.passed() ? "passed" : "failed") << " in " << std::fixed
                << std::setprecision(1) << r.seconds << " s\n"
                << std::defaultfloat;
            ok = ok && r.passed();
        }
        return ok ? exit_code::ok : exit_code::threshold_failure;
    } catch (const UsageError& e) {
        log << "usage error: " << e.what() << '\n';
        return exit_code::usage_error;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        return exit_code::runtime_error;
    }
}

SweepAxis parse_axis(const std::string& name) {
    if (name == "grid_size") return SweepAxis::grid_size;
    if (name == "hermite_K") return SweepAxis::hermite_K;
    if (name == "quadrature_nodes") return SweepAxis::quadrature_nodes;
    throw UsageError("unknown sweep axis '" + name + "'");
}

namespace {

const char* axis_name(SweepAxis a) {
    switch (a) {
        case SweepAxis::grid_size: return "grid_size";
        case SweepAxis::hermite_K: return "hermite_K";
        case SweepAxis::quadrature_nodes: return "quadrature_nodes";
    }
    return "";
}

bool axis_applies(SweepAxis a, const std::string& suite) {
    static const std::map<std::string, std::set<SweepAxis>> table = {
        {"hermite", {SweepAxis::hermite_K}},
        {"doi", {SweepAxis::hermite_K}},
        {"plancherel", {SweepAxis::hermite_K, SweepAxis::quadrature_nodes}},
        {"grid", {SweepAxis::grid_size}},
        {"bound", {SweepAxis::grid_size}},
        {"trace", {SweepAxis::grid_size, SweepAxis::hermite_K}},
        {"product", {SweepAxis::grid_size, SweepAxis::hermite_K}},
    };
    const auto it = table.find(suite);
    return it != table.end() && it->second.count(a) > 0;
}

int as_int(double v, const char* what) {
    if (v != std::floor(v) || v < 1.0) throw UsageError(std::string(what) + " values must be positive integers");
    return static_cast<int>(v);
}

}  // namespace

std::vector<SweepRow> sweep(const RunConfig& config, SweepAxis axis, const std::vector<double>& values,
                            std::ostream& log) {
    if (values.empty()) throw UsageError("sweep: empty value list");
    if (config.suite == "all") throw UsageError("sweep: pick a single suite");
    config.validate();
    if (!axis_applies(axis, config.suite)) {
        throw UsageError(std::string("sweep: axis ") + axis_name(axis) + " does not apply to suite " + config.suite);
    }
    std::vector<SweepRow> rows;
    for (double v : values) {
        RunConfig c = config;
        c.refine.reset();
        switch (axis) {
            case SweepAxis::grid_size: {
                const int N = as_int(v, "grid_size");
                GridSpec g = c.grid;
                g.Nx = g.Ny = g.Nt = N;
                try {
                    g.validate();
                } catch (const std::exception& e) {
                    throw UsageError(e.what());
                }
                c.grid = g;
                break;
            }
            case SweepAxis::hermite_K: c.hermite_K = as_int(v, "hermite_K"); break;
            case SweepAxis::quadrature_nodes: c.quadrature.nodes_per_decade = as_int(v, "quadrature_nodes"); break;
        }
        const SuiteResult r = execute_suite(c, c.suite);
        SweepRow row;
        row.value = v;
        row.metric = r.metrics.at("sweep_metric").get<double>();
        row.delta = rows.empty() ? 0.0 : row.metric - rows.back().metric;
        row.passed = r.passed();
        log << axis_name(axis) << '=' << format_double(v) << " metric=" << format_double(row.metric)
            << (row.passed ? " pass" : " fail") << '\n';
        rows.push_back(row);
        clear_grid_models();
    }
    return rows;
}

int run_sweep(const RunConfig& config, SweepAxis axis, const std::vector<double>& values, std::ostream& log) {
    try {
        const auto rows = sweep(config, axis, values, log);
        const auto dir = config.output_dir / "sweep";
        std::filesystem::create_directories(dir);
        const std::string stem = config.suite + "_" + axis_name(axis);
        std::ostringstream csv_text;
        CsvWriter csv(csv_text);
        csv.row({"value", "metric", "delta", "passed"});
        Json table = Json::array();
        bool ok = true;
        for (const auto& r : rows) {
            csv.row({format_double(r.value), format_double(r.metric), format_double(r.delta), r.passed ? "1" : "0"});
            table.push_back({{"value", r.value}, {"metric", r.metric}, {"delta", r.delta}, {"passed", r.passed}});
            ok = ok && r.passed;
        }
        write_text_file(dir / (stem + ".csv"), csv_text.str());
        Json j;
        j["config"] = config.to_json();
        j["suite"] = config.suite;
        j["axis"] = axis_name(axis);
        j["digest"] = config.digest();
        j["sweep"] = table;
        write_text_file(dir / (stem + ".json"), dump_json(j));
        return ok ? exit_code::ok : exit_code::threshold_failure;
    } catch (const UsageError& e) {
        log << "usage error: " << e.what() << '\n';
        return exit_code::usage_error;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        return exit_code::runtime_error;
    }
}

Json merge_runs(const std::vector<Json>& entries) {
    if (entries.empty()) throw UsageError("report: no runs found");
    std::map<std::pair<std::string, std::string>, Json> merged;
    for (const auto& e : entries) {
        const auto key = std::make_pair(e.at("suite").get<std::string>(), e.at("digest").get<std::string>());
        auto [it, fresh] = merged.try_emplace(key, Json::object());
        Json& slot = it->second;
        if (fresh) {
            slot["suite"] = key.first;
            slot["digest"] = key.second;
            slot["latest"] = e;
            slot["history"] = Json::array();
        } else if (e.at("timestamp").get<std::string>() >= slot["latest"]["timestamp"].get<std::string>()) {
            slot["latest"] = e;
        }
        slot["history"].push_back(e);
    }
    Json table = Json::array();
    for (auto& [key, v] : merged) table.push_back(std::move(v));
    Json out;
    out["runs"] = std::move(table);
    return out;
}

int report(const std::filesystem::path& output_dir, std::ostream& log) {
    try {
        const auto path = output_dir / "runs.jsonl";
        std::vector<Json> entries;
        std::ifstream in(path);
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty()) entries.push_back(Json::parse(line));
        }
        const Json summary = merge_runs(entries);
        write_text_file(output_dir / "summary.json", dump_json(summary));
        for (const auto& r : summary["runs"]) {
            log << r["suite"].get<std::string>() << ' ' << r["digest"].get<std::string>() << ' '
                << (r["latest"]["passed"].get<bool>() ? "passed" : "failed") << " (" << r["history"].size()
                << " runs)\n";
        }
        return exit_code::ok;
    } catch (const UsageError& e) {
        log << "usage error: " << e.what() << '\n';
        return exit_code::usage_error;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        return exit_code::runtime_error;
    }
}

}  // namespace heislab
