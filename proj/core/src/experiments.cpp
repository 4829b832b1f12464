#include "heislab/experiments.hpp"

#include "heislab/doi.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>

namespace heislab {

ExperimentSummary summarize(const std::vector<ExperimentRow>& rows) {
    ExperimentSummary s;
    std::vector<double> r;
    for (const auto& row : rows) {
        if (!row.excluded && std::isfinite(row.ratio)) r.push_back(row.ratio);
    }
    s.rows_used = r.size();
    if (r.empty()) return s;
    s.min_ratio = *std::min_element(r.begin(), r.end());
    s.max_ratio = *std::max_element(r.begin(), r.end());
    double sum = 0.0;
    for (double v : r) sum += v;
    s.mean_ratio = sum / static_cast<double>(r.size());
    double var = 0.0;
    for (double v : r) var += (v - s.mean_ratio) * (v - s.mean_ratio);
    var /= static_cast<double>(r.size());
    s.spread = s.min_ratio > 0.0 ? s.max_ratio / s.min_ratio : std::numeric_limits<double>::infinity();
    s.relative_spread = s.mean_ratio != 0.0 ? (s.max_ratio - s.min_ratio) / s.mean_ratio : 0.0;
    s.cov = s.mean_ratio != 0.0 ? std::sqrt(var) / s.mean_ratio : 0.0;
    return s;
}

Json ExperimentReport::to_json() const {
    Json j;
    j["name"] = name;
    j["config_digest"] = config_digest;
    Json rs = Json::array();
    for (const auto& r : rows) {
        Json o;
        o["id"] = r.id;
        o["lhs"] = r.lhs;
        o["rhs"] = r.rhs;
        o["ratio"] = r.excluded ? Json(nullptr) : Json(r.ratio);
        o["excluded"] = r.excluded;
        if (!r.extra.empty()) o["extra"] = r.extra;
        rs.push_back(std::move(o));
    }
    j["rows"] = std::move(rs);
    Json s;
    s["rows_used"] = summary.rows_used;
    s["min_ratio"] = summary.min_ratio;
    s["max_ratio"] = summary.max_ratio;
    s["mean_ratio"] = summary.mean_ratio;
    s["spread"] = std::isfinite(summary.spread) ? Json(summary.spread) : Json(nullptr);
    s["relative_spread"] = summary.relative_spread;
    s["cov"] = summary.cov;
    j["summary"] = std::move(s);
    j["diagnostics"] = diagnostics;
    return j;
}

void ExperimentReport::write_csv(std::ostream& os) const {
    CsvWriter csv(os);
    csv.row({"experiment", "id", "lhs", "rhs", "ratio", "excluded"});
    for (const auto& r : rows) {
        csv.row({name, r.id, format_double(r.lhs), format_double(r.rhs), r.excluded ? "" : format_double(r.ratio),
                 r.excluded ? "1" : "0"});
    }
}

namespace {

bool is_constant(const GridFunction& f) { return f.size() == 0 || f.maxCoeff() == f.minCoeff(); }

void require_interior(const GridSpec& spec, const SampledFunction& f) {
    if (!is_interior_supported(spec, f.values, 1)) {
        throw std::invalid_argument("test function '" + f.id + "' is not supported inside the grid");
    }
}

template <class F>
std::vector<ExperimentRow> map_rows(std::size_t count, ExecutionPolicy policy, F&& make_row) {
    std::vector<ExperimentRow> rows(count);
    if (!policy.parallel) {
        for (std::size_t i = 0; i < count; ++i) rows[i] = make_row(i);
        return rows;
    }
    std::vector<std::future<ExperimentRow>> jobs;
    jobs.reserve(count);
    for (std::size_t i = 0; i < count; ++i) jobs.push_back(std::async(std::launch::async, make_row, i));
    for (std::size_t i = 0; i < count; ++i) rows[i] = jobs[i].get();
    return rows;
}

double sobolev_exponent(const GridSpec& spec) { return 2.0 * spec.n + 2.0; }

}  // namespace

IndexRange decay_fit_range(const GridSpec& spec, std::size_t spectrum_size) {
    const double resolved = std::pow(0.5 * spec.Nx, kResolvedModeExponent);
    return middle_decade(static_cast<std::size_t>(std::lround(resolved)), spectrum_size);
}

ExperimentReport bound_experiment(const GridModel& model, const std::vector<SampledFunction>& family, int l,
                                  ExecutionPolicy policy) {
    const GridSpec& spec = model.spec();
    const double p = sobolev_exponent(spec);
    bool any = false;
    for (const auto& f : family) {
        if (is_constant(f.values)) continue;
        require_interior(spec, f);
        any = true;
    }
    if (!any) throw std::invalid_argument("bound_experiment: degenerate family (all members constant)");
    model.riesz(l);

    ExperimentReport rep;
    rep.name = "bound";
    rep.config_digest = spec.digest();
    rep.rows = map_rows(family.size(), policy, [&](std::size_t i) {
        const SampledFunction& f = family[i];
        ExperimentRow row;
        row.id = f.id;
        if (is_constant(f.values)) {
            row.excluded = true;
            return row;
        }
        const SingularSpectrum s = model.commutator_spectrum(l, f.values);
        row.lhs = weak_quasinorm(s, p);
        row.rhs = sobolev_seminorm(spec, model.fields(), f.values, p);
        row.ratio = row.lhs / row.rhs;
        const WeakFit fit = fit_weak(s, p, decay_fit_range(spec, s.size()));
        row.extra["slope"] = fit.slope;
        row.extra["fit_lo"] = fit.fit_range.lo;
        row.extra["fit_hi"] = fit.fit_range.hi;
        return row;
    });
    rep.recompute_summary();
    rep.diagnostics["riesz_norm"] = model.riesz_norm(l);
    rep.diagnostics["target_slope"] = -1.0 / p;
    return rep;
}

DixmierValue dixmier_from_spectrum(const SingularSpectrum& s, int n) {
    const SingularSpectrum pw = s.power(2.0 * n + 2.0);
    const std::size_t usable = pw.nonzero_count();
    if (usable < kMinDixmierWindow) {
        throw std::invalid_argument("dixmier_lhs: only " + std::to_string(usable) + " usable singular values");
    }
    DixmierValue out;
    out.window = usable;
    out.value = dixmier_approximant(pw, usable);
    out.band_lo = out.band_hi = out.value;
    for (std::size_t w : {usable / 4, usable / 2}) {
        const double v = dixmier_approximant(pw, w);
        out.band_lo = std::min(out.band_lo, v);
        out.band_hi = std::max(out.band_hi, v);
    }
    return out;
}

DixmierValue dixmier_lhs(const GridModel& model, const GridFunction& f, int l) {
    if (is_constant(f)) return {};
    if (!is_interior_supported(model.spec(), f, 1)) throw std::invalid_argument("dixmier_lhs: f not interior-supported");
    return dixmier_from_spectrum(model.commutator_spectrum(l, f), model.spec().n);
}

YSymbolSet build_y_fibers(const BasisPtr& basis, int l) {
    if (!basis) throw std::invalid_argument("build_y_fibers: null basis");
    if (basis->K() < 4) throw std::invalid_argument("build_y_fibers: need K >= 4");
    const int n = basis->n();
    if (l < 1 || l > 2 * n) throw std::out_of_range("build_y_fibers: Riesz index out of range");
    YSymbolSet out;
    out.l = l;
    out.K = basis->K();
    const FiberOperator y0 = FiberOperator::tensor_one(basis, oscillator_power(*basis, -0.5));
    const FiberOperator r = riesz_symbol(basis, l);
    out.y.push_back(y0);
    for (int k = 1; k <= 2 * n; ++k) out.y.push_back(y0 * fiber_adjoint(r * build_a_fiber(basis, k)));
    return out;
}

namespace {

void check_y(const GridModel& model, const YSymbolSet& y) {
    if (y.y.empty()) throw std::invalid_argument("bochner_rhs: empty symbol set");
    for (const auto& v : y.y) {
        if (!v.basis || !(*v.basis == *y.y.front().basis)) throw std::invalid_argument("bochner_rhs: basis mismatch");
    }
    if (static_cast<int>(y.y.size()) != 2 * model.spec().n + 1) {
        throw std::invalid_argument("bochner_rhs: expected 2n + 1 symbols");
    }
}

// sum_points vol * || sum_k c_k(g) z_k ||^p over the given coefficient columns.
double bochner_sum(const GridSpec& spec, const std::vector<GridFunction>& coeff, const std::vector<FiberOperator>& z) {
    const double p = 2.0 * spec.n + 2.0;
    double total = 0.0;
    const Eigen::Index d = coeff.front().size();
    for (Eigen::Index g = 0; g < d; ++g) {
        FiberOperator acc = FiberOperator::zero(z.front().basis);
        bool any = false;
        for (std::size_t k = 0; k < z.size(); ++k) {
            const double c = coeff[k](g);
            if (c == 0.0) continue;
            acc.minus += c * z[k].minus;
            acc.plus += c * z[k].plus;
            any = true;
        }
        if (any) total += fiber_schatten_power(acc, p);
    }
    return total * spec.cell_volume();
}

}  // namespace

double bochner_rhs(const GridModel& model, const GridFunction& f, const YSymbolSet& y) {
    check_y(model, y);
    const auto grads = horizontal_gradient(model.fields(), f);
    std::vector<GridFunction> coeff;
    coeff.push_back(grads.at(static_cast<std::size_t>(y.l - 1)));
    for (const auto& g : grads) coeff.push_back(g);
    return bochner_sum(model.spec(), coeff, y.y);
}

double bochner_rhs_x(const GridModel& model, const GridFunction& f, const YSymbolSet& y) {
    check_y(model, y);
    std::vector<FiberOperator> x(y.y.begin() + 1, y.y.end());
    x.at(static_cast<std::size_t>(y.l - 1)) = x[static_cast<std::size_t>(y.l - 1)] + y.y.front();
    return bochner_sum(model.spec(), horizontal_gradient(model.fields(), f), x);
}

GramReport gram_min_eigenvalue(const std::vector<FiberOperator>& y, int samples, std::uint64_t seed) {
    if (y.empty()) throw std::invalid_argument("gram_min_eigenvalue: empty set");
    const auto m = static_cast<Eigen::Index>(y.size());
    GramReport out;
    out.gram.resize(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        const FiberOperator yj = fiber_adjoint(y[static_cast<std::size_t>(j)]);
        for (Eigen::Index k = 0; k < m; ++k) out.gram(j, k) = tr_sigma(yj * y[static_cast<std::size_t>(k)]);
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(out.gram, Eigen::EigenvaluesOnly);
    out.min_eigenvalue = es.eigenvalues()(0);
    out.independent = out.min_eigenvalue > 1e-12;

    const double p = 2.0 * y.front().basis->n() + 2.0;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    double best = std::numeric_limits<double>::infinity();
    for (int s = 0; s < samples; ++s) {
        FiberOperator acc = FiberOperator::zero(y.front().basis);
        double l1 = 0.0;
        for (const auto& v : y) {
            const double a = nd(rng);
            acc.minus += a * v.minus;
            acc.plus += a * v.plus;
            l1 += std::abs(a);
        }
        best = std::min(best, fiber_schatten_norm(acc, p) / l1);
    }
    out.coercivity = samples > 0 ? best : 0.0;
    return out;
}

ExperimentReport trace_formula_experiment(const GridModel& model, const std::vector<SampledFunction>& family, int l,
                                          const BasisPtr& basis, ExecutionPolicy policy) {
    const GridSpec& spec = model.spec();
    if (family.size() < 3) throw std::invalid_argument("trace_formula_experiment: need at least 3 functions");
    for (const auto& f : family) {
        if (!is_constant(f.values)) require_interior(spec, f);
    }
    const YSymbolSet y = build_y_fibers(basis, l);
    model.riesz(l);

    ExperimentReport rep;
    rep.name = "trace";
    rep.config_digest = spec.digest();
    rep.rows = map_rows(family.size(), policy, [&](std::size_t i) {
        const SampledFunction& f = family[i];
        ExperimentRow row;
        row.id = f.id;
        if (is_constant(f.values)) {
            row.excluded = true;
            return row;
        }
        const DixmierValue d = dixmier_lhs(model, f.values, l);
        row.lhs = d.value;
        row.rhs = bochner_rhs(model, f.values, y);
        row.extra["band_lo"] = d.band_lo;
        row.extra["band_hi"] = d.band_hi;
        row.extra["relative_band"] = d.relative_band();
        row.extra["window"] = d.window;
        if (row.rhs == 0.0) {
            row.excluded = true;
            row.extra["inconsistent"] = row.lhs != 0.0;
            return row;
        }
        row.ratio = row.lhs / row.rhs;
        return row;
    });
    rep.recompute_summary();
    Json inconsistent = Json::array();
    double band = 0.0;
    for (const auto& r : rep.rows) {
        if (r.extra.contains("inconsistent") && r.extra["inconsistent"].get<bool>()) inconsistent.push_back(r.id);
        if (r.extra.contains("relative_band")) band = std::max(band, r.extra["relative_band"].get<double>());
    }
    rep.diagnostics["inconsistent_rows"] = inconsistent;
    rep.diagnostics["max_relative_band"] = band;
    rep.diagnostics["K"] = basis->K();
    return rep;
}

namespace {

int parse_index(const std::string& name, const std::string& prefix) {
    std::size_t used = 0;
    int v = 0;
    try {
        v = std::stoi(name.substr(prefix.size()), &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("product operator: bad index in '" + name + "'");
    }
    if (used != name.size() - prefix.size()) throw std::invalid_argument("product operator: bad index in '" + name + "'");
    return v;
}

bool starts_with(const std::string& s, const std::string& p) { return s.rfind(p, 0) == 0; }

}  // namespace

GridOperator product_grid_operator(const GridModel& model, const std::string& name) {
    const GridOperator& s = model.inv_sqrt();
    if (name == "y0") return s;
    if (starts_with(name, "riesz:")) return model.riesz(parse_index(name, "riesz:")) * s;
    if (starts_with(name, "a:")) return model.a_operator(parse_index(name, "a:")) * s;
    if (name == "identity") throw std::invalid_argument("product operator 'identity' has no grid realization");
    throw std::invalid_argument("unknown product operator '" + name + "'");
}

FiberOperator product_fiber_operator(const BasisPtr& basis, const std::string& name) {
    const FiberOperator y0 = FiberOperator::tensor_one(basis, oscillator_power(*basis, -0.5));
    if (name == "y0") return y0;
    if (name == "identity") return FiberOperator::identity(basis);
    if (starts_with(name, "riesz:")) return riesz_symbol(basis, parse_index(name, "riesz:")) * y0;
    if (starts_with(name, "a:")) return build_a_fiber(basis, parse_index(name, "a:")) * y0;
    throw std::invalid_argument("no fiber counterpart for product operator '" + name + "'");
}

namespace {

void check_tuple(const GridSpec& spec, const ProductTuple& t) {
    const std::size_t m = static_cast<std::size_t>(2 * spec.n + 2);
    if (t.f.size() != m || t.x.size() != m) {
        throw std::invalid_argument("product tuple '" + t.id + "' needs " + std::to_string(m) + " functions and operators");
    }
}

}  // namespace

double product_rhs(const GridSpec& spec, const ProductTuple& t, const BasisPtr& basis) {
    check_tuple(spec, t);
    GridFunction prod = GridFunction::Ones(static_cast<Eigen::Index>(spec.dim()));
    for (const auto& f : t.f) prod.array() *= f.values.array();
    const double integral = prod.sum() * spec.cell_volume();
    FiberOperator acc = FiberOperator::identity(basis);
    for (std::size_t k = 0; k < t.x.size(); ++k) {
        const FiberOperator x = product_fiber_operator(basis, t.x[k]);
        acc = acc * (k % 2 == 0 ? fiber_adjoint(x) : x);
    }
    return integral * tr_sigma(acc).real();
}

double product_lhs(const GridModel& model, const ProductTuple& t) {
    check_tuple(model.spec(), t);
    const auto d = static_cast<Eigen::Index>(model.spec().dim());
    RMatrix acc = RMatrix::Identity(d, d);
    for (std::size_t k = 0; k < t.x.size(); ++k) {
        // A = M_f G; its adjoint is G^T M_f for real f.
        const GridOperator g = product_grid_operator(model, t.x[k]);
        const GridFunction& f = t.f[k].values;
        if (k % 2 == 0) {
            acc = (acc * g.transpose()) * f.asDiagonal();
        } else {
            acc = acc * (f.asDiagonal() * g);
        }
    }
    const CVector ev = general_eigenvalues(acc);
    const double top = ev.size() ? ev.cwiseAbs().maxCoeff() : 0.0;
    if (top == 0.0) return 0.0;
    std::size_t usable = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (std::abs(ev(i)) > kSpectrumClamp * top) ++usable;
    }
    return dixmier_eigen_approximant(ev, std::max<std::size_t>(usable, 1));
}

ExperimentReport product_trace_check(const GridModel& model, const std::vector<ProductTuple>& tuples,
                                     const BasisPtr& basis) {
    if (tuples.size() < 3) throw std::invalid_argument("product_trace_check: need at least 3 tuples");
    ExperimentReport rep;
    rep.name = "product";
    rep.config_digest = model.spec().digest();
    for (const auto& t : tuples) {
        for (const auto& x : t.x) product_fiber_operator(basis, x);
        ExperimentRow row;
        row.id = t.id;
        row.rhs = product_rhs(model.spec(), t, basis);
        row.lhs = product_lhs(model, t);
        if (row.rhs == 0.0) {
            row.excluded = true;
        } else {
            row.ratio = row.lhs / row.rhs;
        }
        rep.rows.push_back(std::move(row));
    }
    rep.recompute_summary();
    rep.diagnostics["K"] = basis->K();
    return rep;
}

}  // namespace heislab
