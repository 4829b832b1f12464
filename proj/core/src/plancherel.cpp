#include "heislab/plancherel.hpp"

#include "heislab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace heislab {

QuadratureSpec QuadratureSpec::from_json(const Json& j) {
    QuadratureSpec q;
    q.s_min = j.value("s_min", q.s_min);
    q.s_max = j.value("s_max", q.s_max);
    q.nodes_per_decade = j.value("nodes_per_decade", q.nodes_per_decade);
    q.order = j.value("order", q.order);
    if (!(q.s_min > 0.0) || !(q.s_max > q.s_min)) throw std::invalid_argument("quadrature: need 0 < s_min < s_max");
    if (q.nodes_per_decade < 1 || q.order < 1) throw std::invalid_argument("quadrature: node counts must be positive");
    return q;
}

Json QuadratureSpec::to_json() const {
    Json j;
    j["s_min"] = s_min;
    j["s_max"] = s_max;
    j["nodes_per_decade"] = nodes_per_decade;
    j["order"] = order;
    return j;
}

PlancherelQuadrature PlancherelQuadrature::build(int n, const QuadratureSpec& spec) {
    if (n < 1) throw std::invalid_argument("PlancherelQuadrature: n must be >= 1");
    if (!(spec.s_min > 0.0) || !(spec.s_max > spec.s_min)) {
        throw std::invalid_argument("PlancherelQuadrature: need 0 < s_min < s_max");
    }
    const int panels_per_decade = std::max(1, spec.nodes_per_decade / spec.order);
    const double decades = std::log10(spec.s_max / spec.s_min);
    const int panels = std::max(1, static_cast<int>(std::ceil(decades * panels_per_decade - 1e-9)));
    std::vector<double> breaks(static_cast<std::size_t>(panels) + 1);
    for (int p = 0; p <= panels; ++p) {
        breaks[static_cast<std::size_t>(p)] = spec.s_min * std::pow(spec.s_max / spec.s_min, static_cast<double>(p) / panels);
    }
    breaks.back() = spec.s_max;
    const QuadratureRule half = composite_gauss_legendre(breaks, spec.order);

    PlancherelQuadrature q;
    q.n = n;
    // Negative half first (mirrored), then positive: a fixed summation order.
    for (std::size_t i = half.nodes.size(); i-- > 0;) {
        q.nodes.push_back(-half.nodes[i]);
        q.weights.push_back(kPlancherelConstant * std::pow(half.nodes[i], n) * half.weights[i]);
    }
    for (std::size_t i = 0; i < half.nodes.size(); ++i) {
        q.nodes.push_back(half.nodes[i]);
        q.weights.push_back(kPlancherelConstant * std::pow(half.nodes[i], n) * half.weights[i]);
    }
    return q;
}

DirectIntegralOperator lift(const FiberOperator& x, const PlancherelQuadrature& q, const RadialProfile& m) {
    return lift(x, q, m, nullptr);
}

DirectIntegralOperator lift(const FiberOperator& x, const PlancherelQuadrature& q, const RadialProfile& m,
                            const std::function<double(double)>& g) {
    DirectIntegralOperator y{q, {}};
    y.blocks.reserve(q.size());
    const RVector h = oscillator_diagonal(*x.basis);
    for (double s : q.nodes) {
        const double ms = m(s);
        if (!std::isfinite(ms)) throw std::domain_error("lift: radial profile singular at a node");
        CMatrix blk = (s < 0.0 ? x.minus : x.plus) * ms;
        if (g) {
            RVector gd(h.size());
            for (Eigen::Index i = 0; i < h.size(); ++i) gd(i) = g(h(i) * std::abs(s));
            blk = blk * gd.cast<cplx>().asDiagonal();
        }
        y.blocks.push_back(std::move(blk));
    }
    return y;
}

DirectIntegralOperator sublaplacian_model(const BasisPtr& b, const PlancherelQuadrature& q) {
    DirectIntegralOperator y{q, {}};
    const RVector h = oscillator_diagonal(*b);
    for (double s : q.nodes) y.blocks.push_back((h * std::abs(s)).cast<cplx>().asDiagonal());
    return y;
}

DirectIntegralOperator operator*(const DirectIntegralOperator& a, const DirectIntegralOperator& b) {
    if (a.blocks.size() != b.blocks.size() || a.quadrature.nodes != b.quadrature.nodes) {
        throw std::invalid_argument("DirectIntegralOperator product: quadrature mismatch");
    }
    DirectIntegralOperator y{a.quadrature, {}};
    y.blocks.reserve(a.blocks.size());
    for (std::size_t i = 0; i < a.blocks.size(); ++i) y.blocks.push_back(a.blocks[i] * b.blocks[i]);
    return y;
}

cplx tau(const DirectIntegralOperator& y) {
    if (y.blocks.size() != y.quadrature.size()) throw std::invalid_argument("tau: block count mismatch");
    cplx acc = 0.0;
    for (std::size_t i = 0; i < y.blocks.size(); ++i) acc += y.quadrature.weights[i] * y.blocks[i].trace();
    if (!std::isfinite(acc.real()) || !std::isfinite(acc.imag())) {
        throw std::domain_error("tau: weighted sum is not integrable");
    }
    return acc;
}

namespace {

struct PanelSum {
    double value;
    double error;
    int panels;
};

// Adaptive bisection with a 10/20-point Gauss-Legendre pair.
PanelSum adaptive_panel(const std::function<double(double)>& f, double a, double b, double tol, int depth,
                        const QuadratureRule& lo, const QuadratureRule& hi) {
    auto apply = [&](const QuadratureRule& r) {
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        double acc = 0.0;
        for (std::size_t i = 0; i < r.nodes.size(); ++i) acc += r.weights[i] * f(mid + half * r.nodes[i]);
        return half * acc;
    };
    const double coarse = apply(lo);
    const double fine = apply(hi);
    const double err = std::abs(fine - coarse);
    if (err <= tol || depth >= 40) return {fine, err, 1};
    const double mid = 0.5 * (a + b);
    auto l = adaptive_panel(f, a, mid, 0.5 * tol, depth + 1, lo, hi);
    auto r = adaptive_panel(f, mid, b, 0.5 * tol, depth + 1, lo, hi);
    return {l.value + r.value, l.error + r.error, l.panels + r.panels};
}

}  // namespace

RadialIntegral tau_radial(const RadialProfile& g, int n, double tol) {
    if (n < 1) throw std::invalid_argument("tau_radial: n must be >= 1");
    static const QuadratureRule lo = gauss_legendre(10);
    static const QuadratureRule hi = gauss_legendre(20);
    auto f = [&](double s) { return g(s) * std::pow(s, n); };
    RadialIntegral out;
    double a = 0.0, b = 1.0;
    int quiet = 0;
    while (true) {
        const PanelSum p = adaptive_panel(f, a, b, tol, 0, lo, hi);
        if (!std::isfinite(p.value)) throw std::domain_error("tau_radial: integrand is not finite");
        out.value += p.value;
        out.error_estimate += p.error;
        out.panels += p.panels;
        // Stop after three consecutive negligible doubling panels.
        quiet = std::abs(p.value) <= tol * std::max(1.0, std::abs(out.value)) ? quiet + 1 : 0;
        if (quiet >= 3) break;
        a = b;
        b *= 2.0;
        if (b > 1e15) throw std::domain_error("tau_radial: integrand not integrable against s^n ds");
    }
    return out;
}

double WeakNormLift::distribution(double t) const {
    if (!(t > 0.0)) throw std::invalid_argument("distribution: t must be positive");
    const double p = 2.0 * n + 2.0;
    return kPlancherelConstant * norm_power * std::pow(t, -p) / (n + 1.0);
}

WeakNormLift weak_norm_lift(const FiberOperator& x, int n) {
    if (n != x.basis->n()) throw std::invalid_argument("weak_norm_lift: dimension mismatch");
    WeakNormLift w;
    w.n = n;
    const double p = 2.0 * n + 2.0;
    for (const CMatrix* blk : {&x.minus, &x.plus}) {
        const RVector s = complex_singular_values(*blk);
        for (Eigen::Index i = 0; i < s.size(); ++i) {
            if (s(i) > 0.0) w.sigmas.push_back(s(i));
        }
    }
    std::sort(w.sigmas.begin(), w.sigmas.end(), std::greater<>());
    for (double s : w.sigmas) w.norm_power += std::pow(s, p);
    w.quasinorm = std::pow(kPlancherelConstant / (n + 1.0), 1.0 / p) * std::pow(w.norm_power, 1.0 / p);
    return w;
}

BruteForceWeakNorm weak_norm_brute_force(const WeakNormLift& w, int samples) {
    BruteForceWeakNorm out;
    if (w.sigmas.empty()) return out;
    const int n = w.n;
    const double p = 2.0 * n + 2.0;
    const QuadratureRule gl = gauss_legendre(n + 2);

    auto d_brute = [&](double t) {
        double acc = 0.0;
        for (double sigma : w.sigmas) {
            // Largest s with sigma s^{-1/2} > t, found by bisection on a bracket.
            double lo = 0.0, hi = 1.0;
            while (sigma / std::sqrt(hi) > t) hi *= 2.0;
            for (int it = 0; it < 200 && hi - lo > 1e-17 * hi; ++it) {
                const double mid = 0.5 * (lo + hi);
                (sigma / std::sqrt(mid) > t ? lo : hi) = mid;
            }
            const double edge = 0.5 * (lo + hi);
            double integral = 0.0;
            for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
                const double s = 0.5 * edge * (gl.nodes[i] + 1.0);
                integral += 0.5 * edge * gl.weights[i] * std::pow(s, n);
            }
            acc += kPlancherelConstant * integral;
        }
        return acc;
    };

    // mu(u) = inf{t : d(t) <= u}; d is decreasing so bisect in log t.
    auto mu_brute = [&](double u) {
        double hi = 1.0;
        while (d_brute(hi) > u) hi *= 2.0;
        double lo = hi;
        while (d_brute(lo) <= u) lo *= 0.5;
        for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            (d_brute(mid) > u ? lo : hi) = mid;
        }
        return hi;
    };

    // Sample t across the range where d spans several decades.
    const double t0 = w.sigmas.front();
    for (int k = 0; k < samples; ++k) {
        const double t = t0 * std::pow(10.0, -1.0 + 2.0 * k / std::max(1, samples - 1));
        const double exact = w.distribution(t);
        out.max_distribution_error = std::max(out.max_distribution_error, std::abs(d_brute(t) - exact) / exact);
        const double u = exact;
        out.quasinorm = std::max(out.quasinorm, std::pow(u, 1.0 / p) * mu_brute(u));
    }
    return out;
}

double incursion_distribution(int n, double s) {
    if (!(s > 0.0) || !(s < 1.0)) throw std::invalid_argument("incursion_distribution: s must lie in (0, 1)");
    const double q = std::pow(1.0 - s, 4);
    return std::pow(q / (1.0 - q), n + 1) / (n + 1.0);
}

IncursionReport incursion_profile(int n, const std::vector<double>& samples) {
    if (n < 1) throw std::invalid_argument("incursion_profile: n must be >= 1");
    if (samples.size() < 2) throw std::invalid_argument("incursion_profile: need at least two samples");
    IncursionReport r;
    r.n = n;
    for (double s : samples) {
        const double d = incursion_distribution(n, s);
        // Invert the decreasing map s -> d(s) by bisection on (0, 1).
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= 0.0 || mid >= 1.0) break;
            (incursion_distribution(n, mid) > d ? lo : hi) = mid;
        }
        r.s.push_back(s);
        r.distribution.push_back(d);
        r.mu.push_back(hi);
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(r.s.size());
    for (std::size_t i = 0; i < r.s.size(); ++i) {
        const double x = std::log(r.distribution[i]);
        const double y = std::log(r.mu[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    r.fitted_exponent = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    return r;
}

void write_incursion_csv(std::ostream& os, const IncursionReport& r) {
    CsvWriter csv(os);
    csv.row({"t", "distribution", "mu"});
    for (std::size_t i = 0; i < r.s.size(); ++i) {
        csv.row({format_double(r.s[i]), format_double(r.distribution[i]), format_double(r.mu[i])});
    }
}

}  // namespace heislab
