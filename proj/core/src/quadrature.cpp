#include "heislab/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace heislab {

namespace {

// P_n(x) and P_n'(x) by the three-term recurrence (n >= 2).
void legendre(int n, double x, double& p, double& dp) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    p = p1;
    dp = n * (x * p1 - p0) / (x * x - 1.0);
}

}  // namespace

QuadratureRule gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: need at least one node");
    if (n == 1) return QuadratureRule{{0.0}, {2.0}};
    QuadratureRule r;
    r.nodes.resize(static_cast<std::size_t>(n));
    r.weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Tricomi initial guess, then Newton.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double p = 0.0, dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            legendre(n, x, p, dp);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        legendre(n, x, p, dp);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.nodes[static_cast<std::size_t>(i)] = -x;
        r.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
        r.weights[static_cast<std::size_t>(i)] = w;
        r.weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    if (n % 2 == 1) r.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
    return r;
}

QuadratureRule composite_gauss_legendre(const std::vector<double>& breaks, int order) {
    if (breaks.size() < 2) throw std::invalid_argument("composite_gauss_legendre: need two breakpoints");
    const QuadratureRule base = gauss_legendre(order);
    QuadratureRule r;
    for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
        const double a = breaks[p], b = breaks[p + 1];
        if (!(b > a)) throw std::invalid_argument("composite_gauss_legendre: breakpoints must increase");
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        for (std::size_t i = 0; i < base.nodes.size(); ++i) {
            r.nodes.push_back(mid + half * base.nodes[i]);
            r.weights.push_back(half * base.weights[i]);
        }
    }
    return r;
}

std::vector<double> doubling_breaks(double b0, double hi) {
    if (!(b0 > 0.0) || !(hi > 0.0)) throw std::invalid_argument("doubling_breaks: bounds must be positive");
    std::vector<double> br{0.0};
    double b = std::min(b0, hi);
    while (b < hi) {
        br.push_back(b);
        b *= 2.0;
    }
    br.push_back(hi);
    return br;
}

double integrate(const QuadratureRule& rule, const std::function<double(double)>& f) {
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) acc += rule.weights[i] * f(rule.nodes[i]);
    return acc;
}

}  // namespace heislab
