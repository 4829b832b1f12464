#include "heislab/families.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace heislab {

namespace {

// 1 on [0, 0.5], 0 from 1 on, quintic smoothstep between (C^2).
double taper(double u) {
    u = std::abs(u);
    if (u <= 0.5) return 1.0;
    if (u >= 1.0) return 0.0;
    const double s = 2.0 * (1.0 - u);
    return s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

// Support box of every shipped bump. Fits strictly inside the [-2, 2]^2 x [-1, 1]
// box from 11 nodes per axis upward.
constexpr double kBoxXY = 1.6;
constexpr double kBoxT = 0.8;

}  // namespace

TestFunction gaussian_bump(std::string id, double cx, double cy, double ct, double s, double tau, double a, double b) {
    if (!(s > 0.0) || !(tau > 0.0) || !(a > 0.0) || !(b > 0.0)) {
        throw std::invalid_argument("gaussian_bump: widths must be positive");
    }
    return {std::move(id), [=](double x, double y, double t) {
                const double dx = x - cx, dy = y - cy, dt = t - ct;
                const double g = std::exp(-(dx * dx + dy * dy) / (2.0 * s * s) - dt * dt / (2.0 * tau * tau));
                return g * taper(x / a) * taper(y / a) * taper(t / b);
            }};
}

TestFunction constant_function(std::string id, double c) {
    return {std::move(id), [c](double, double, double) { return c; }};
}

TestFunction scaled(std::string id, const TestFunction& f, double c) {
    return {std::move(id), [c, g = f.eval](double x, double y, double t) { return c * g(x, y, t); }};
}

Family named_family(const std::string& name) {
    const auto bump = [](std::string id, double cx, double cy, double ct, double s, double tau) {
        return gaussian_bump(std::move(id), cx, cy, ct, s, tau, kBoxXY, kBoxT);
    };
    if (name == "bumps5") {
        return {bump("g_center", 0.0, 0.0, 0.0, 0.5, 0.25), bump("g_wide", 0.0, 0.0, 0.0, 0.6, 0.3),
                bump("g_shift_x", 0.3, 0.0, 0.0, 0.5, 0.25), bump("g_shift_xy", -0.2, 0.25, 0.0, 0.55, 0.25),
                bump("g_shift_t", 0.0, 0.0, 0.15, 0.5, 0.25)};
    }
    if (name == "bumps3") {
        return {bump("g_center", 0.0, 0.0, 0.0, 0.5, 0.25), bump("g_wide", 0.0, 0.0, 0.0, 0.6, 0.3),
                bump("g_shift_xy", -0.2, 0.25, 0.0, 0.55, 0.25)};
    }
    if (name == "scaled_pair") {
        const TestFunction f = bump("g_center", 0.0, 0.0, 0.0, 0.5, 0.25);
        return {f, scaled("g_center_x2", f, 2.0)};
    }
    if (name == "constant") return {constant_function("one", 1.0), constant_function("two", 2.0)};
    throw std::invalid_argument("unknown test family '" + name + "'");
}

std::vector<std::string> family_names() { return {"bumps5", "bumps3", "scaled_pair", "constant"}; }

std::vector<SampledFunction> sample_family(const GridSpec& spec, const Family& family) {
    std::vector<SampledFunction> out;
    out.reserve(family.size());
    for (const auto& f : family) out.push_back({f.id, sample(spec, f.eval)});
    return out;
}

}  // namespace heislab
