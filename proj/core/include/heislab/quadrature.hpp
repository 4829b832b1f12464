#pragma once

#include <functional>
#include <vector>

namespace heislab {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// n-point Gauss-Legendre rule on [-1, 1].
QuadratureRule gauss_legendre(int n);

// Composite Gauss-Legendre on the given breakpoints, `order` nodes per panel.
QuadratureRule composite_gauss_legendre(const std::vector<double>& breaks, int order);

// Breakpoints 0, b0, 2 b0, 4 b0, ..., hi (doubling panels).
std::vector<double> doubling_breaks(double b0, double hi);

double integrate(const QuadratureRule& rule, const std::function<double(double)>& f);

}  // namespace heislab
