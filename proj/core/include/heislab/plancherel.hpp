#pragma once

#include "heislab/hermite.hpp"
#include "heislab/io.hpp"

#include <functional>
#include <vector>

namespace heislab {

// Plancherel constant; see README ("Normalisation").
inline constexpr double kPlancherelConstant = 1.0;

struct QuadratureSpec {
    double s_min = 1e-6;
    double s_max = 1e2;
    int nodes_per_decade = 32;
    int order = 8;  // Gauss-Legendre nodes per panel

    static QuadratureSpec from_json(const Json& j);
    Json to_json() const;
};

// Signed nodes, symmetric under s -> -s, weights c_n |s|^n ds.
struct PlancherelQuadrature {
    int n = 1;
    std::vector<double> nodes;
    std::vector<double> weights;

    static PlancherelQuadrature build(int n, const QuadratureSpec& spec);
    std::size_t size() const { return nodes.size(); }
};

struct DirectIntegralOperator {
    PlancherelQuadrature quadrature;
    std::vector<CMatrix> blocks;
};

using RadialProfile = std::function<double(double)>;

// Block at s_i: x_{sgn s_i} * m(s_i) * g(H |s_i|), g applied to the diagonal.
DirectIntegralOperator lift(const FiberOperator& x, const PlancherelQuadrature& q, const RadialProfile& m);
DirectIntegralOperator lift(const FiberOperator& x, const PlancherelQuadrature& q, const RadialProfile& m,
                            const std::function<double(double)>& g);
// Model of -Delta: diag((2|alpha| + n)|s_i|).
DirectIntegralOperator sublaplacian_model(const BasisPtr& b, const PlancherelQuadrature& q);

DirectIntegralOperator operator*(const DirectIntegralOperator& a, const DirectIntegralOperator& b);

// sum_i w_i trace(block_i).
cplx tau(const DirectIntegralOperator& y);

struct RadialIntegral {
    double value = 0.0;
    double error_estimate = 0.0;
    int panels = 0;
};
// int_0^inf g(s) s^n ds by adaptive Gauss-Legendre on doubling panels.
RadialIntegral tau_radial(const RadialProfile& g, int n, double tol = 1e-12);

struct WeakNormLift {
    std::vector<double> sigmas;  // singular values of both blocks
    double norm_power = 0.0;     // ||x||_{2n+2}^{2n+2} w.r.t. Tr (x) Sigma
    double quasinorm = 0.0;      // analytic weak-L_{2n+2} quasinorm
    int n = 1;

    // d(t) = c_n sum sigma^{2n+2} t^{-(2n+2)} / (n+1)
    double distribution(double t) const;
};

WeakNormLift weak_norm_lift(const FiberOperator& x, int n);

struct BruteForceWeakNorm {
    double quasinorm = 0.0;
    double max_distribution_error = 0.0;  // relative, over the sampled t
};
// Per singular value: locate the window {s : sigma s^{-1/2} > t} by bisection,
// integrate c_n s^n over it with Gauss-Legendre, then invert d numerically.
BruteForceWeakNorm weak_norm_brute_force(const WeakNormLift& w, int samples = 24);

struct IncursionReport {
    int n = 1;
    std::vector<double> s;             // threshold samples in (0, 1)
    std::vector<double> distribution;  // d(s)
    std::vector<double> mu;            // mu(d(s)) by numerical inversion
    double fitted_exponent = 0.0;
};

double incursion_distribution(int n, double s);
IncursionReport incursion_profile(int n, const std::vector<double>& samples);

void write_incursion_csv(std::ostream& os, const IncursionReport& r);

}  // namespace heislab
