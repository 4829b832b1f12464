#pragma once

#include "heislab/hermite.hpp"
#include "heislab/linalg.hpp"

#include <functional>
#include <random>
#include <stdexcept>
#include <string>

namespace heislab {

// Eigenvalues nondecreasing, eigenvectors orthonormal columns.
struct SpectralDecomposition {
    RVector eigenvalues;
    CMatrix eigenvectors;

    Eigen::Index dim() const { return eigenvalues.size(); }
    CMatrix reconstruct() const;

    static SpectralDecomposition of_hermitian(const CMatrix& a);
    // Diagonal operator; entries must already be nondecreasing.
    static SpectralDecomposition of_diagonal(const RVector& d);
};

class SingularSymbolError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Real-valued symbol phi(lambda, mu) with a name usable from the CLI.
struct Symbol {
    std::string name;
    std::function<double(double, double)> eval;

    double operator()(double l, double m) const { return eval(l, m); }
};

namespace symbols {
Symbol frac_lambda();
Symbol sgn_diff();
Symbol min_over_sum();
Symbol psi();
Symbol F_divided();
Symbol phi_n(double m);
Symbol constant(double c);
Symbol custom(std::string name, std::function<double(double, double)> f);
Symbol product(const Symbol& a, const Symbol& b);
Symbol linear(double alpha, const Symbol& a, double beta, const Symbol& b);
}  // namespace symbols

// frac_lambda | sgn_diff | min_over_sum | psi | F_divided | phi_n:<m>
Symbol parse_symbol(const std::string& text);

double psi_value(double a, double b);
double F_value(double x);
double F_derivative(double x);
// Divided difference of F(x) = x atan x; derivative at the midpoint when
// |x - y| < 1e-8.
double F_divided_difference(double x, double y);
double phi_n_symbol(double a0, double a1, double m);

// Schur multiplier phi(lambda_i, mu_j) in the two eigenbases.
CMatrix doi_apply(const SpectralDecomposition& d0, const SpectralDecomposition& d1, const Symbol& phi,
                  const CMatrix& a);
// Entry matrix phi(lambda_i, mu_j); throws SingularSymbolError on a bad pair.
RMatrix symbol_matrix(const RVector& l0, const RVector& l1, const Symbol& phi);

// doi_apply with sgn(lambda - mu), sgn(0) = 0.
CMatrix triangular_truncation(const SpectralDecomposition& d, const CMatrix& a);

// Fiber form of a_k, k in 1..2n.
FiberOperator build_a_fiber(BasisPtr b, int k);

struct ResolventQuadrature {
    double lambda_max = 1e3;
    int nodes = 256;  // total Gauss-Legendre nodes on [0, lambda_max]
};

// Integral over [-m, m] of (l A^{1/4}/(l^2+A)) V (l A^{1/4}/(l^2+A)) dl.
CMatrix resolvent_quadrature_A(const CMatrix& v, const SpectralDecomposition& a, const ResolventQuadrature& q);

// Max ||T_phi(A)|| / ||A|| over random Gaussian samples.
double schur_norm_ratio(const SpectralDecomposition& d0, const SpectralDecomposition& d1, const Symbol& phi,
                        int samples, std::mt19937_64& rng);

// Standard complex Gaussian matrix (independent N(0,1/2) real and imaginary parts).
CMatrix random_gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng);
CMatrix random_hermitian(Eigen::Index n, std::mt19937_64& rng);
CMatrix random_unitary(Eigen::Index n, std::mt19937_64& rng);
// Hermitian with spectrum drawn uniformly from [lo, hi].
CMatrix random_hermitian_in(Eigen::Index n, double lo, double hi, std::mt19937_64& rng);

}  // namespace heislab
