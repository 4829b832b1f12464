#include "heislab/doi.hpp"

#include "heislab/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace heislab {

CMatrix SpectralDecomposition::reconstruct() const {
    return eigenvectors * eigenvalues.cast<cplx>().asDiagonal() * eigenvectors.adjoint();
}

SpectralDecomposition SpectralDecomposition::of_hermitian(const CMatrix& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("SpectralDecomposition: matrix not square");
    const double scale = std::max(a.norm(), 1.0);
    if ((a - a.adjoint()).norm() > 1e-10 * scale) {
        throw std::invalid_argument("SpectralDecomposition: matrix not self-adjoint");
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(a);
    if (es.info() != Eigen::Success) throw std::runtime_error("SpectralDecomposition: eigensolver failed");
    return SpectralDecomposition{es.eigenvalues(), es.eigenvectors()};
}

SpectralDecomposition SpectralDecomposition::of_diagonal(const RVector& d) {
    for (Eigen::Index i = 1; i < d.size(); ++i) {
        if (d(i) < d(i - 1)) throw std::invalid_argument("SpectralDecomposition: diagonal not sorted");
    }
    return SpectralDecomposition{d, CMatrix::Identity(d.size(), d.size())};
}

double psi_value(double a, double b) {
    if (a < 0.0 || b < 0.0) throw SingularSymbolError("psi: negative argument");
    if (a == 0.0 && b == 0.0) throw SingularSymbolError("psi: undefined at (0, 0)");
    if (a == b) return 1.0;
    return 2.0 * std::pow(a, 0.25) * std::pow(b, 0.25) / (std::sqrt(a) + std::sqrt(b));
}

double F_value(double x) { return x * std::atan(x); }

double F_derivative(double x) { return std::atan(x) + x / (1.0 + x * x); }

double F_divided_difference(double x, double y) {
    if (std::abs(x - y) < 1e-8) return F_derivative(0.5 * (x + y));
    return (F_value(x) - F_value(y)) / (x - y);
}

double phi_n_symbol(double a0, double a1, double m) {
    if (!(a0 > 0.0) || !(a1 > 0.0)) throw std::invalid_argument("phi_n_symbol: spectral arguments must be positive");
    if (!(m > 0.0)) throw std::invalid_argument("phi_n_symbol: cutoff must be positive");
    return psi_value(a0, a1) *
           (std::numbers::pi / 2.0 - F_divided_difference(std::sqrt(a0) / m, std::sqrt(a1) / m));
}

namespace symbols {

Symbol frac_lambda() {
    return {"frac_lambda", [](double l, double m) {
                if (l + m == 0.0) throw SingularSymbolError("frac_lambda: singular at lambda + mu = 0");
                return l / (l + m);
            }};
}

Symbol sgn_diff() {
    return {"sgn_diff", [](double l, double m) { return l > m ? 1.0 : (l < m ? -1.0 : 0.0); }};
}

Symbol min_over_sum() {
    return {"min_over_sum", [](double l, double m) {
                if (l + m == 0.0) throw SingularSymbolError("min_over_sum: singular at lambda + mu = 0");
                return std::min(l, m) / (l + m);
            }};
}

Symbol psi() { return {"psi", psi_value}; }

Symbol F_divided() { return {"F_divided", F_divided_difference}; }

Symbol phi_n(double m) {
    return {"phi_n:" + std::to_string(m), [m](double a, double b) { return phi_n_symbol(a, b, m); }};
}

Symbol constant(double c) {
    return {"constant", [c](double, double) { return c; }};
}

Symbol custom(std::string name, std::function<double(double, double)> f) { return {std::move(name), std::move(f)}; }

Symbol product(const Symbol& a, const Symbol& b) {
    return {a.name + "*" + b.name, [fa = a.eval, fb = b.eval](double l, double m) { return fa(l, m) * fb(l, m); }};
}

Symbol linear(double alpha, const Symbol& a, double beta, const Symbol& b) {
    return {"linear(" + a.name + "," + b.name + ")", [alpha, beta, fa = a.eval, fb = b.eval](double l, double m) {
                return alpha * fa(l, m) + beta * fb(l, m);
            }};
}

}  // namespace symbols

Symbol parse_symbol(const std::string& text) {
    if (text == "frac_lambda") return symbols::frac_lambda();
    if (text == "sgn_diff") return symbols::sgn_diff();
    if (text == "min_over_sum") return symbols::min_over_sum();
    if (text == "psi") return symbols::psi();
    if (text == "F_divided") return symbols::F_divided();
    const std::string prefix = "phi_n:";
    if (text.rfind(prefix, 0) == 0) {
        std::size_t used = 0;
        double m = 0.0;
        try {
            m = std::stod(text.substr(prefix.size()), &used);
        } catch (const std::exception&) {
            throw std::invalid_argument("parse_symbol: bad cutoff in '" + text + "'");
        }
        if (used != text.size() - prefix.size() || !(m > 0.0)) {
            throw std::invalid_argument("parse_symbol: bad cutoff in '" + text + "'");
        }
        return symbols::phi_n(m);
    }
    throw std::invalid_argument("parse_symbol: unknown symbol '" + text + "'");
}

RMatrix symbol_matrix(const RVector& l0, const RVector& l1, const Symbol& phi) {
    RMatrix s(l0.size(), l1.size());
    for (Eigen::Index j = 0; j < l1.size(); ++j) {
        for (Eigen::Index i = 0; i < l0.size(); ++i) {
            const double v = phi(l0(i), l1(j));
            if (!std::isfinite(v)) throw SingularSymbolError(phi.name + ": non-finite value at an eigenvalue pair");
            s(i, j) = v;
        }
    }
    return s;
}

CMatrix doi_apply(const SpectralDecomposition& d0, const SpectralDecomposition& d1, const Symbol& phi,
                  const CMatrix& a) {
    if (a.rows() != d0.dim() || a.cols() != d1.dim()) throw std::invalid_argument("doi_apply: shape mismatch");
    const RMatrix s = symbol_matrix(d0.eigenvalues, d1.eigenvalues, phi);
    CMatrix c = d0.eigenvectors.adjoint() * a * d1.eigenvectors;
    c.array() *= s.array().cast<cplx>();
    return d0.eigenvectors * c * d1.eigenvectors.adjoint();
}

CMatrix triangular_truncation(const SpectralDecomposition& d, const CMatrix& a) {
    return doi_apply(d, d, symbols::sgn_diff(), a);
}

FiberOperator build_a_fiber(BasisPtr b, int k) {
    const int n = b->n();
    if (k < 1 || k > 2 * n) throw std::out_of_range("build_a_fiber: index out of range");
    const CMatrix h_q = oscillator_power(*b, -0.25);
    const CMatrix coord = k <= n ? momentum_matrix(*b, k) : position_matrix(*b, k - n);
    const CMatrix v = I_unit * h_q * coord * h_q;
    const auto h = SpectralDecomposition::of_diagonal(oscillator_diagonal(*b));
    const CMatrix block = doi_apply(h, h, symbols::psi(), v);
    return k <= n ? FiberOperator::tensor_one(std::move(b), block) : FiberOperator::tensor_z(std::move(b), block);
}

CMatrix resolvent_quadrature_A(const CMatrix& v, const SpectralDecomposition& a, const ResolventQuadrature& q) {
    if (v.rows() != a.dim() || v.cols() != a.dim()) throw std::invalid_argument("resolvent_quadrature_A: shape mismatch");
    if (q.nodes < 16) throw std::invalid_argument("resolvent_quadrature_A: need at least 16 nodes");
    if (!(q.lambda_max > 0.0)) throw std::invalid_argument("resolvent_quadrature_A: lambda_max must be positive");
    if (a.dim() > 0 && a.eigenvalues.minCoeff() < 1.0 - 1e-12) {
        throw std::domain_error("resolvent_quadrature_A: spectrum of A must lie in [1, inf)");
    }
    // The integrand is even in lambda: integrate over [0, m] and double.
    // Panels double in width from 1/8 so the resolvent scale sqrt(a) is resolved.
    const auto breaks = doubling_breaks(0.125, q.lambda_max);
    const int panels = static_cast<int>(breaks.size()) - 1;
    const int order = std::max(8, q.nodes / panels);
    const QuadratureRule rule = composite_gauss_legendre(breaks, order);

    const RVector& l = a.eigenvalues;
    const Eigen::Index d = l.size();
    RMatrix g = RMatrix::Zero(d, d);
    const RVector q4 = l.array().pow(0.25);
    for (std::size_t t = 0; t < rule.nodes.size(); ++t) {
        const double x = rule.nodes[t], w = rule.weights[t];
        const RVector r = (x * q4.array() / (x * x + l.array())).matrix();
        g.noalias() += (2.0 * w) * r * r.transpose();
    }
    CMatrix c = a.eigenvectors.adjoint() * v * a.eigenvectors;
    c.array() *= g.array().cast<cplx>();
    return a.eigenvectors * c * a.eigenvectors.adjoint();
}

double schur_norm_ratio(const SpectralDecomposition& d0, const SpectralDecomposition& d1, const Symbol& phi,
                        int samples, std::mt19937_64& rng) {
    double best = 0.0;
    for (int s = 0; s < samples; ++s) {
        const CMatrix a = random_gaussian(d0.dim(), d1.dim(), rng);
        const CMatrix t = doi_apply(d0, d1, phi, a);
        const double na = complex_singular_values(a)(0);
        const double nt = complex_singular_values(t)(0);
        best = std::max(best, nt / na);
    }
    return best;
}

CMatrix random_gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
    CMatrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) {
            const double re = nd(rng);
            const double im = nd(rng);
            m(i, j) = cplx(re, im);
        }
    }
    return m;
}

CMatrix random_hermitian(Eigen::Index n, std::mt19937_64& rng) {
    const CMatrix g = random_gaussian(n, n, rng);
    return 0.5 * (g + g.adjoint());
}

CMatrix random_unitary(Eigen::Index n, std::mt19937_64& rng) {
    const CMatrix g = random_gaussian(n, n, rng);
    Eigen::HouseholderQR<CMatrix> qr(g);
    CMatrix q = qr.householderQ();
    // Fix column phases so the distribution does not depend on QR sign choices.
    const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index i = 0; i < n; ++i) {
        const cplx d = r(i, i);
        if (std::abs(d) > 0.0) q.col(i) *= d / std::abs(d);
    }
    return q;
}

CMatrix random_hermitian_in(Eigen::Index n, double lo, double hi, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ud(lo, hi);
    RVector d(n);
    for (Eigen::Index i = 0; i < n; ++i) d(i) = ud(rng);
    const CMatrix u = random_unitary(n, rng);
    CMatrix h = u * d.cast<cplx>().asDiagonal() * u.adjoint();
    return 0.5 * (h + h.adjoint());
}

}  // namespace heislab
