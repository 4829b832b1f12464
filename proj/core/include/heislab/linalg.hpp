#pragma once

#include <Eigen/Dense>

#include <complex>

namespace heislab {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr cplx I_unit{0.0, 1.0};

// Dense symmetric eigensolver (LAPACK divide and conquer). Eigenvalues
// ascending; eigenvectors in the columns.
struct RealEigen {
    RVector values;
    RMatrix vectors;
};
RealEigen symmetric_eigen(const RMatrix& a);
RVector symmetric_eigenvalues(const RMatrix& a);

// Eigenvalues of a general real square matrix.
CVector general_eigenvalues(const RMatrix& a);

// Singular values only, nonincreasing. Large inputs go through LAPACK gesdd.
RVector real_singular_values(const RMatrix& a);
RVector complex_singular_values(const CMatrix& a);

// Spectral norm by Lanczos on a^T a with full reorthogonalization. The Ritz
// value is a lower bound that converges fast at the top of the spectrum.
double spectral_norm_lanczos(const RMatrix& a, int steps = 80);

bool all_finite(const CMatrix& a);
bool all_finite(const RMatrix& a);

}  // namespace heislab
