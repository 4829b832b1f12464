#include "heislab/linalg.hpp"

#define LAPACK_COMPLEX_CPP
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

namespace heislab {

namespace {

void check_info(lapack_int info, const char* routine) {
    if (info != 0) {
        throw std::runtime_error(std::string(routine) + " failed, info=" + std::to_string(info));
    }
}

}  // namespace

RealEigen symmetric_eigen(const RMatrix& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("symmetric_eigen: matrix not square");
    const lapack_int n = static_cast<lapack_int>(a.rows());
    RealEigen out;
    out.vectors = a;
    out.values.resize(n);
    if (n == 0) return out;
    // Column-major storage, lower triangle referenced.
    check_info(LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, out.vectors.data(), n, out.values.data()),
               "dsyevd");
    return out;
}

RVector symmetric_eigenvalues(const RMatrix& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("symmetric_eigenvalues: matrix not square");
    const lapack_int n = static_cast<lapack_int>(a.rows());
    RMatrix work = a;
    RVector w(n);
    if (n == 0) return w;
    check_info(LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'L', n, work.data(), n, w.data()), "dsyevd");
    return w;
}

CVector general_eigenvalues(const RMatrix& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("general_eigenvalues: matrix not square");
    const lapack_int n = static_cast<lapack_int>(a.rows());
    RMatrix work = a;
    RVector wr(n), wi(n);
    if (n > 0) {
        check_info(LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'N', n, work.data(), n, wr.data(), wi.data(),
                                 nullptr, 1, nullptr, 1),
                   "dgeev");
    }
    CVector out(n);
    for (lapack_int i = 0; i < n; ++i) out(i) = cplx(wr(i), wi(i));
    return out;
}

RVector real_singular_values(const RMatrix& a) {
    const lapack_int m = static_cast<lapack_int>(a.rows());
    const lapack_int n = static_cast<lapack_int>(a.cols());
    RVector s(std::min(m, n));
    if (s.size() == 0) return s;
    RMatrix work = a;
    check_info(LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'N', m, n, work.data(), m, s.data(), nullptr, 1,
                              nullptr, 1),
               "dgesdd");
    std::sort(s.data(), s.data() + s.size(), std::greater<>());
    return s;
}

double spectral_norm_lanczos(const RMatrix& a, int steps) {
    const Eigen::Index n = a.cols();
    if (n == 0 || a.rows() == 0) return 0.0;
    const Eigen::Index m = std::min<Eigen::Index>(steps, n);
    RMatrix q(n, m);
    RVector alpha = RVector::Zero(m), beta = RVector::Zero(m);
    // Deterministic start with no special alignment to grid symmetries.
    RVector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = 1.0 + 0.5 * std::sin(1.0 + static_cast<double>(i));
    v.normalize();
    Eigen::Index used = 0;
    for (Eigen::Index j = 0; j < m; ++j) {
        q.col(j) = v;
        used = j + 1;
        RVector w = a.transpose() * (a * v);
        alpha(j) = v.dot(w);
        // Full reorthogonalization against every stored vector, twice.
        for (int pass = 0; pass < 2; ++pass) w -= q.leftCols(j + 1) * (q.leftCols(j + 1).transpose() * w);
        const double b = w.norm();
        if (j + 1 == m || b <= 1e-14 * std::abs(alpha(j))) break;
        beta(j) = b;
        v = w / b;
    }
    RMatrix t = RMatrix::Zero(used, used);
    for (Eigen::Index j = 0; j < used; ++j) {
        t(j, j) = alpha(j);
        if (j + 1 < used) t(j, j + 1) = t(j + 1, j) = beta(j);
    }
    const RVector ev = Eigen::SelfAdjointEigenSolver<RMatrix>(t, Eigen::EigenvaluesOnly).eigenvalues();
    return std::sqrt(std::max(0.0, ev(used - 1)));
}

RVector complex_singular_values(const CMatrix& a) {
    const lapack_int m = static_cast<lapack_int>(a.rows());
    const lapack_int n = static_cast<lapack_int>(a.cols());
    RVector s(std::min(m, n));
    if (s.size() == 0) return s;
    CMatrix work = a;
    check_info(LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'N', m, n,
                              reinterpret_cast<lapack_complex_double*>(work.data()), m, s.data(),
                              nullptr, 1, nullptr, 1),
               "zgesdd");
    std::sort(s.data(), s.data() + s.size(), std::greater<>());
    return s;
}

bool all_finite(const CMatrix& a) { return a.allFinite(); }
bool all_finite(const RMatrix& a) { return a.allFinite(); }

}  // namespace heislab
