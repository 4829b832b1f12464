#include "heislab/doi.hpp"
#include "heislab/schatten.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

using namespace heislab;

namespace {

std::vector<double> harmonic(std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t k = 0; k < n; ++k) v[k] = 1.0 / static_cast<double>(k + 1);
    return v;
}

}  // namespace

TEST(SingularValues, IdentityIsAllOnes) {
    const auto s = singular_values(CMatrix(CMatrix::Identity(3, 3)));
    ASSERT_EQ(s.size(), 3u);
    for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(s[k], 1.0, 1e-15);
}

TEST(SingularValues, DiagonalPositive) {
    RMatrix d = RMatrix::Zero(3, 3);
    d.diagonal() << 1.0, 0.5, 1.0 / 3.0;
    const auto s = singular_values(d);
    EXPECT_NEAR(s[0], 1.0, 1e-15);
    EXPECT_NEAR(s[1], 0.5, 1e-15);
    EXPECT_NEAR(s[2], 1.0 / 3.0, 1e-15);
}

TEST(SingularValues, NilpotentTwoByTwo) {
    CMatrix a(2, 2);
    a << 0.0, 2.0, 0.0, 0.0;
    const auto s = singular_values(a);
    EXPECT_NEAR(s[0], 2.0, 1e-15);
    EXPECT_EQ(s[1], 0.0);
}

TEST(SingularValues, RectangularLengthIsMinDimension) {
    std::mt19937_64 rng(3);
    EXPECT_EQ(singular_values(random_gaussian(4, 7, rng)).size(), 4u);
    EXPECT_EQ(singular_values(random_gaussian(6, 2, rng)).size(), 2u);
}

TEST(SingularValues, RejectsNonFinite) {
    CMatrix a = CMatrix::Identity(2, 2);
    a(0, 1) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(singular_values(a), std::invalid_argument);
}

TEST(SingularValues, LargeInputMatchesEigenSolver) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> nd;
    RMatrix a(120, 90);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = nd(rng);
    const auto s = singular_values(a);
    const RVector ref = Eigen::JacobiSVD<RMatrix>(a).singularValues();
    for (Eigen::Index k = 0; k < ref.size(); ++k) EXPECT_NEAR(s[static_cast<std::size_t>(k)], ref(k), 1e-11);
}

TEST(SingularSpectrum, RejectsIncreasingValues) {
    EXPECT_THROW(SingularSpectrum({1.0, 2.0}), std::invalid_argument);
    EXPECT_THROW(SingularSpectrum({1.0, -0.5}), std::invalid_argument);
}

TEST(SingularSpectrum, ClampZeroesTinyEntries) {
    const auto s = SingularSpectrum::from_unsorted({1e-15, 1.0, 0.5});
    EXPECT_EQ(s[0], 1.0);
    EXPECT_EQ(s[1], 0.5);
    EXPECT_EQ(s[2], 0.0);
    EXPECT_EQ(s.nonzero_count(), 2u);
}

TEST(WeakQuasinorm, HarmonicSequenceAtPOne) {
    EXPECT_NEAR(weak_quasinorm(SingularSpectrum(harmonic(500)), 1.0), 1.0, 1e-15);
}

TEST(WeakQuasinorm, FlatSequence) {
    EXPECT_NEAR(weak_quasinorm(SingularSpectrum({1.0, 1.0, 1.0}), 2.0), std::sqrt(3.0), 1e-15);
}

TEST(WeakQuasinorm, ZeroSpectrum) {
    EXPECT_EQ(weak_quasinorm(SingularSpectrum({0.0, 0.0, 0.0}), 3.0), 0.0);
}

TEST(WeakQuasinorm, RejectsBadExponent) {
    EXPECT_THROW(weak_quasinorm(SingularSpectrum({1.0}), 0.0), std::invalid_argument);
    EXPECT_THROW(weak_quasinorm(SingularSpectrum({1.0}), -1.0), std::invalid_argument);
}

TEST(SchattenNorm, Examples) {
    EXPECT_NEAR(schatten_norm(SingularSpectrum({1.0, 1.0, 1.0}), 2.0), std::sqrt(3.0), 1e-15);
    EXPECT_NEAR(schatten_norm(SingularSpectrum({4.0, 3.0}), 1.0), 7.0, 1e-15);
    EXPECT_NEAR(schatten_norm(SingularSpectrum({1.0, 0.5, 0.25}), 2.0), std::sqrt(21.0 / 16.0), 1e-15);
    EXPECT_THROW(schatten_norm(SingularSpectrum({1.0}), 0.5), std::invalid_argument);
}

TEST(SeparableProfile, HarmonicDoesNotDecay) {
    const auto prof = separable_profile(SingularSpectrum(harmonic(200)), 1.0);
    for (std::size_t k = 0; k < prof.size(); ++k) {
        EXPECT_NEAR(prof[k], static_cast<double>(k) / (k + 1), 1e-15);
    }
    EXPECT_GT(prof.back(), 0.99);
}

TEST(SeparableProfile, InverseSquareDecays) {
    std::vector<double> v(200);
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = 1.0 / ((k + 1.0) * (k + 1.0));
    const auto prof = separable_profile(SingularSpectrum(v), 1.0);
    for (std::size_t k = 0; k < prof.size(); ++k) EXPECT_NEAR(prof[k], k / ((k + 1.0) * (k + 1.0)), 1e-16);
    for (std::size_t k = 2; k < prof.size(); ++k) EXPECT_LT(prof[k], prof[k - 1]);
}

TEST(SeparableProfile, ZeroSpectrum) {
    for (double v : separable_profile(SingularSpectrum({0.0, 0.0}), 2.0)) EXPECT_EQ(v, 0.0);
}

TEST(DixmierApproximant, HarmonicCalibration) {
    const SingularSpectrum s(harmonic(10000));
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t N : {100u, 1000u, 10000u}) {
        // Oracle: partial harmonic sum in long double, divided by log(N + 2).
        long double h = 0.0L;
        for (std::size_t k = 1; k <= N; ++k) h += 1.0L / static_cast<long double>(k);
        const double expect = static_cast<double>(h / std::log(static_cast<long double>(N) + 2.0L));
        const double got = dixmier_approximant(s, N);
        EXPECT_NEAR(got, expect, 1e-12);
        EXPECT_LT(std::abs(got - 1.0), prev);
        prev = std::abs(got - 1.0);
    }
    EXPECT_LE(prev, 0.15);
}

TEST(DixmierApproximant, SummableSpectrumTendsToZero) {
    std::vector<double> v(100000);
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = 1.0 / ((k + 1.0) * (k + 1.0));
    const SingularSpectrum s(v);
    EXPECT_LT(dixmier_approximant(s, 100000), dixmier_approximant(s, 100));
    EXPECT_LT(dixmier_approximant(s, 100000), 0.15);
}

TEST(DixmierApproximant, ZeroAndBadWindow) {
    const SingularSpectrum z({0.0, 0.0, 0.0});
    EXPECT_EQ(dixmier_approximant(z, 3), 0.0);
    EXPECT_THROW(dixmier_approximant(z, 0), std::invalid_argument);
    EXPECT_THROW(dixmier_approximant(z, 4), std::invalid_argument);
}

TEST(DixmierEigenApproximant, MatchesSingularVersionOnPositiveDiagonal) {
    const auto h = harmonic(300);
    CVector ev(300);
    for (Eigen::Index i = 0; i < 300; ++i) ev(299 - i) = h[static_cast<std::size_t>(i)];
    EXPECT_NEAR(dixmier_eigen_approximant(ev, 300), dixmier_approximant(SingularSpectrum(h), 300), 1e-14);
}

TEST(FitWeak, RecoversPowerLawSlope) {
    std::vector<double> v(400);
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = 3.0 * std::pow(k + 1.0, -0.25);
    const WeakFit f = fit_weak(SingularSpectrum(v), 4.0, {10, 300});
    EXPECT_NEAR(f.slope, -0.25, 1e-12);
    EXPECT_NEAR(f.quasinorm, 3.0, 1e-12);
}

TEST(FitWeak, RejectsZerosInRange) {
    EXPECT_THROW(fit_weak(SingularSpectrum({1.0, 0.5, 0.0, 0.0}), 4.0, {1, 4}), std::invalid_argument);
}

TEST(MiddleDecade, CentredInLogScale) {
    const IndexRange r = middle_decade(1000, 5000);
    EXPECT_EQ(r.lo, 9u);   // k = 10
    EXPECT_EQ(r.hi, 100u);  // k = 100
    EXPECT_EQ(middle_decade(1000, 50).hi, 50u);
    EXPECT_THROW(middle_decade(5, 100), std::invalid_argument);
}

TEST(SpectrumCsv, Columns) {
    std::ostringstream os;
    write_spectrum_csv(os, SingularSpectrum({1.0, 0.5}), 2.0);
    EXPECT_EQ(os.str().substr(0, os.str().find("\r\n")), "k,mu,k_mu_p");
}

// ---------------------------------------------------------------- properties

TEST(SpectrumProperties, KyFanSubadditivity) {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        const CMatrix a = random_gaussian(8, 8, rng), b = random_gaussian(8, 8, rng);
        const auto sa = singular_values(a), sb = singular_values(b), sab = singular_values(CMatrix(a + b));
        for (std::size_t k = 0; k < 8; ++k) {
            for (std::size_t j = 0; k + j < 8; ++j) EXPECT_LE(sab[k + j], sa[k] + sb[j] + 1e-12);
        }
    }
}

TEST(SpectrumProperties, UnitaryInvariance) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        const CMatrix a = random_gaussian(9, 9, rng);
        const CMatrix u = random_unitary(9, rng), v = random_unitary(9, rng);
        const auto s0 = singular_values(a), s1 = singular_values(CMatrix(u * a * v));
        for (std::size_t k = 0; k < 9; ++k) EXPECT_NEAR(s0[k], s1[k], 1e-12);
    }
}

TEST(SpectrumProperties, HolderProductOnDiagonals) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double p = 4.0, q = 4.0, r = 2.0;
    for (int trial = 0; trial < 20; ++trial) {
        RVector da(40), db(40);
        for (Eigen::Index i = 0; i < 40; ++i) {
            da(i) = u(rng) * std::pow(i + 1.0, -1.0 / p);
            db(i) = u(rng) * std::pow(i + 1.0, -1.0 / q);
        }
        const RMatrix A = da.asDiagonal(), B = db.asDiagonal();
        const double lhs = weak_quasinorm(singular_values(RMatrix(A * B)), r);
        const double rhs = 4.0 * weak_quasinorm(singular_values(A), p) * weak_quasinorm(singular_values(B), q);
        EXPECT_LE(lhs, rhs);
    }
}
