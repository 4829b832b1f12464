#include "heislab/families.hpp"
#include "heislab/grid.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

using namespace heislab;

namespace {

HPoint point(double x, double y, double t) { return {{cplx(x, y)}, t}; }

double dist(const HPoint& a, const HPoint& b) {
    return std::abs(a.z[0] - b.z[0]) + std::abs(a.t - b.t);
}

// Nodes at least `m` cells from every face.
bool deep(const GridSpec& s, int i, int j, int k, int m) {
    return i >= m && j >= m && k >= m && i < s.Nx - m && j < s.Ny - m && k < s.Nt - m;
}

}  // namespace

// ---------------------------------------------------------------- geometry

TEST(Group, LawInverseAndDilation) {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        const HPoint g = point(u(rng), u(rng), u(rng)), h = point(u(rng), u(rng), u(rng)),
                     k = point(u(rng), u(rng), u(rng));
        EXPECT_LT(dist(group_multiply(group_multiply(g, h), k), group_multiply(g, group_multiply(h, k))), 1e-13);
        EXPECT_LT(dist(group_multiply(g, group_inverse(g)), point(0, 0, 0)), 1e-15);
        const double r = 0.5 + std::abs(u(rng));
        EXPECT_LT(dist(dilation_map(r, group_multiply(g, h)),
                       group_multiply(dilation_map(r, g), dilation_map(r, h))),
                  1e-12);
        EXPECT_NEAR(koranyi_norm(dilation_map(r, g)), r * koranyi_norm(g), 1e-13);
        EXPECT_NEAR(koranyi_norm(group_inverse(g)), koranyi_norm(g), 1e-15);
        EXPECT_DOUBLE_EQ(koranyi_norm(g), koranyi(g.z[0].real(), g.z[0].imag(), g.t));
    }
    EXPECT_THROW(dilation_map(0.0, point(1, 0, 0)), std::invalid_argument);
}

TEST(Group, KoranyiExamples) {
    EXPECT_DOUBLE_EQ(koranyi(1.0, 0.0, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(koranyi(0.0, 0.0, 16.0), 4.0);
    EXPECT_DOUBLE_EQ(koranyi(0.0, 0.0, 0.0), 0.0);
}

// ---------------------------------------------------------------- GridSpec

TEST(GridSpec, SpacingAndSymmetricNodes) {
    const GridSpec s = GridSpec::cube(9);
    EXPECT_DOUBLE_EQ(s.hx(), 0.4);
    EXPECT_DOUBLE_EQ(s.ht(), 0.2);
    for (int i = 0; i < s.Nx; ++i) EXPECT_EQ(s.x(i), -s.x(s.Nx - 1 - i));
    EXPECT_EQ(s.x(4), 0.0);
    EXPECT_EQ(s.index(1, 2, 3), (1 * 9 + 2) * 9 + 3);
}

TEST(GridSpec, Validation) {
    GridSpec s = GridSpec::cube(9);
    s.Ny = 7;
    EXPECT_THROW(s.validate(), std::invalid_argument);
    EXPECT_THROW(GridSpec::cube(2).validate(), std::invalid_argument);
    GridSpec big = GridSpec::cube(21);
    EXPECT_THROW(big.validate(), std::invalid_argument);
    big.dim_cap = 10000;
    EXPECT_NO_THROW(big.validate());
    GridSpec h2 = GridSpec::cube(5);
    h2.n = 2;
    EXPECT_THROW(h2.validate(), std::invalid_argument);
}

TEST(GridSpec, JsonRoundTripAndDigest) {
    GridSpec s = GridSpec::cube(11, 1.5, 0.75);
    const GridSpec r = GridSpec::from_json(s.to_json());
    EXPECT_TRUE(r == s);
    EXPECT_EQ(r.digest(), s.digest());
    s.Nt = 9;
    EXPECT_NE(r.digest(), s.digest());
    EXPECT_THROW(GridSpec::from_json(Json::array()), std::invalid_argument);
}

// ---------------------------------------------------------------- fields

TEST(VectorFields, SkewSymmetric) {
    const GridSpec s = GridSpec::cube(7);
    const VectorFields f = build_vector_fields(s);
    for (const auto& x : f.X) EXPECT_EQ(RMatrix(x + SparseOperator(x.transpose())).norm(), 0.0);
    EXPECT_EQ(RMatrix(f.T + SparseOperator(f.T.transpose())).norm(), 0.0);
}

TEST(VectorFields, ExactOnAffineFunctions) {
    const GridSpec s = GridSpec::cube(9);
    const VectorFields f = build_vector_fields(s);
    const double a = 0.7, b = -1.3, c = 2.1;
    const GridFunction g = sample(s, [&](double x, double y, double t) { return a * x + b * y + c * t; });
    const GridFunction gx = f.X[0] * g, gy = f.X[1] * g, gt = f.T * g;
    const GridFunction xy = f.X[0] * gy - f.X[1] * gx;
    for (int i = 0; i < s.Nx; ++i) {
        for (int j = 0; j < s.Ny; ++j) {
            for (int k = 0; k < s.Nt; ++k) {
                const auto r = s.index(i, j, k);
                if (deep(s, i, j, k, 1)) {
                    EXPECT_NEAR(gx(r), a - s.y(j) * c, 1e-12);
                    EXPECT_NEAR(gy(r), b + s.x(i) * c, 1e-12);
                    EXPECT_NEAR(gt(r), c, 1e-12);
                }
                // [X, Y] = 2T holds on affine functions away from the boundary.
                if (deep(s, i, j, k, 2)) { EXPECT_NEAR(xy(r), 2.0 * c, 1e-11); }
            }
        }
    }
}

TEST(SubLaplacian, SymmetricPositive) {
    const GridSpec s = GridSpec::cube(7);
    const VectorFields f = build_vector_fields(s);
    const SubLaplacian lap = build_sublaplacian(s, f);
    EXPECT_LT(lap.asymmetry_residual, 1e-12);
    EXPECT_EQ((lap.matrix - lap.matrix.transpose()).norm(), 0.0);
    const GridSpectrum sp = decompose(lap.matrix, lap.asymmetry_residual);
    EXPECT_GT(sp.eigenvalues(0), -1e-10 * sp.lambda_max());
    for (Eigen::Index i = 1; i < sp.eigenvalues.size(); ++i) EXPECT_LE(sp.eigenvalues(i - 1), sp.eigenvalues(i));
    std::size_t below = 0;
    for (Eigen::Index i = 0; i < sp.eigenvalues.size(); ++i) below += sp.eigenvalues(i) < sp.threshold;
    EXPECT_EQ(below, sp.kernel_dim);
}

TEST(SpectralFunction, SquareRootSquaresBack) {
    const GridSpec s = GridSpec::cube(7);
    const GridModel m(s);
    const RMatrix lap = build_sublaplacian(s, m.fields()).matrix;
    EXPECT_LT((m.sqrt_lap() * m.sqrt_lap() - lap).norm() / lap.norm(), 1e-12);
    // inv_sqrt * lap * inv_sqrt is the projection off the kernel.
    const RMatrix p = m.inv_sqrt() * lap * m.inv_sqrt();
    EXPECT_LT((p * p - p).norm(), 1e-9);
    EXPECT_NEAR(p.trace(), static_cast<double>(s.dim() - m.spectrum().kernel_dim), 1e-8);
    const auto inverse = [&] { return spectral_function(m.spectrum(), [](double l) { return 1.0 / l; }, KernelPolicy::reject); };
    if (m.spectrum().kernel_dim > 0) {
        EXPECT_THROW(inverse(), std::domain_error);
    } else {
        EXPECT_NO_THROW(inverse());
    }
}

TEST(Riesz, SumOfSquaresIsProjection) {
    const GridSpec s = GridSpec::cube(7);
    const GridModel m(s);
    const RMatrix sum = m.riesz(1).transpose() * m.riesz(1) + m.riesz(2).transpose() * m.riesz(2);
    const RMatrix lap = build_sublaplacian(s, m.fields()).matrix;
    const RMatrix p = m.inv_sqrt() * lap * m.inv_sqrt();
    EXPECT_LT((sum - p).norm(), 1e-9);
    for (int l : {1, 2}) {
        EXPECT_LE(m.riesz_norm(l), 1.0 + 1e-10);
        EXPECT_NEAR(m.riesz_norm(l), real_singular_values(m.riesz(l))(0), 1e-10);
    }
    EXPECT_THROW(m.riesz(3), std::out_of_range);
}

TEST(Commutators, MultiplicationShortcutMatchesDense) {
    const GridSpec s = GridSpec::cube(5);
    const VectorFields f = build_vector_fields(s);
    const GridFunction g = random_interior_function(s, 1, 3);
    const RMatrix x = RMatrix(f.X[0]);
    const RMatrix dense = commutator(x, multiplication_operator(g));
    EXPECT_LT((commutator_with_multiplication(x, g) - dense).norm(), 1e-13);
    EXPECT_LT((RMatrix(commutator_with_multiplication(f.X[0], g)) - dense).norm(), 1e-13);
}

TEST(Commutators, XWithCoordinateIsAveraging) {
    // [X_1, M_x] is the neighbour average in x, which is I on x-affine directions only.
    const GridSpec s = GridSpec::cube(7);
    const VectorFields f = build_vector_fields(s);
    const GridFunction xs = sample(s, [](double x, double, double) { return x; });
    const RMatrix c = RMatrix(commutator_with_multiplication(f.X[0], xs));
    const GridFunction one = sample(s, [](double, double, double) { return 1.0; });
    const GridFunction r = c * one;
    for (int i = 1; i < s.Nx - 1; ++i) EXPECT_NEAR(r(s.index(i, 3, 3)), 1.0, 1e-12);
    EXPECT_NEAR(r(s.index(0, 3, 3)), 0.5, 1e-12);
}

TEST(Diagnostics, DecompositionAndInverseCommutator) {
    const GridSpec s = GridSpec::cube(7);
    const auto m = grid_model(s);
    const GridFunction g = random_interior_function(s, 1, 9);
    for (int l : {1, 2}) EXPECT_LT(riesz_decomposition_check(*m, l, g).relative_residual, 1e-8);
    EXPECT_LT(inverse_commutator_check(*m, g), 1e-8);
    EXPECT_EQ(grid_model(s).get(), m.get());
    clear_grid_models();
    EXPECT_NE(grid_model(s).get(), m.get());
    clear_grid_models();
}

TEST(Diagnostics, CommutatorSpectrumMemoized) {
    const GridSpec s = GridSpec::cube(5);
    const GridModel m(s);
    const GridFunction g = random_interior_function(s, 1, 4);
    const SingularSpectrum a = m.commutator_spectrum(1, g);
    const SingularSpectrum b = m.commutator_spectrum(1, g);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a[k], b[k]);
    const auto direct = singular_values(commutator_with_multiplication(m.riesz(1), g));
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], direct[k], 1e-12);
}

TEST(Symmetries, QuarterRotationIntertwinesFields) {
    const GridSpec s = GridSpec::cube(9);
    const VectorFields f = build_vector_fields(s);
    for (int k : {1, 2}) EXPECT_LT(quarter_rotation(s, f, k).residual, 1e-10);
}

TEST(Symmetries, TTranslationCommutesInside) {
    const GridSpec s = GridSpec::cube(9);
    const VectorFields f = build_vector_fields(s);
    const GridFunction g = random_interior_function(s, 3, 11);
    const auto u = t_translation(s, 1);
    for (int l : {0, 1}) EXPECT_LT((f.X[l] * (u * g) - u * (f.X[l] * g)).norm(), 1e-12);
    const auto back = t_translation(s, -1);
    EXPECT_EQ((back * (u * g) - g).norm(), 0.0);
}

TEST(Lanczos, MatchesSvdOnRandomMatrices) {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> nd;
    for (int n : {1, 5, 60, 200}) {
        RMatrix a(n + 3, n);
        for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = nd(rng);
        EXPECT_NEAR(spectral_norm_lanczos(a), real_singular_values(a)(0), 1e-9 * real_singular_values(a)(0)) << n;
    }
    EXPECT_EQ(spectral_norm_lanczos(RMatrix::Zero(4, 4)), 0.0);
}

// ---------------------------------------------------------------- functions

TEST(Sampling, BumpsVanishOnBoundary) {
    const GridSpec s = GridSpec::cube(11);
    for (const auto& sf : sample_family(s, named_family("bumps5"))) {
        EXPECT_TRUE(is_interior_supported(s, sf.values)) << sf.id;
        EXPECT_GT(sf.values.maxCoeff(), 0.5) << sf.id;
    }
    const GridFunction one = sample(s, [](double, double, double) { return 1.0; });
    EXPECT_FALSE(is_interior_supported(s, one));
}

TEST(Sampling, RandomInteriorRespectsMargin) {
    const GridSpec s = GridSpec::cube(9);
    const GridFunction g = random_interior_function(s, 2, 1);
    EXPECT_TRUE(is_interior_supported(s, g, 2));
    EXPECT_FALSE(is_interior_supported(s, g, 3));
    EXPECT_EQ(g, random_interior_function(s, 2, 1));
}

TEST(Sobolev, HomogeneousAndZeroOnConstants) {
    const GridSpec s = GridSpec::cube(9);
    const VectorFields f = build_vector_fields(s);
    const GridFunction g = random_interior_function(s, 1, 2);
    EXPECT_NEAR(sobolev_seminorm(s, f, 3.0 * g, 4.0), 3.0 * sobolev_seminorm(s, f, g, 4.0), 1e-10);
    EXPECT_EQ(sobolev_seminorm(s, f, GridFunction::Zero(static_cast<Eigen::Index>(s.dim())), 4.0), 0.0);
    EXPECT_THROW(sobolev_seminorm(s, f, g, 0.5), std::invalid_argument);
}

TEST(Poincare, FinitePositiveRatios) {
    const GridSpec s = GridSpec::cube(11);
    const VectorFields f = build_vector_fields(s);
    const GridFunction g = sample_family(s, named_family("bumps3"))[0].values;
    for (auto mode : {PoincareMode::ball, PoincareMode::annulus}) {
        const double r = poincare_ratio(s, f, g, 1.0, mode);
        EXPECT_TRUE(std::isfinite(r));
        EXPECT_GT(r, 0.0);
    }
}

TEST(ApproximationSequence, CutoffAndCentring) {
    const GridSpec s = GridSpec::cube(11);
    const GridFunction g = sample(s, [](double x, double, double t) { return 2.0 + x + t; });
    const double m = 1.0;
    const GridFunction a = approximation_sequence(s, g, m);
    for (int i = 0; i < s.Nx; ++i) {
        for (int j = 0; j < s.Ny; ++j) {
            for (int k = 0; k < s.Nt; ++k) {
                if (koranyi(s.x(i), s.y(j), s.t(k)) >= m) { EXPECT_EQ(a(s.index(i, j, k)), 0.0); }
            }
        }
    }
    // The annulus average of an odd perturbation of 2 is 2, so the centre maps to 0.
    EXPECT_NEAR(a(s.index(5, 5, 5)), 0.0, 1e-12);
    EXPECT_THROW(approximation_sequence(s, g, 100.0), std::invalid_argument);
}

TEST(DumpOperator, RoundTrip) {
    const auto dir = std::filesystem::temp_directory_path() / "heislab_test_dump";
    std::filesystem::create_directories(dir);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> nd;
    RMatrix a(6, 6);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = nd(rng);
    dump_operator(dir / "a.bin", a, GridSpec::cube(5), "riesz", 0.0);
    EXPECT_EQ(load_operator(dir / "a.bin"), a);
    EXPECT_EQ(std::filesystem::file_size(dir / "a.bin"), 36u * 16u);
    std::filesystem::remove_all(dir);
}
