#include "heislab/doi.hpp"
#include "heislab/families.hpp"
#include "heislab/grid.hpp"
#include "heislab/hermite.hpp"
#include "heislab/plancherel.hpp"
#include "heislab/schatten.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace heislab;

namespace {

RMatrix random_real(Eigen::Index n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    RMatrix a(n, n);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = nd(rng);
    return a;
}

void BM_SingularValues(benchmark::State& st) {
    const RMatrix a = random_real(st.range(0), 1);
    for (auto _ : st) benchmark::DoNotOptimize(singular_values(a));
    st.SetComplexityN(st.range(0));
}
BENCHMARK(BM_SingularValues)->RangeMultiplier(2)->Range(64, 1024)->Unit(benchmark::kMillisecond)->Complexity();

void BM_SpectralNormLanczos(benchmark::State& st) {
    const RMatrix a = random_real(st.range(0), 2);
    for (auto _ : st) benchmark::DoNotOptimize(spectral_norm_lanczos(a));
}
BENCHMARK(BM_SpectralNormLanczos)->RangeMultiplier(2)->Range(64, 1024)->Unit(benchmark::kMillisecond);

void BM_HermiteOscillator(benchmark::State& st) {
    for (auto _ : st) {
        const auto b = enumerate_basis(2, static_cast<int>(st.range(0)));
        CMatrix h = CMatrix::Zero(static_cast<Eigen::Index>(b->dim()), static_cast<Eigen::Index>(b->dim()));
        for (int j = 1; j <= 2; ++j) {
            const CMatrix p = momentum_matrix(*b, j), q = position_matrix(*b, j);
            h += p * p + q * q;
        }
        benchmark::DoNotOptimize(h);
    }
}
BENCHMARK(BM_HermiteOscillator)->DenseRange(4, 12, 4)->Unit(benchmark::kMicrosecond);

void BM_DoiApply(benchmark::State& st) {
    std::mt19937_64 rng(3);
    const auto n = static_cast<Eigen::Index>(st.range(0));
    const auto d = SpectralDecomposition::of_hermitian(random_hermitian_in(n, 1.0, 2.0, rng));
    const CMatrix a = random_gaussian(n, n, rng);
    const Symbol phi = symbols::frac_lambda();
    for (auto _ : st) benchmark::DoNotOptimize(doi_apply(d, d, phi, a));
}
BENCHMARK(BM_DoiApply)->RangeMultiplier(2)->Range(8, 256)->Unit(benchmark::kMicrosecond);

void BM_TauRadial(benchmark::State& st) {
    for (auto _ : st) benchmark::DoNotOptimize(tau_radial([](double s) { return std::exp(-s); }, 1));
}
BENCHMARK(BM_TauRadial)->Unit(benchmark::kMicrosecond);

void BM_LiftAndTrace(benchmark::State& st) {
    const auto b = enumerate_basis(1, static_cast<int>(st.range(0)));
    const auto q = PlancherelQuadrature::build(1, {});
    const FiberOperator x = FiberOperator::tensor_one(b, oscillator_power(*b, -1.0));
    for (auto _ : st) benchmark::DoNotOptimize(tau(lift(x, q, [](double s) { return std::exp(-std::abs(s)); })));
}
BENCHMARK(BM_LiftAndTrace)->DenseRange(4, 16, 6)->Unit(benchmark::kMillisecond);

// Full per-grid pipeline: eigendecomposition, (-Delta)^{-1/2}, R_1, one commutator spectrum.
void BM_GridPipeline(benchmark::State& st) {
    const GridSpec s = GridSpec::cube(static_cast<int>(st.range(0)));
    const GridFunction f = random_interior_function(s, 1, 5);
    for (auto _ : st) {
        const GridModel m(s);
        benchmark::DoNotOptimize(m.commutator_spectrum(1, f));
    }
}
BENCHMARK(BM_GridPipeline)->DenseRange(5, 11, 2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
