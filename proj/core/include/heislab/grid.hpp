#pragma once

#include "heislab/io.hpp"
#include "heislab/linalg.hpp"
#include "heislab/schatten.hpp"

#include <Eigen/Sparse>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

namespace heislab {

// ---------------------------------------------------------------- geometry

struct HPoint {
    std::vector<cplx> z;
    double t = 0.0;
};

HPoint group_multiply(const HPoint& g, const HPoint& h);
HPoint group_inverse(const HPoint& g);
double koranyi_norm(const HPoint& g);
HPoint dilation_map(double r, const HPoint& g);

// Korányi gauge of (x, y, t) in H^1.
inline double koranyi(double x, double y, double t) {
    const double r2 = x * x + y * y;
    return std::sqrt(std::sqrt(r2 * r2 + t * t));
}

// ---------------------------------------------------------------- grid

// Box [-L, L] per axis, N nodes per axis at spacing h = 2L/(N+1); the exterior
// is zero (Dirichlet). Only H^1 is discretized.
struct GridSpec {
    int n = 1;
    int Nx = 13, Ny = 13, Nt = 13;
    double Lx = 2.0, Ly = 2.0, Lt = 1.0;
    std::size_t dim_cap = 8000;

    static GridSpec cube(int N, double L = 2.0, double Lt = 1.0);
    static GridSpec from_json(const Json& j);
    Json to_json() const;
    std::string digest() const;

    void validate() const;
    std::size_t dim() const { return static_cast<std::size_t>(Nx) * Ny * Nt; }
    double hx() const { return 2.0 * Lx / (Nx + 1); }
    double hy() const { return 2.0 * Ly / (Ny + 1); }
    double ht() const { return 2.0 * Lt / (Nt + 1); }
    double cell_volume() const { return hx() * hy() * ht(); }

    // Node coordinates; antisymmetric bit for bit about the centre.
    double x(int i) const { return (i - 0.5 * (Nx - 1)) * hx(); }
    double y(int j) const { return (j - 0.5 * (Ny - 1)) * hy(); }
    double t(int k) const { return (k - 0.5 * (Nt - 1)) * ht(); }

    // x slowest, t fastest.
    Eigen::Index index(int i, int j, int k) const { return (static_cast<Eigen::Index>(i) * Ny + j) * Nt + k; }

    bool operator==(const GridSpec& o) const;
};

// Real grid functions (all shipped symbols are real).
using GridFunction = RVector;
using GridOperator = RMatrix;
using SparseOperator = Eigen::SparseMatrix<double>;

GridFunction sample(const GridSpec& spec, const std::function<double(double, double, double)>& f);
// True when f vanishes on every node within `margin` cells of the boundary.
bool is_interior_supported(const GridSpec& spec, const GridFunction& f, int margin = 1);

struct VectorFields {
    std::vector<SparseOperator> X;  // X_1 .. X_{2n}: X then Y
    SparseOperator T;
};

VectorFields build_vector_fields(const GridSpec& spec);

struct SubLaplacian {
    GridOperator matrix;  // -Delta, symmetrized
    double asymmetry_residual = 0.0;
};

// Rejects the configuration when the relative asymmetry exceeds 1e-8.
SubLaplacian build_sublaplacian(const GridSpec& spec, const VectorFields& fields);

inline constexpr double kKernelThreshold = 1e-10;

enum class KernelPolicy { pseudo_inverse, reject };

struct GridSpectrum {
    RVector eigenvalues;  // ascending; entries below threshold are kernel
    RMatrix eigenvectors;
    double threshold = 0.0;
    std::size_t kernel_dim = 0;
    double asymmetry_residual = 0.0;

    double lambda_max() const { return eigenvalues.size() ? eigenvalues(eigenvalues.size() - 1) : 0.0; }
};

GridSpectrum decompose(const GridOperator& self_adjoint, double asymmetry_residual = 0.0);

// U phi(Lambda) U^T; kernel eigenvalues map to 0 under pseudo_inverse.
GridOperator spectral_function(const GridSpectrum& s, const std::function<double(double)>& phi,
                               KernelPolicy policy = KernelPolicy::pseudo_inverse);
GridOperator spectral_function(const GridOperator& a, const std::function<double(double)>& phi,
                               KernelPolicy policy = KernelPolicy::pseudo_inverse);

GridOperator multiplication_operator(const GridFunction& f);
GridOperator commutator(const GridOperator& a, const GridOperator& b);
// [A, M_f] without forming M_f.
GridOperator commutator_with_multiplication(const GridOperator& a, const GridFunction& f);
SparseOperator commutator_with_multiplication(const SparseOperator& a, const GridFunction& f);

// Shared, lazily built operators for one GridSpec. Thread-safe.
class GridModel {
public:
    explicit GridModel(GridSpec spec);

    const GridSpec& spec() const { return spec_; }
    const VectorFields& fields() const { return fields_; }
    const GridSpectrum& spectrum() const;
    const GridOperator& inv_sqrt() const;   // (-Delta)^{-1/2}, pseudo-inverse
    const GridOperator& sqrt_lap() const;   // (-Delta)^{1/2}
    const GridOperator& riesz(int l) const;  // R_l = X_l (-Delta)^{-1/2}
    double riesz_norm(int l) const;

    // Singular values of [R_l, M_f], memoized on (l, f).
    SingularSpectrum commutator_spectrum(int l, const GridFunction& f) const;

    // Grid realization of a_k (shift = 0) or A_k (shift = 1):
    // T_psi^{B,B}(B^{-1/4} X_k B^{-1/4}) with B = shift - Delta.
    GridOperator a_operator(int k, double shift = 0.0) const;

private:
    GridSpec spec_;
    VectorFields fields_;
    mutable std::once_flag spectrum_once_, inv_sqrt_once_, sqrt_once_;
    mutable std::unique_ptr<GridSpectrum> spectrum_;
    mutable std::unique_ptr<GridOperator> inv_sqrt_, sqrt_;
    mutable std::mutex mutex_;
    mutable std::map<int, std::shared_ptr<const GridOperator>> riesz_;
    mutable std::map<int, double> riesz_norm_;
    mutable std::map<std::pair<int, std::uint64_t>, SingularSpectrum> spectra_;
};

// Process-wide cache of GridModel handles keyed by the spec digest.
std::shared_ptr<const GridModel> grid_model(const GridSpec& spec);
// Drops the cache; handles already held stay valid.
void clear_grid_models();

GridOperator build_riesz(const GridModel& model, int l);

// ---------------------------------------------------------------- diagnostics

struct DecompositionReport {
    double relative_residual = 0.0;  // P (lhs - rhs) P / ||P lhs P||, P = kernel complement
    // ||([X_l, M_f] - M_{X_l f}) (-Delta)^{-1/2}|| / ||[R_l, M_f]||: how far the
    // discrete product rule is from the pointwise one.
    double product_rule_deviation = 0.0;
};

// [R_l, M_f] against [X_l, M_f](-Delta)^{-1/2} - R_l [(-Delta)^{1/2}, M_f](-Delta)^{-1/2}.
DecompositionReport riesz_decomposition_check(const GridModel& model, int l, const GridFunction& f);

// Relative residual of [A^{-1}, B] + A^{-1}[A, B]A^{-1} with A the compression
// of (-Delta)^{1/2} to the kernel complement and B the compression of M_f.
double inverse_commutator_check(const GridModel& model, const GridFunction& f);

// ||[T, -Delta]|| / (||T|| ||-Delta||).
double t_laplacian_commutation_residual(const GridModel& model);

// Horizontal gradient X_j f, j = 1..2n.
std::vector<GridFunction> horizontal_gradient(const VectorFields& fields, const GridFunction& f);

double sobolev_seminorm(const GridSpec& spec, const VectorFields& fields, const GridFunction& f, double p);

enum class PoincareMode { ball, annulus };

double poincare_ratio(const GridSpec& spec, const VectorFields& fields, const GridFunction& f, double R,
                      PoincareMode mode, double p = 4.0);

// (f - c_m) eta_m with c_m the annulus average over B(2m) \ B(m) and eta_m a
// quintic ramp equal to 1 on B(m/2) and 0 off B(m).
GridFunction approximation_sequence(const GridSpec& spec, const GridFunction& f, double m);

struct RotationReport {
    Eigen::PermutationMatrix<Eigen::Dynamic> U;
    double residual = 0.0;  // max over probes of ||(U^{-1} X_k U - Y_k) f||
};

// (U xi)(x, y, t) = xi(-y, x, t).
RotationReport quarter_rotation(const GridSpec& spec, const VectorFields& fields, int k, int probes = 8,
                                std::uint64_t seed = 42);

// Cyclic shift by `cells` along t.
Eigen::PermutationMatrix<Eigen::Dynamic> t_translation(const GridSpec& spec, int cells);

// Random function supported `margin` cells inside the boundary.
GridFunction random_interior_function(const GridSpec& spec, int margin, std::uint64_t seed);

// Binary container: row-major complex128 plus a JSON sidecar.
void dump_operator(const std::filesystem::path& path, const GridOperator& a, const GridSpec& spec,
                   const std::string& kind, double symmetry_residual);
GridOperator load_operator(const std::filesystem::path& path);

}  // namespace heislab
