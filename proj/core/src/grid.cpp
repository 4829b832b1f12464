#include "heislab/grid.hpp"

#include "heislab/doi.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <random>
#include <stdexcept>

namespace heislab {

// ---------------------------------------------------------------- geometry

HPoint group_multiply(const HPoint& g, const HPoint& h) {
    if (g.z.size() != h.z.size()) throw std::invalid_argument("group_multiply: dimension mismatch");
    HPoint out;
    out.z.resize(g.z.size());
    double im = 0.0;
    for (std::size_t j = 0; j < g.z.size(); ++j) {
        out.z[j] = g.z[j] + h.z[j];
        im += std::imag(g.z[j] * std::conj(h.z[j]));
    }
    out.t = g.t + h.t + im;
    return out;
}

HPoint group_inverse(const HPoint& g) {
    HPoint out;
    out.z.reserve(g.z.size());
    for (const cplx& z : g.z) out.z.push_back(-z);
    out.t = -g.t;
    return out;
}

double koranyi_norm(const HPoint& g) {
    double r2 = 0.0;
    for (const cplx& z : g.z) r2 += std::norm(z);
    return std::sqrt(std::sqrt(r2 * r2 + g.t * g.t));
}

HPoint dilation_map(double r, const HPoint& g) {
    if (!(r > 0.0)) throw std::invalid_argument("dilation_map: r must be positive");
    HPoint out;
    out.z.reserve(g.z.size());
    for (const cplx& z : g.z) out.z.push_back(r * z);
    out.t = r * r * g.t;
    return out;
}

// ---------------------------------------------------------------- GridSpec

GridSpec GridSpec::cube(int N, double L, double Lt) {
    GridSpec s;
    s.Nx = s.Ny = s.Nt = N;
    s.Lx = s.Ly = L;
    s.Lt = Lt;
    return s;
}

GridSpec GridSpec::from_json(const Json& j) {
    if (!j.is_object()) throw std::invalid_argument("GridSpec: expected an object");
    GridSpec s;
    s.n = j.value("n", s.n);
    if (j.contains("N")) s.Nx = s.Ny = s.Nt = j.at("N").get<int>();
    if (j.contains("L")) s.Lx = s.Ly = j.at("L").get<double>();
    s.Nx = j.value("Nx", s.Nx);
    s.Ny = j.value("Ny", s.Ny);
    s.Nt = j.value("Nt", s.Nt);
    s.Lx = j.value("Lx", s.Lx);
    s.Ly = j.value("Ly", s.Ly);
    s.Lt = j.value("Lt", s.Lt);
    s.dim_cap = j.value("dim_cap", s.dim_cap);
    s.validate();
    return s;
}

Json GridSpec::to_json() const {
    Json j;
    j["n"] = n;
    j["Nx"] = Nx;
    j["Ny"] = Ny;
    j["Nt"] = Nt;
    j["Lx"] = Lx;
    j["Ly"] = Ly;
    j["Lt"] = Lt;
    j["dim_cap"] = dim_cap;
    return j;
}

std::string GridSpec::digest() const { return hex_digest(fnv1a64(to_json().dump())); }

void GridSpec::validate() const {
    if (n != 1) throw std::invalid_argument("GridSpec: only n = 1 is discretized");
    if (Nx < 3 || Ny < 3 || Nt < 3) throw std::invalid_argument("GridSpec: need at least 3 nodes per axis");
    if (Nx != Ny) throw std::invalid_argument("GridSpec: Nx and Ny must agree");
    if (!(Lx > 0.0) || !(Ly > 0.0) || !(Lt > 0.0)) throw std::invalid_argument("GridSpec: box sizes must be positive");
    if (Lx != Ly) throw std::invalid_argument("GridSpec: Lx and Ly must agree");
    if (dim() > dim_cap) {
        throw std::invalid_argument("GridSpec: dimension " + std::to_string(dim()) + " exceeds cap " +
                                    std::to_string(dim_cap));
    }
}

bool GridSpec::operator==(const GridSpec& o) const {
    return n == o.n && Nx == o.Nx && Ny == o.Ny && Nt == o.Nt && Lx == o.Lx && Ly == o.Ly && Lt == o.Lt &&
           dim_cap == o.dim_cap;
}

GridFunction sample(const GridSpec& spec, const std::function<double(double, double, double)>& f) {
    GridFunction v(static_cast<Eigen::Index>(spec.dim()));
    for (int i = 0; i < spec.Nx; ++i) {
        for (int j = 0; j < spec.Ny; ++j) {
            for (int k = 0; k < spec.Nt; ++k) v(spec.index(i, j, k)) = f(spec.x(i), spec.y(j), spec.t(k));
        }
    }
    return v;
}

bool is_interior_supported(const GridSpec& spec, const GridFunction& f, int margin) {
    if (f.size() != static_cast<Eigen::Index>(spec.dim())) throw std::invalid_argument("is_interior_supported: size");
    auto inside = [margin](int i, int N) { return i >= margin && i < N - margin; };
    for (int i = 0; i < spec.Nx; ++i) {
        for (int j = 0; j < spec.Ny; ++j) {
            for (int k = 0; k < spec.Nt; ++k) {
                if (inside(i, spec.Nx) && inside(j, spec.Ny) && inside(k, spec.Nt)) continue;
                if (f(spec.index(i, j, k)) != 0.0) return false;
            }
        }
    }
    return true;
}

// ---------------------------------------------------------------- operators

VectorFields build_vector_fields(const GridSpec& spec) {
    spec.validate();
    const auto d = static_cast<Eigen::Index>(spec.dim());
    using Trip = Eigen::Triplet<double>;
    std::vector<Trip> tx, ty, tt;
    const double cx = 0.5 / spec.hx(), cy = 0.5 / spec.hy(), ct = 0.5 / spec.ht();
    for (int i = 0; i < spec.Nx; ++i) {
        for (int j = 0; j < spec.Ny; ++j) {
            for (int k = 0; k < spec.Nt; ++k) {
                const Eigen::Index r = spec.index(i, j, k);
                const double x = spec.x(i), y = spec.y(j);
                if (i + 1 < spec.Nx) tx.emplace_back(r, spec.index(i + 1, j, k), cx);
                if (i > 0) tx.emplace_back(r, spec.index(i - 1, j, k), -cx);
                if (j + 1 < spec.Ny) ty.emplace_back(r, spec.index(i, j + 1, k), cy);
                if (j > 0) ty.emplace_back(r, spec.index(i, j - 1, k), -cy);
                if (k + 1 < spec.Nt) {
                    const Eigen::Index c = spec.index(i, j, k + 1);
                    tt.emplace_back(r, c, ct);
                    tx.emplace_back(r, c, -y * ct);
                    ty.emplace_back(r, c, x * ct);
                }
                if (k > 0) {
                    const Eigen::Index c = spec.index(i, j, k - 1);
                    tt.emplace_back(r, c, -ct);
                    tx.emplace_back(r, c, y * ct);
                    ty.emplace_back(r, c, -x * ct);
                }
            }
        }
    }
    VectorFields vf;
    vf.X.assign(2, SparseOperator(d, d));
    vf.X[0].setFromTriplets(tx.begin(), tx.end());
    vf.X[1].setFromTriplets(ty.begin(), ty.end());
    vf.T.resize(d, d);
    vf.T.setFromTriplets(tt.begin(), tt.end());
    return vf;
}

SubLaplacian build_sublaplacian(const GridSpec& spec, const VectorFields& fields) {
    const auto d = static_cast<Eigen::Index>(spec.dim());
    SparseOperator lap(d, d);
    for (const auto& x : fields.X) lap -= SparseOperator(x * x);
    SubLaplacian out;
    out.matrix = RMatrix(lap);
    const double scale = out.matrix.norm();
    out.asymmetry_residual = scale > 0.0 ? (out.matrix - out.matrix.transpose()).norm() / scale : 0.0;
    if (out.asymmetry_residual > 1e-8) {
        throw std::invalid_argument("build_sublaplacian: asymmetry residual " + format_double(out.asymmetry_residual));
    }
    out.matrix = 0.5 * (out.matrix + out.matrix.transpose()).eval();
    return out;
}

GridSpectrum decompose(const GridOperator& self_adjoint, double asymmetry_residual) {
    RealEigen e = symmetric_eigen(self_adjoint);
    GridSpectrum s;
    s.eigenvalues = std::move(e.values);
    s.eigenvectors = std::move(e.vectors);
    s.asymmetry_residual = asymmetry_residual;
    const double top = s.eigenvalues.size() ? s.eigenvalues.cwiseAbs().maxCoeff() : 0.0;
    s.threshold = kKernelThreshold * top;
    for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) {
        if (s.eigenvalues(i) < s.threshold) ++s.kernel_dim;
    }
    return s;
}

namespace {

RVector apply_phi(const GridSpectrum& s, const std::function<double(double)>& phi, KernelPolicy policy) {
    RVector d(s.eigenvalues.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        const double l = s.eigenvalues(i);
        if (l < s.threshold) {
            if (policy == KernelPolicy::reject) throw std::domain_error("spectral_function: operator has a kernel");
            d(i) = 0.0;
            continue;
        }
        d(i) = phi(l);
        if (!std::isfinite(d(i))) throw std::domain_error("spectral_function: phi undefined on the spectrum");
    }
    return d;
}

}  // namespace

GridOperator spectral_function(const GridSpectrum& s, const std::function<double(double)>& phi, KernelPolicy policy) {
    const RVector d = apply_phi(s, phi, policy);
    return s.eigenvectors * d.asDiagonal() * s.eigenvectors.transpose();
}

GridOperator spectral_function(const GridOperator& a, const std::function<double(double)>& phi, KernelPolicy policy) {
    if (a.rows() != a.cols()) throw std::invalid_argument("spectral_function: matrix not square");
    const double scale = std::max(a.norm(), 1.0);
    if ((a - a.transpose()).norm() > 1e-10 * scale) {
        throw std::invalid_argument("spectral_function: matrix not self-adjoint");
    }
    return spectral_function(decompose(a), phi, policy);
}

GridOperator multiplication_operator(const GridFunction& f) { return f.asDiagonal(); }

GridOperator commutator(const GridOperator& a, const GridOperator& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols()) {
        throw std::invalid_argument("commutator: shape mismatch");
    }
    return a * b - b * a;
}

GridOperator commutator_with_multiplication(const GridOperator& a, const GridFunction& f) {
    if (a.rows() != a.cols() || a.cols() != f.size()) throw std::invalid_argument("commutator: shape mismatch");
    GridOperator c(a.rows(), a.cols());
    for (Eigen::Index j = 0; j < a.cols(); ++j) c.col(j) = a.col(j).cwiseProduct((f(j) - f.array()).matrix());
    return c;
}

SparseOperator commutator_with_multiplication(const SparseOperator& a, const GridFunction& f) {
    if (a.rows() != a.cols() || a.cols() != f.size()) throw std::invalid_argument("commutator: shape mismatch");
    SparseOperator c = a;
    for (Eigen::Index j = 0; j < c.outerSize(); ++j) {
        for (SparseOperator::InnerIterator it(c, j); it; ++it) it.valueRef() *= f(it.col()) - f(it.row());
    }
    return c;
}

// ---------------------------------------------------------------- GridModel

GridModel::GridModel(GridSpec spec) : spec_(std::move(spec)), fields_(build_vector_fields(spec_)) {}

const GridSpectrum& GridModel::spectrum() const {
    std::call_once(spectrum_once_, [this] {
        SubLaplacian lap = build_sublaplacian(spec_, fields_);
        spectrum_ = std::make_unique<GridSpectrum>(decompose(lap.matrix, lap.asymmetry_residual));
    });
    return *spectrum_;
}

const GridOperator& GridModel::inv_sqrt() const {
    std::call_once(inv_sqrt_once_, [this] {
        inv_sqrt_ = std::make_unique<GridOperator>(
            spectral_function(spectrum(), [](double l) { return 1.0 / std::sqrt(l); }));
    });
    return *inv_sqrt_;
}

const GridOperator& GridModel::sqrt_lap() const {
    std::call_once(sqrt_once_, [this] {
        sqrt_ = std::make_unique<GridOperator>(spectral_function(spectrum(), [](double l) { return std::sqrt(l); }));
    });
    return *sqrt_;
}

const GridOperator& GridModel::riesz(int l) const {
    if (l < 1 || l > 2 * spec_.n) throw std::out_of_range("riesz: index out of range");
    const GridOperator& s = inv_sqrt();
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = riesz_.find(l);
    if (it == riesz_.end()) {
        it = riesz_.emplace(l, std::make_shared<const GridOperator>(fields_.X[l - 1] * s)).first;
    }
    return *it->second;
}

double GridModel::riesz_norm(int l) const {
    const GridOperator& r = riesz(l);
    {
        std::lock_guard<std::mutex> lock(mutex_);
        if (auto it = riesz_norm_.find(l); it != riesz_norm_.end()) return it->second;
    }
    const double v = spectral_norm_lanczos(r);
    std::lock_guard<std::mutex> lock(mutex_);
    return riesz_norm_.emplace(l, v).first->second;
}

SingularSpectrum GridModel::commutator_spectrum(int l, const GridFunction& f) const {
    if (f.size() != static_cast<Eigen::Index>(spec_.dim())) throw std::invalid_argument("commutator_spectrum: size");
    const std::uint64_t key =
        fnv1a64(std::string_view(reinterpret_cast<const char*>(f.data()), sizeof(double) * f.size()));
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = spectra_.find({l, key});
        if (it != spectra_.end()) return it->second;
    }
    const SingularSpectrum s = singular_values(commutator_with_multiplication(riesz(l), f));
    std::lock_guard<std::mutex> lock(mutex_);
    spectra_.emplace(std::make_pair(l, key), s);
    return s;
}

GridOperator GridModel::a_operator(int k, double shift) const {
    if (k < 1 || k > 2 * spec_.n) throw std::out_of_range("a_operator: index out of range");
    if (shift < 0.0) throw std::invalid_argument("a_operator: shift must be nonnegative");
    const GridSpectrum& s = spectrum();
    const Eigen::Index d = s.eigenvalues.size();
    RVector beta(d), phi(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        const bool kernel = shift == 0.0 && s.eigenvalues(i) < s.threshold;
        beta(i) = kernel ? 0.0 : shift + std::max(s.eigenvalues(i), 0.0);
        phi(i) = kernel ? 0.0 : std::pow(beta(i), -0.25);
    }
    const RMatrix& q = s.eigenvectors;
    RMatrix c = q.transpose() * (fields_.X[k - 1] * q);
    for (Eigen::Index j = 0; j < d; ++j) {
        for (Eigen::Index i = 0; i < d; ++i) {
            // Kernel rows and columns already vanish through phi.
            const double w = phi(i) * phi(j);
            c(i, j) *= w == 0.0 ? 0.0 : w * psi_value(beta(i), beta(j));
        }
    }
    return q * c * q.transpose();
}

namespace {

struct ModelCache {
    std::mutex m;
    std::map<std::string, std::shared_ptr<const GridModel>> models;
};

ModelCache& model_cache() {
    static ModelCache c;
    return c;
}

}  // namespace

std::shared_ptr<const GridModel> grid_model(const GridSpec& spec) {
    spec.validate();
    ModelCache& c = model_cache();
    std::lock_guard<std::mutex> lock(c.m);
    auto& slot = c.models[spec.digest()];
    if (!slot) slot = std::make_shared<const GridModel>(spec);
    return slot;
}

void clear_grid_models() {
    ModelCache& c = model_cache();
    std::lock_guard<std::mutex> lock(c.m);
    c.models.clear();
}

GridOperator build_riesz(const GridModel& model, int l) { return model.riesz(l); }

// ---------------------------------------------------------------- diagnostics

namespace {

RMatrix kernel_complement_projector(const GridSpectrum& s) {
    const Eigen::Index k = static_cast<Eigen::Index>(s.kernel_dim);
    const Eigen::Index d = s.eigenvalues.size();
    const RMatrix q = s.eigenvectors.rightCols(d - k);
    return q * q.transpose();
}

}  // namespace

DecompositionReport riesz_decomposition_check(const GridModel& model, int l, const GridFunction& f) {
    const GridSpec& spec = model.spec();
    if (f.size() != static_cast<Eigen::Index>(spec.dim())) throw std::invalid_argument("riesz_decomposition_check: size");
    const GridOperator& s = model.inv_sqrt();
    const GridOperator& r = model.riesz(l);
    const SparseOperator& x = model.fields().X.at(static_cast<std::size_t>(l - 1));

    const RMatrix lhs = commutator_with_multiplication(r, f);
    const RMatrix xm_s = RMatrix(commutator_with_multiplication(x, f)) * s;
    const RMatrix rhs = xm_s - r * (commutator_with_multiplication(model.sqrt_lap(), f) * s);
    const RMatrix p = kernel_complement_projector(model.spectrum());

    DecompositionReport out;
    const double scale = (p * lhs * p).norm();
    out.relative_residual = scale > 0.0 ? (p * (lhs - rhs) * p).norm() / scale : (p * (lhs - rhs) * p).norm();
    const GridFunction xf = x * f;
    const RMatrix pointwise = xf.asDiagonal() * s;
    const double lhs_norm = real_singular_values(lhs)(0);
    out.product_rule_deviation = lhs_norm > 0.0 ? real_singular_values(xm_s - pointwise)(0) / lhs_norm : 0.0;
    return out;
}

double inverse_commutator_check(const GridModel& model, const GridFunction& f) {
    const GridSpectrum& sp = model.spectrum();
    const Eigen::Index k = static_cast<Eigen::Index>(sp.kernel_dim);
    const Eigen::Index d = sp.eigenvalues.size();
    const RMatrix q = sp.eigenvectors.rightCols(d - k);
    const RVector a = sp.eigenvalues.tail(d - k).cwiseMax(0.0).cwiseSqrt();
    const RVector a_inv = a.cwiseInverse();
    const RMatrix b = q.transpose() * f.asDiagonal() * q;
    const RMatrix am = a.asDiagonal() * b - b * a.asDiagonal();
    const RMatrix lhs = a_inv.asDiagonal() * b - b * a_inv.asDiagonal();
    const RMatrix rhs = -(a_inv.asDiagonal() * am * a_inv.asDiagonal());
    const double scale = lhs.norm();
    return scale > 0.0 ? (lhs - rhs).norm() / scale : (lhs - rhs).norm();
}

double t_laplacian_commutation_residual(const GridModel& model) {
    const GridSpec& spec = model.spec();
    const SubLaplacian lap = build_sublaplacian(spec, model.fields());
    const RMatrix t = RMatrix(model.fields().T);
    const RMatrix c = t * lap.matrix - lap.matrix * t;
    return c.norm() / (t.norm() * lap.matrix.norm());
}

std::vector<GridFunction> horizontal_gradient(const VectorFields& fields, const GridFunction& f) {
    std::vector<GridFunction> out;
    out.reserve(fields.X.size());
    for (const auto& x : fields.X) out.emplace_back(x * f);
    return out;
}

double sobolev_seminorm(const GridSpec& spec, const VectorFields& fields, const GridFunction& f, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("sobolev_seminorm: p must be at least 1");
    double total = 0.0;
    for (const GridFunction& g : horizontal_gradient(fields, f)) {
        total += std::pow(g.array().abs().pow(p).sum() * spec.cell_volume(), 1.0 / p);
    }
    return total;
}

namespace {

RVector gauge(const GridSpec& spec) {
    return sample(spec, [](double x, double y, double t) { return koranyi(x, y, t); });
}

double lp_on(const GridSpec& spec, const RVector& v, const std::vector<bool>& mask, double p) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (mask[static_cast<std::size_t>(i)]) s += std::pow(std::abs(v(i)), p);
    }
    return std::pow(s * spec.cell_volume(), 1.0 / p);
}

std::vector<bool> region(const RVector& d, double lo, double hi) {
    std::vector<bool> m(static_cast<std::size_t>(d.size()));
    bool any = false;
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        m[static_cast<std::size_t>(i)] = d(i) >= lo && d(i) <= hi;
        any = any || m[static_cast<std::size_t>(i)];
    }
    if (!any) throw std::invalid_argument("Korányi region contains no grid node");
    return m;
}

double average_on(const GridFunction& f, const std::vector<bool>& mask) {
    double s = 0.0;
    std::size_t c = 0;
    for (Eigen::Index i = 0; i < f.size(); ++i) {
        if (mask[static_cast<std::size_t>(i)]) {
            s += f(i);
            ++c;
        }
    }
    return s / static_cast<double>(c);
}

}  // namespace

double poincare_ratio(const GridSpec& spec, const VectorFields& fields, const GridFunction& f, double R,
                      PoincareMode mode, double p) {
    if (!(R > 0.0)) throw std::invalid_argument("poincare_ratio: radius must be positive");
    const RVector d = gauge(spec);
    // Inner region carries the oscillation, outer region the gradient.
    std::vector<bool> inner, outer;
    if (mode == PoincareMode::ball) {
        inner = region(d, 0.0, 0.5 * R);
        outer = region(d, 0.0, 2.0 * R);
    } else {
        // Open inner edge: points at exactly R belong to the annulus.
        inner = region(d, R, 2.0 * R);
        outer = inner;
    }
    const double c = average_on(f, inner);
    const double num = lp_on(spec, (f.array() - c).matrix(), inner, p);
    RVector grad2 = RVector::Zero(f.size());
    for (const GridFunction& g : horizontal_gradient(fields, f)) grad2 += g.cwiseAbs2();
    const double den = R * lp_on(spec, grad2.cwiseSqrt(), outer, p);
    if (num == 0.0) return 0.0;
    if (den == 0.0) return std::numeric_limits<double>::infinity();
    return num / den;
}

GridFunction approximation_sequence(const GridSpec& spec, const GridFunction& f, double m) {
    if (!(m > 0.0)) throw std::invalid_argument("approximation_sequence: scale must be positive");
    if (f.size() != static_cast<Eigen::Index>(spec.dim())) throw std::invalid_argument("approximation_sequence: size");
    const RVector d = gauge(spec);
    std::vector<bool> annulus(static_cast<std::size_t>(d.size()));
    bool any = false;
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        annulus[static_cast<std::size_t>(i)] = d(i) >= m && d(i) < 2.0 * m;
        any = any || annulus[static_cast<std::size_t>(i)];
    }
    if (!any) throw std::invalid_argument("approximation_sequence: annulus contains no grid node");
    const double c = average_on(f, annulus);
    GridFunction out(f.size());
    for (Eigen::Index i = 0; i < f.size(); ++i) {
        const double rho = d(i) / m;
        double eta = 0.0;
        if (rho <= 0.5) {
            eta = 1.0;
        } else if (rho < 1.0) {
            const double s = 2.0 * (1.0 - rho);
            eta = s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
        }
        out(i) = (f(i) - c) * eta;
    }
    return out;
}

RotationReport quarter_rotation(const GridSpec& spec, const VectorFields& fields, int k, int probes,
                                std::uint64_t seed) {
    spec.validate();
    if (spec.Nx != spec.Ny || spec.Lx != spec.Ly) throw std::invalid_argument("quarter_rotation: asymmetric grid");
    if (k < 1 || k > 2 * spec.n) throw std::out_of_range("quarter_rotation: index out of range");
    const int N = spec.Nx;
    RotationReport out;
    out.U.resize(static_cast<Eigen::Index>(spec.dim()));
    auto& ind = out.U.indices();
    for (int i = 0; i < N; ++i) {
        for (int j = 0; j < N; ++j) {
            for (int t = 0; t < spec.Nt; ++t) ind(spec.index(N - 1 - j, i, t)) = static_cast<int>(spec.index(i, j, t));
        }
    }
    const SparseOperator& xk = fields.X.at(static_cast<std::size_t>(k - 1));
    // U^{-1} X U = Y and U^{-1} Y U = -X.
    const bool first = k <= spec.n;
    const SparseOperator& partner = fields.X.at(static_cast<std::size_t>(first ? k - 1 + spec.n : k - 1 - spec.n));
    const double sign = first ? 1.0 : -1.0;
    for (int p = 0; p < probes; ++p) {
        const GridFunction f = random_interior_function(spec, 2, seed + static_cast<std::uint64_t>(p));
        const GridFunction lhs = out.U.inverse() * (xk * (out.U * f));
        const GridFunction rhs = sign * (partner * f);
        out.residual = std::max(out.residual, (lhs - rhs).norm());
    }
    return out;
}

Eigen::PermutationMatrix<Eigen::Dynamic> t_translation(const GridSpec& spec, int cells) {
    Eigen::PermutationMatrix<Eigen::Dynamic> u(static_cast<Eigen::Index>(spec.dim()));
    auto& ind = u.indices();
    const int nt = spec.Nt;
    const int shift = ((cells % nt) + nt) % nt;
    for (int i = 0; i < spec.Nx; ++i) {
        for (int j = 0; j < spec.Ny; ++j) {
            for (int t = 0; t < nt; ++t) ind(spec.index(i, j, t)) = static_cast<int>(spec.index(i, j, (t + shift) % nt));
        }
    }
    return u;
}

GridFunction random_interior_function(const GridSpec& spec, int margin, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    GridFunction f = GridFunction::Zero(static_cast<Eigen::Index>(spec.dim()));
    for (int i = margin; i < spec.Nx - margin; ++i) {
        for (int j = margin; j < spec.Ny - margin; ++j) {
            for (int t = margin; t < spec.Nt - margin; ++t) f(spec.index(i, j, t)) = nd(rng);
        }
    }
    return f;
}

namespace {

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
    std::filesystem::path p = path;
    p += ".json";
    return p;
}

}  // namespace

void dump_operator(const std::filesystem::path& path, const GridOperator& a, const GridSpec& spec,
                   const std::string& kind, double symmetry_residual) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("dump_operator: cannot open " + path.string());
    std::vector<double> row(static_cast<std::size_t>(2 * a.cols()), 0.0);
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) row[static_cast<std::size_t>(2 * j)] = a(i, j);
        os.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(double)));
    }
    if (!os) throw std::runtime_error("dump_operator: write failed for " + path.string());
    Json meta;
    meta["spec"] = spec.to_json();
    meta["kind"] = kind;
    meta["symmetry_residual"] = symmetry_residual;
    meta["rows"] = a.rows();
    meta["cols"] = a.cols();
    meta["dtype"] = "complex128";
    meta["order"] = "row-major";
    write_text_file(sidecar_path(path), dump_json(meta));
}

GridOperator load_operator(const std::filesystem::path& path) {
    const Json meta = read_json_file(sidecar_path(path));
    const auto rows = meta.at("rows").get<Eigen::Index>();
    const auto cols = meta.at("cols").get<Eigen::Index>();
    if (meta.at("dtype") != "complex128" || meta.at("order") != "row-major") {
        throw std::invalid_argument("load_operator: unsupported layout");
    }
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_operator: cannot open " + path.string());
    GridOperator a(rows, cols);
    std::vector<double> row(static_cast<std::size_t>(2 * cols));
    for (Eigen::Index i = 0; i < rows; ++i) {
        is.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(double)));
        if (!is) throw std::invalid_argument("load_operator: truncated file " + path.string());
        for (Eigen::Index j = 0; j < cols; ++j) {
            if (row[static_cast<std::size_t>(2 * j + 1)] != 0.0) {
                throw std::invalid_argument("load_operator: complex entries are not supported");
            }
            a(i, j) = row[static_cast<std::size_t>(2 * j)];
        }
    }
    return a;
}

}  // namespace heislab
