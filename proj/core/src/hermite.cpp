#include "heislab/hermite.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace heislab {

namespace {

// Exact binomial with overflow detection.
std::size_t binomial_checked(int top, int k) {
    std::size_t r = 1;
    for (int i = 1; i <= k; ++i) {
        const auto num = static_cast<std::size_t>(top - k + i);
        if (r > std::numeric_limits<std::size_t>::max() / num) {
            throw std::overflow_error("enumerate_basis: basis dimension overflows");
        }
        r = r * num / static_cast<std::size_t>(i);
    }
    return r;
}

// All alpha of grade g in ascending lexicographic order.
void grade_indices(int n, int g, MultiIndex& cur, int pos, std::vector<MultiIndex>& out) {
    if (pos == n - 1) {
        cur[pos] = g;
        out.push_back(cur);
        return;
    }
    for (int v = 0; v <= g; ++v) {
        cur[pos] = v;
        grade_indices(n, g - v, cur, pos + 1, out);
    }
}

void check_coordinate(const MultiIndexBasis& b, int j, const char* who) {
    if (j < 1 || j > b.n()) throw std::out_of_range(std::string(who) + ": coordinate out of range");
}

void check_same_basis(const FiberOperator& x, const FiberOperator& y, const char* who) {
    if (!x.basis || !y.basis || !(*x.basis == *y.basis)) {
        throw std::invalid_argument(std::string(who) + ": basis mismatch");
    }
}

// Matrix with entries c_down * sqrt(alpha_j/2) at (alpha - e_j, alpha) and
// c_up * sqrt((alpha_j+1)/2) at (alpha + e_j, alpha), columns indexed by alpha.
CMatrix tridiagonal_coordinate(const MultiIndexBasis& b, int j, cplx c_down, cplx c_up) {
    const auto d = static_cast<Eigen::Index>(b.dim());
    CMatrix m = CMatrix::Zero(d, d);
    const int c = j - 1;
    for (std::size_t col = 0; col < b.dim(); ++col) {
        MultiIndex alpha = b.at(col);
        const int aj = alpha[c];
        if (aj > 0) {
            MultiIndex lower = alpha;
            lower[c] -= 1;
            m(static_cast<Eigen::Index>(b.index(lower)), static_cast<Eigen::Index>(col)) =
                c_down * std::sqrt(aj / 2.0);
        }
        MultiIndex upper = alpha;
        upper[c] += 1;
        if (auto row = b.find(upper)) {
            m(static_cast<Eigen::Index>(*row), static_cast<Eigen::Index>(col)) =
                c_up * std::sqrt((aj + 1) / 2.0);
        }
    }
    return m;
}

}  // namespace

MultiIndexBasis::MultiIndexBasis(int n, int K) : n_(n), K_(K) {
    if (n < 1) throw std::invalid_argument("enumerate_basis: n must be >= 1");
    if (K < 0) throw std::invalid_argument("enumerate_basis: K must be >= 0");
    const std::size_t d = binomial_checked(K + n, n);
    if (d > kMaxDim) throw std::overflow_error("enumerate_basis: basis dimension exceeds cap");
    order_.reserve(d);
    MultiIndex cur(static_cast<std::size_t>(n), 0);
    for (int g = 0; g <= K; ++g) {
        const std::size_t before = order_.size();
        grade_indices(n, g, cur, 0, order_);
        grades_.insert(grades_.end(), order_.size() - before, g);
    }
    for (std::size_t i = 0; i < order_.size(); ++i) lookup_.emplace(order_[i], i);
}

std::optional<std::size_t> MultiIndexBasis::find(const MultiIndex& alpha) const {
    auto it = lookup_.find(alpha);
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
}

std::size_t MultiIndexBasis::index(const MultiIndex& alpha) const {
    auto i = find(alpha);
    if (!i) throw std::out_of_range("multi-index outside the cutoff");
    return *i;
}

BasisPtr enumerate_basis(int n, int K) { return std::make_shared<const MultiIndexBasis>(n, K); }

CMatrix momentum_matrix(const MultiIndexBasis& b, int j) {
    check_coordinate(b, j, "momentum_matrix");
    return tridiagonal_coordinate(b, j, -I_unit, I_unit);
}

CMatrix position_matrix(const MultiIndexBasis& b, int j) {
    check_coordinate(b, j, "position_matrix");
    return tridiagonal_coordinate(b, j, 1.0, 1.0);
}

RVector oscillator_diagonal(const MultiIndexBasis& b) {
    RVector d(static_cast<Eigen::Index>(b.dim()));
    for (std::size_t i = 0; i < b.dim(); ++i) d(static_cast<Eigen::Index>(i)) = 2.0 * b.grade(i) + b.n();
    return d;
}

CMatrix oscillator_matrix(const MultiIndexBasis& b) {
    return oscillator_diagonal(b).cast<cplx>().asDiagonal();
}

CMatrix oscillator_power(const MultiIndexBasis& b, double s) {
    return oscillator_diagonal(b).array().pow(s).matrix().cast<cplx>().asDiagonal();
}

CMatrix matrix_unit(const MultiIndexBasis& b, const MultiIndex& alpha, const MultiIndex& beta) {
    const auto d = static_cast<Eigen::Index>(b.dim());
    CMatrix m = CMatrix::Zero(d, d);
    m(static_cast<Eigen::Index>(b.index(alpha)), static_cast<Eigen::Index>(b.index(beta))) = 1.0;
    return m;
}

CMatrix ladder_matrix(const MultiIndexBasis& b, int j) {
    check_coordinate(b, j, "ladder_matrix");
    const auto d = static_cast<Eigen::Index>(b.dim());
    CMatrix m = CMatrix::Zero(d, d);
    for (std::size_t col = 0; col < b.dim(); ++col) {
        MultiIndex up = b.at(col);
        const int aj = up[static_cast<std::size_t>(j - 1)];
        up[static_cast<std::size_t>(j - 1)] += 1;
        if (auto row = b.find(up)) {
            m(static_cast<Eigen::Index>(*row), static_cast<Eigen::Index>(col)) = I_unit * std::sqrt(2.0 * aj + 2.0);
        }
    }
    return m;
}

RVector interior_mask(const MultiIndexBasis& b) {
    RVector m(static_cast<Eigen::Index>(b.dim()));
    for (std::size_t i = 0; i < b.dim(); ++i) m(static_cast<Eigen::Index>(i)) = b.grade(i) <= b.K() - 1 ? 1.0 : 0.0;
    return m;
}

FiberOperator FiberOperator::zero(BasisPtr b) {
    const auto d = static_cast<Eigen::Index>(b->dim());
    return FiberOperator{std::move(b), CMatrix::Zero(d, d), CMatrix::Zero(d, d)};
}

FiberOperator FiberOperator::identity(BasisPtr b) {
    const auto d = static_cast<Eigen::Index>(b->dim());
    return FiberOperator{std::move(b), CMatrix::Identity(d, d), CMatrix::Identity(d, d)};
}

FiberOperator FiberOperator::tensor(BasisPtr b, const CMatrix& m, cplx c_minus, cplx c_plus) {
    const auto d = static_cast<Eigen::Index>(b->dim());
    if (m.rows() != d || m.cols() != d) throw std::invalid_argument("FiberOperator::tensor: shape mismatch");
    return FiberOperator{std::move(b), c_minus * m, c_plus * m};
}

FiberOperator fiber_mul(const FiberOperator& x, const FiberOperator& y) {
    check_same_basis(x, y, "fiber_mul");
    return FiberOperator{x.basis, x.minus * y.minus, x.plus * y.plus};
}

FiberOperator fiber_adjoint(const FiberOperator& x) {
    return FiberOperator{x.basis, x.minus.adjoint(), x.plus.adjoint()};
}

FiberOperator fiber_add(const FiberOperator& x, const FiberOperator& y) {
    check_same_basis(x, y, "fiber_add");
    return FiberOperator{x.basis, x.minus + y.minus, x.plus + y.plus};
}

FiberOperator fiber_scale(const FiberOperator& x, cplx c) { return FiberOperator{x.basis, c * x.minus, c * x.plus}; }

FiberOperator operator*(const FiberOperator& x, const FiberOperator& y) { return fiber_mul(x, y); }
FiberOperator operator+(const FiberOperator& x, const FiberOperator& y) { return fiber_add(x, y); }
FiberOperator operator*(cplx c, const FiberOperator& x) { return fiber_scale(x, c); }

FiberOperator riesz_symbol(BasisPtr b, int l) {
    const int n = b->n();
    if (l < 1 || l > 2 * n) throw std::out_of_range("riesz_symbol: index out of range");
    const CMatrix h_inv_half = oscillator_power(*b, -0.5);
    if (l <= n) {
        const CMatrix block = I_unit * momentum_matrix(*b, l) * h_inv_half;
        return FiberOperator::tensor_one(std::move(b), block);
    }
    const CMatrix block = I_unit * position_matrix(*b, l - n) * h_inv_half;
    return FiberOperator::tensor_z(std::move(b), block);
}

cplx tr_sigma(const FiberOperator& x) { return x.minus.trace() + x.plus.trace(); }

double fiber_schatten_power(const FiberOperator& x, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("fiber_schatten_norm: exponent must be >= 1");
    double acc = 0.0;
    for (const CMatrix* blk : {&x.minus, &x.plus}) {
        if (p == 4.0) {
            // tr((B*B)^2) = ||B*B||_F^2
            const CMatrix g = blk->adjoint() * (*blk);
            acc += g.squaredNorm();
        } else if (p == 2.0) {
            acc += blk->squaredNorm();
        } else {
            const RVector s = complex_singular_values(*blk);
            acc += s.array().pow(p).sum();
        }
    }
    return acc;
}

double fiber_schatten_norm(const FiberOperator& x, double p) {
    return std::pow(fiber_schatten_power(x, p), 1.0 / p);
}

namespace {

Json matrix_to_json(const CMatrix& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

CMatrix matrix_from_json(const Json& j, std::size_t d) {
    const auto n = static_cast<Eigen::Index>(d);
    if (!j.is_array() || j.size() != d) throw std::invalid_argument("fiber JSON: block has wrong row count");
    CMatrix m(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto& row = j.at(static_cast<std::size_t>(r));
        if (!row.is_array() || row.size() != d) throw std::invalid_argument("fiber JSON: block has wrong column count");
        for (Eigen::Index c = 0; c < n; ++c) {
            const auto& e = row.at(static_cast<std::size_t>(c));
            m(r, c) = cplx(e.at(0).get<double>(), e.at(1).get<double>());
        }
    }
    return m;
}

}  // namespace

Json fiber_to_json(const FiberOperator& x) {
    Json j;
    j["n"] = x.basis->n();
    j["K"] = x.basis->K();
    j["order"] = x.basis->order();
    j["minus"] = matrix_to_json(x.minus);
    j["plus"] = matrix_to_json(x.plus);
    return j;
}

FiberOperator fiber_from_json(const Json& j) {
    auto b = enumerate_basis(j.at("n").get<int>(), j.at("K").get<int>());
    if (j.contains("order") && j.at("order").get<std::vector<MultiIndex>>() != b->order()) {
        throw std::invalid_argument("fiber JSON: basis order does not match graded-lex enumeration");
    }
    FiberOperator x{b, matrix_from_json(j.at("minus"), b->dim()), matrix_from_json(j.at("plus"), b->dim())};
    return x;
}

}  // namespace heislab
