#pragma once

#include "heislab/io.hpp"
#include "heislab/linalg.hpp"

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <vector>

namespace heislab {

using MultiIndex = std::vector<int>;

// Multi-indices alpha in Z_+^n with |alpha| <= K, graded then lexicographic.
class MultiIndexBasis {
public:
    static constexpr std::size_t kMaxDim = 200000;

    MultiIndexBasis(int n, int K);

    int n() const { return n_; }
    int K() const { return K_; }
    std::size_t dim() const { return order_.size(); }
    const std::vector<MultiIndex>& order() const { return order_; }
    const MultiIndex& at(std::size_t i) const { return order_.at(i); }
    int grade(std::size_t i) const { return grades_.at(i); }

    std::optional<std::size_t> find(const MultiIndex& alpha) const;
    std::size_t index(const MultiIndex& alpha) const;  // throws std::out_of_range

    bool operator==(const MultiIndexBasis& o) const { return n_ == o.n_ && K_ == o.K_; }

private:
    int n_;
    int K_;
    std::vector<MultiIndex> order_;
    std::vector<int> grades_;
    std::map<MultiIndex, std::size_t> lookup_;
};

using BasisPtr = std::shared_ptr<const MultiIndexBasis>;

BasisPtr enumerate_basis(int n, int K);

// Hermite-basis matrices of p_j, q_j (j is 1-based) compressed to the cutoff.
CMatrix momentum_matrix(const MultiIndexBasis& b, int j);
CMatrix position_matrix(const MultiIndexBasis& b, int j);
// Diagonal 2|alpha| + n.
RVector oscillator_diagonal(const MultiIndexBasis& b);
CMatrix oscillator_matrix(const MultiIndexBasis& b);
// H^s, diagonal.
CMatrix oscillator_power(const MultiIndexBasis& b, double s);
CMatrix matrix_unit(const MultiIndexBasis& b, const MultiIndex& alpha, const MultiIndex& beta);
// i * sum_alpha (2 alpha_j + 2)^{1/2} E_{alpha + e_j, alpha}, within the cutoff.
CMatrix ladder_matrix(const MultiIndexBasis& b, int j);
// Diagonal 0/1 mask selecting |alpha| <= K - 1.
RVector interior_mask(const MultiIndexBasis& b);

// Element of the truncated B(L^2(R^n)) (x) C^2: one block per sign of s.
struct FiberOperator {
    BasisPtr basis;
    CMatrix minus;
    CMatrix plus;

    std::size_t dim() const { return basis ? basis->dim() : 0; }

    static FiberOperator zero(BasisPtr b);
    static FiberOperator identity(BasisPtr b);
    // m (x) (c_minus, c_plus).
    static FiberOperator tensor(BasisPtr b, const CMatrix& m, cplx c_minus, cplx c_plus);
    // m (x) 1 and m (x) z with 1 = (1, 1), z = (-1, 1).
    static FiberOperator tensor_one(BasisPtr b, const CMatrix& m) { return tensor(std::move(b), m, 1.0, 1.0); }
    static FiberOperator tensor_z(BasisPtr b, const CMatrix& m) { return tensor(std::move(b), m, -1.0, 1.0); }
};

FiberOperator fiber_mul(const FiberOperator& x, const FiberOperator& y);
FiberOperator fiber_adjoint(const FiberOperator& x);
FiberOperator fiber_add(const FiberOperator& x, const FiberOperator& y);
FiberOperator fiber_scale(const FiberOperator& x, cplx c);

FiberOperator operator*(const FiberOperator& x, const FiberOperator& y);
FiberOperator operator+(const FiberOperator& x, const FiberOperator& y);
FiberOperator operator*(cplx c, const FiberOperator& x);

// Riesz symbols; l in 1..2n.
FiberOperator riesz_symbol(BasisPtr b, int l);

// trace(minus) + trace(plus).
cplx tr_sigma(const FiberOperator& x);

// Schatten p-norm with respect to Tr (x) Sigma.
double fiber_schatten_norm(const FiberOperator& x, double p);
// Same, raised to the power p (avoids a root when only ||x||^p is needed).
double fiber_schatten_power(const FiberOperator& x, double p);

Json fiber_to_json(const FiberOperator& x);
FiberOperator fiber_from_json(const Json& j);

}  // namespace heislab
