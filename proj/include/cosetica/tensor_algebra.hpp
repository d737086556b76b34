#ifndef COSETICA_TENSOR_ALGEBRA_HPP
#define COSETICA_TENSOR_ALGEBRA_HPP

#include <cmath>
#include <vector>

#include "cosetica/types.hpp"

// Vectorization toolkit: the column-stacking map cs, the intertwiner T with
// T cs(A) = cs(A'), the diagonal projector P, the off-diagonal selector P~,
// Kronecker products and block-diagonal direct sums.  Everything is built as
// a dense matrix: the Newton solve is a dense N^2 x N^2 system anyway, and at
// desk scale (N <= 20) dense is simplest to validate.

namespace cosetica {

// The one home of the index convention.  cs places A_ij (1-based) at slot
// i + N(j-1); 0-based this is row + N*col.  The gradient convention "read
// d/dDelta_{kl} at slot l + N(k-1)" is the same map applied to (row=l, col=k),
// i.e. cs of the transposed index pair -- use vec_index(l, k) for it.
inline Index vec_index(Index row, Index col, Index n) { return row + n * col; }

// Column-stacked N x N matrix.
struct VecMat {
    Index dim = 0;
    Vector data;

    VecMat() = default;
    VecMat(Index n, Vector v) : dim(n), data(std::move(v)) {
        if (data.size() != dim * dim) throw DimensionError("VecMat: length != dim^2");
    }
};

enum class OperatorKind { intertwiner, diag_projection, offdiag_selector, general };

// An N^2-coordinate operator (square for T and P, (N^2-N) x N^2 for P~).
struct BigOperator {
    Index dim = 0;
    Matrix matrix;
    OperatorKind kind = OperatorKind::general;
};

inline VecMat cs(const Matrix& a) {
    if (a.rows() != a.cols()) throw DimensionError("cs: matrix is not square");
    const Index n = a.rows();
    return VecMat(n, Eigen::Map<const Vector>(a.data(), n * n));  // column-major = column stacking
}

inline Matrix cs_inv(const Vector& v) {
    const Index n2 = v.size();
    const auto n = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(n2))));
    if (n * n != n2) throw DimensionError("cs_inv: length is not a perfect square");
    return Eigen::Map<const Matrix>(v.data(), n, n);
}

inline Matrix cs_inv(const VecMat& v) { return cs_inv(v.data); }

// T cs(A) = cs(A'): A_ij lives at slot i+N*j (0-based) and must land at j+N*i.
inline BigOperator build_T(Index n) {
    if (n < 1) throw DimensionError("build_T: N must be positive");
    Matrix t = Matrix::Zero(n * n, n * n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) t(vec_index(j, i, n), vec_index(i, j, n)) = 1.0;
    return {n, std::move(t), OperatorKind::intertwiner};
}

// Diagonal 0/1 projector keeping the N slots of diagonal entries, k = N(i-1)+i.
inline BigOperator build_P(Index n) {
    if (n < 1) throw DimensionError("build_P: N must be positive");
    Matrix p = Matrix::Zero(n * n, n * n);
    for (Index i = 0; i < n; ++i) p(vec_index(i, i, n), vec_index(i, i, n)) = 1.0;
    return {n, std::move(p), OperatorKind::diag_projection};
}

// (N^2-N) x N^2 selector of off-diagonal slots, in increasing slot order;
// P~ P~' = I and P~' P~ = I - P.
inline BigOperator build_P_tilde(Index n) {
    if (n < 1) throw DimensionError("build_P_tilde: N must be positive");
    Matrix pt = Matrix::Zero(n * n - n, n * n);
    Index r = 0;
    for (Index s = 0; s < n * n; ++s)
        if (s % (n + 1) != 0) pt(r++, s) = 1.0;  // diagonal slots are multiples of N+1
    return {n, std::move(pt), OperatorKind::offdiag_selector};
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// Block diagonal of exactly N blocks, each N x N.
inline Matrix direct_sum(const std::vector<Matrix>& blocks) {
    const auto n = static_cast<Index>(blocks.size());
    if (n < 1) throw DimensionError("direct_sum: no blocks");
    Matrix out = Matrix::Zero(n * n, n * n);
    for (Index i = 0; i < n; ++i) {
        if (blocks[i].rows() != n || blocks[i].cols() != n)
            throw DimensionError("direct_sum: every block must be N x N for N blocks");
        out.block(i * n, i * n, n, n) = blocks[i];
    }
    return out;
}

}  // namespace cosetica

#endif
