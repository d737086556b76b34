#ifndef COSETICA_COST_SQUARED_KURTOSIS_HPP
#define COSETICA_COST_SQUARED_KURTOSIS_HPP

#include <vector>

#include "cosetica/cost_kurtosis.hpp"
#include "cosetica/moment_estimation.hpp"
#include "cosetica/tensor_algebra.hpp"
#include "cosetica/types.hpp"

// Case II: cost f2 = sum_i (kappa_i - 3)^2.  The squared-excess contrast keeps
// zero-excess (Gaussian) channels stationary: column q of bQ vanishes when
// kappa_q = 3, so those coordinates drop out of the gradient.  Same vectorized
// machinery as Case I with the bold statistics below.

namespace cosetica {

struct CaseIIStats {
    Matrix bK;               // bK_pq = 2 R1_pq (kappa_q - 3) kappa_q
    std::vector<Matrix> bV;  // bV^i = 2 (kappa_i - 3) (3 U2^i - kappa_i U0^i)
    Matrix bS;               // diag(2 (kappa_i - 3))
    Matrix bQ;               // bQ = bq bS (column q scaled by 2 (kappa_q - 3))
    Matrix bq;               // bq_pq = R1_pq kappa_q - R3_pq
};

inline double cost2(const MomentSet& m) { return (m.kappa.array() - 3.0).square().sum(); }

inline CaseIIStats case2_stats(const MomentSet& m) {
    const Index n = m.dim();
    const Vector excess = m.kappa.array() - 3.0;
    CaseIIStats s;
    s.bS = (2.0 * excess).asDiagonal();
    s.bK = m.R1 * (2.0 * excess.array() * m.kappa.array()).matrix().asDiagonal();
    s.bq = m.R1 * m.kappa.asDiagonal() - m.R3;
    s.bQ = s.bq * s.bS;
    s.bV.resize(n);
    for (Index i = 0; i < n; ++i)
        s.bV[i] = 2.0 * excess(i) * (3.0 * m.U2[i] - m.kappa(i) * m.U0[i]);
    return s;
}

inline Matrix assemble_W2(const CaseIIStats& s, const MomentSet& m) {
    const Index n = s.bQ.rows();
    const Matrix eye = Matrix::Identity(n, n);
    const Matrix t = build_T(n).matrix;
    const Matrix p = build_P(n).matrix;

    Matrix w = -2.0 * (kron(eye, s.bQ) + kron(s.bQ.transpose(), eye));
    w += 4.0 * direct_sum(s.bV) * t;
    Matrix bracket = 24.0 * kron(eye, s.bK) * p * kron(eye, m.R1).transpose();
    bracket += 32.0 * kron(eye, s.bq) * p * kron(eye, s.bq).transpose();
    bracket -= 16.0 * kron(eye, Matrix(m.R1 * s.bS)) * p * kron(eye, m.R3).transpose();
    bracket -= 16.0 * kron(eye, Matrix(m.R3 * s.bS)) * p * kron(eye, m.R1).transpose();
    w += bracket * t;
    return w;
}

// d f2 / d Delta_{kl} at slot l + N(k-1); as a vector, -4 cs(bQ).
inline VecMat gradient_vec2(const CaseIIStats& s) {
    return VecMat(s.bQ.rows(), -4.0 * cs(s.bQ).data);
}

inline UpdateStep solve_delta2(const CaseIIStats& s, const MomentSet& m) {
    return detail::solve_newton_system(assemble_W2(s, m), s.bQ);
}

// Second-order expansion of f2; the per-channel matrix R1 kappa_i - R3 agrees
// with bq in its i-th column (same column trick as Case I).
inline double quadratic_model2(const Matrix& delta, const MomentSet& m, const CaseIIStats& s) {
    detail::require_zero_diagonal(delta, "quadratic_model2");
    const Index n = m.dim();
    const Matrix a = delta + 0.5 * delta * delta;
    const Vector tq = (a * s.bq).diagonal();
    const Vector dq = (delta * s.bq).diagonal();
    const Vector dr1 = (delta * m.R1).diagonal();
    const Vector dr3 = (delta * m.R3).diagonal();

    double total = 0.0;
    for (Index i = 0; i < n; ++i) {
        const double e = m.kappa(i) - 3.0;
        const double quad = delta.row(i) * s.bV[i] * delta.row(i).transpose();
        total += e * e - 8.0 * e * tq(i) + 2.0 * quad + 16.0 * dq(i) * dq(i) +
                 24.0 * e * m.kappa(i) * dr1(i) * dr1(i) - 32.0 * e * dr1(i) * dr3(i);
    }
    return total;
}

}  // namespace cosetica

#endif
