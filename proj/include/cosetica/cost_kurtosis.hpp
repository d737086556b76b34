#ifndef COSETICA_COST_KURTOSIS_HPP
#define COSETICA_COST_KURTOSIS_HPP

#include <cmath>
#include <limits>
#include <vector>

#include "cosetica/moment_estimation.hpp"
#include "cosetica/tensor_algebra.hpp"
#include "cosetica/types.hpp"

// Case I: cost f = sum_i kappa_i.  Stationarity matrix Q, curvature data V^(i)
// and K, the vectorized second-order operator W, and the closed-form
// zero-diagonal saddle-point step  cs(Delta) = 4 [(I-P)W(I-P)+P]^{-1} (I-P)cs(Q).

namespace cosetica {

struct CaseIStats {
    Matrix K;                // K_pq = kappa_q R1_pq
    std::vector<Matrix> V;   // V^i = 3 U2^i - kappa_i U0^i  (symmetric)
    Matrix Q;                // Q = K - R3
};

struct UpdateStep {
    Matrix delta;             // zero diagonal, exactly
    double residual_norm;     // || M cs(Delta) - 4 (I-P) cs(Q) ||
    double system_condition;  // 1 / rcond of M
};

namespace detail {

// Test-only fault injection: flips the sign of one W term so the validation
// suite can prove its Hessian check actually bites (see cmd_check).
inline bool corrupt_w_sign = false;

inline UpdateStep solve_newton_system(const Matrix& w, const Matrix& q) {
    const Index n = q.rows();
    const Matrix p = build_P(n).matrix;
    const Matrix ip = Matrix::Identity(n * n, n * n) - p;
    const Matrix m = ip * w * ip + p;
    const Vector rhs = 4.0 * (ip * cs(q).data);

    Eigen::PartialPivLU<Matrix> lu(m);
    // rcond() can report ~1 for exactly singular input (0/0 inside the norm
    // estimator), so fold in the pivot ratio, which the factorization gives
    // for free and which blows up reliably in that case.
    const Vector pivots = lu.matrixLU().diagonal().cwiseAbs();
    const double pivot_ratio = pivots.minCoeff() > 0.0
                                   ? pivots.maxCoeff() / pivots.minCoeff()
                                   : std::numeric_limits<double>::infinity();
    const double rc = lu.rcond();
    const double condition =
        std::max(rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity(), pivot_ratio);
    if (!(condition <= 1e12)) throw IllConditionedError(condition);

    const Vector d = lu.solve(rhs);
    UpdateStep step;
    step.residual_norm = (m * d - rhs).norm();
    step.system_condition = condition;
    step.delta = cs_inv(d);
    step.delta.diagonal().setZero();
    return step;
}

inline void require_zero_diagonal(const Matrix& delta, const char* who) {
    if (delta.diagonal().cwiseAbs().maxCoeff() != 0.0)
        throw DimensionError(std::string(who) + ": delta must have zero diagonal");
}

}  // namespace detail

inline double cost(const MomentSet& m) { return m.kappa.sum(); }

inline CaseIStats case1_stats(const MomentSet& m) {
    const Index n = m.dim();
    CaseIStats s;
    s.K = m.R1 * m.kappa.asDiagonal();
    s.V.resize(n);
    for (Index i = 0; i < n; ++i) s.V[i] = 3.0 * m.U2[i] - m.kappa(i) * m.U0[i];
    s.Q = s.K - m.R3;
    return s;
}

inline Matrix assemble_W(const CaseIStats& s, const MomentSet& m) {
    const Index n = s.Q.rows();
    const Matrix eye = Matrix::Identity(n, n);
    const Matrix t = build_T(n).matrix;
    const Matrix p = build_P(n).matrix;

    Matrix w = -2.0 * (kron(eye, s.Q) + kron(s.Q.transpose(), eye));
    w += 4.0 * direct_sum(s.V) * t;
    const double c24 = detail::corrupt_w_sign ? -24.0 : 24.0;
    Matrix bracket = c24 * kron(eye, s.K) * p * kron(eye, m.R1).transpose();
    bracket -= 16.0 * kron(eye, m.R1) * p * kron(eye, m.R3).transpose();
    bracket -= 16.0 * kron(eye, m.R3) * p * kron(eye, m.R1).transpose();
    w += bracket * t;
    return w;
}

// d f / d Delta_{kl} sits at slot l + N(k-1): the cs image of -4 Q read
// through the transposed index pair (see vec_index).  As a vector, -4 cs(Q).
inline VecMat gradient_vec(const CaseIStats& s) { return VecMat(s.Q.rows(), -4.0 * cs(s.Q).data); }

inline UpdateStep solve_delta(const CaseIStats& s, const MomentSet& m) {
    return detail::solve_newton_system(assemble_W(s, m), s.Q);
}

// Second-order expansion of f at Delta = 0.  The per-channel matrix
// kappa_i R1 - R3 agrees with Q in its i-th column, and only column i is read
// by [. ]_ii, so Q serves every channel.
inline double quadratic_model(const Matrix& delta, const MomentSet& m, const CaseIStats& s) {
    detail::require_zero_diagonal(delta, "quadratic_model");
    const Index n = m.dim();
    const Matrix a = delta + 0.5 * delta * delta;
    const Vector tq = (a * s.Q).diagonal();
    const Vector dr1 = (delta * m.R1).diagonal();
    const Vector dr3 = (delta * m.R3).diagonal();

    double total = 0.0;
    for (Index i = 0; i < n; ++i) {
        const double quad = delta.row(i) * s.V[i] * delta.row(i).transpose();
        total += m.kappa(i) - 4.0 * tq(i) + 2.0 * quad + 12.0 * m.kappa(i) * dr1(i) * dr1(i) -
                 16.0 * dr1(i) * dr3(i);
    }
    return total;
}

}  // namespace cosetica

#endif
