#ifndef COSETICA_NEWTON_ENGINE_HPP
#define COSETICA_NEWTON_ENGINE_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cosetica/cost_model.hpp"
#include "cosetica/matrix_exp.hpp"
#include "cosetica/moment_estimation.hpp"
#include "cosetica/types.hpp"

// Outer iteration: C_t = e^{Delta_t} C_{t-1} with the closed-form
// zero-diagonal Delta, stopping when ||Delta||_F < tol.  An optional
// first-order warm phase precedes the Newton steps: plain relative-gradient
// steps on the configured cost plus a log-det barrier that repels the
// row-collision configurations where the gradient flow otherwise collapses
// (those are genuine in-sample stationary points).  Every state is reduced to
// the canonical coset representative with unit-second-moment output channels;
// this is a pure row rescaling (the K-action the cost is invariant under),
// not a whitening step -- the data is never touched.

namespace cosetica {

enum class Damping { none, halving };

struct WarmStart {
    int n_steps = 0;       // 0 = off
    double rate = 0.1;     // normalized step length
    double barrier = 4.0;  // log-det barrier weight
};

struct SolverConfig {
    CostCase cost_case = CostCase::case1;
    double tol_delta = 1e-8;
    int max_iters = 200;
    Damping damping = Damping::halving;
    double max_step_norm = 1.0;
    WarmStart warm_start{};
    std::uint64_t seed = 0;
    bool renormalize = true;
};

struct StepRecord {
    double delta_norm;        // Frobenius norm of the applied Delta
    double cost;              // cost at the pre-step state
    double system_condition;  // 0 for warm steps (no linear system solved)
    int damping_halvings;
    bool warm;
};

struct IterationTrace {
    std::vector<StepRecord> steps;

    Index warm_steps() const {
        Index k = 0;
        for (const auto& s : steps) k += s.warm ? 1 : 0;
        return k;
    }
    Index newton_steps() const { return static_cast<Index>(steps.size()) - warm_steps(); }
};

struct SeparationResult {
    Matrix C_final;
    SignalMatrix Y;
    IterationTrace trace;
    bool converged = false;
    std::optional<double> convergence_order;
    std::optional<std::string> failure;  // set when a step error aborts the run
};

// Canonical coset representative: rescale rows of C so every channel of
// Y = CX has unit sample second moment.  Returns the rescaled C and Y.
inline std::pair<Matrix, SignalMatrix> canonical_state(const Matrix& c, const SignalMatrix& x,
                                                       bool renormalize = true) {
    SignalMatrix y(c * x.data);
    if (!renormalize) return {c, std::move(y)};
    const Vector m2 = y.data.array().square().rowwise().mean();
    const double max_m2 = m2.maxCoeff();
    for (Index i = 0; i < m2.size(); ++i)
        if (m2(i) <= 1e-30 * max_m2) throw DegenerateChannelError(i);
    const Vector d = m2.cwiseSqrt().cwiseInverse();
    return {d.asDiagonal() * c, SignalMatrix(d.asDiagonal() * y.data)};
}

// One Newton step: moments of Y = Cx, closed-form Delta, damping, e^Delta C.
inline std::pair<Matrix, StepRecord> step(const Matrix& c, const SignalMatrix& x,
                                          const SolverConfig& cfg) {
    const CostModel& model = cost_model(cfg.cost_case);
    auto [cc, y] = canonical_state(c, x, cfg.renormalize);
    const MomentSet m = estimate_moments(y);
    const UpdateStep u = model.solve(m);

    Matrix delta = u.delta;
    int halvings = 0;
    if (cfg.damping == Damping::halving)
        while (delta.norm() > cfg.max_step_norm) {
            delta *= 0.5;
            ++halvings;
        }

    Matrix next = matrix_exp(delta) * cc;
    return {std::move(next),
            StepRecord{delta.norm(), model.cost(m), u.system_condition, halvings, false}};
}

namespace detail {

// Warm-phase direction: Case I separators are minima of sum kappa for
// sub-Gaussian data and maxima for super-Gaussian data (measured Hessian
// signatures), so descend when the net excess kurtosis is negative and ascend
// otherwise.  Case II separators are always maxima of the squared excess.
inline double warm_sign(CostCase c, const Vector& kappa) {
    if (c == CostCase::case2) return -1.0;
    return (kappa.array() - 3.0).sum() <= 0.0 ? 1.0 : -1.0;
}

// Fallback when the exact solve refuses the system: at a captured
// zero-excess channel the curvature and the matching gradient slots vanish
// together (both carry a kappa_i - 3 factor), so the least-squares step over
// the directions with usable curvature is the right move and the flat
// rotations of that channel are left where they are.  The refused condition
// estimate goes into the record, so traces show where the exact solve gave way.
inline std::pair<Matrix, StepRecord> truncated_step(const Matrix& c, const SignalMatrix& x,
                                                    const SolverConfig& cfg,
                                                    double refused_condition) {
    const CostModel& model = cost_model(cfg.cost_case);
    auto [cc, y] = canonical_state(c, x, cfg.renormalize);
    const MomentSet m = estimate_moments(y);

    const Index n = m.dim();
    const Matrix p = build_P(n).matrix;
    const Matrix ip = Matrix::Identity(n * n, n * n) - p;
    const Matrix sys = ip * model.w_matrix(m) * ip + p;
    const Vector rhs = 4.0 * (ip * cs(model.stationarity(m)).data);

    Eigen::JacobiSVD<Matrix> svd(sys, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-12);
    const Vector sol = svd.solve(rhs);
    Matrix delta = cs_inv(sol);
    delta.diagonal().setZero();

    int halvings = 0;
    if (cfg.damping == Damping::halving)
        while (delta.norm() > cfg.max_step_norm) {
            delta *= 0.5;
            ++halvings;
        }

    Matrix next = matrix_exp(delta) * cc;
    return {std::move(next),
            StepRecord{delta.norm(), model.cost(m), refused_condition, halvings, false}};
}

}  // namespace detail

// Least-squares slope of log10||Delta_{t+1}|| vs log10||Delta_t|| over
// consecutive pairs inside [1e-13, 1e-2].  Estimable iff the trace has at
// least 4 steps and at least 2 qualifying pairs; warm-phase norms (~1e-1)
// fall outside the window on their own.
inline std::optional<double> convergence_order(const IterationTrace& trace) {
    constexpr double lo = 1e-13, hi = 1e-2;
    std::vector<std::pair<double, double>> pts;
    for (std::size_t t = 0; t + 1 < trace.steps.size(); ++t) {
        const double a = trace.steps[t].delta_norm;
        const double b = trace.steps[t + 1].delta_norm;
        if (a >= lo && a <= hi && b >= lo && b <= hi)
            pts.emplace_back(std::log10(a), std::log10(b));
    }
    if (trace.steps.size() < 4 || pts.size() < 2) return std::nullopt;

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [px, py] : pts) {
        sx += px;
        sy += py;
        sxx += px * px;
        sxy += px * py;
    }
    const auto k = static_cast<double>(pts.size());
    const double var = sxx - sx * sx / k;
    if (var <= 0.0) return std::nullopt;
    return (sxy - sx * sy / k) / var;
}

inline SeparationResult run(const SignalMatrix& x, const Matrix& c0, const SolverConfig& cfg) {
    if (!(cfg.tol_delta < cfg.max_step_norm))
        throw std::invalid_argument("SolverConfig: tol_delta must be < max_step_norm");
    if (c0.rows() != x.channels() || c0.rows() != c0.cols())
        throw DimensionError("run: C0 must be N x N for N channels");

    const CostModel& model = cost_model(cfg.cost_case);
    SeparationResult res;
    Matrix c = c0;
    try {
        double sgn = 0.0;
        for (int t = 0; t < cfg.warm_start.n_steps; ++t) {
            auto [cc, y] = canonical_state(c, x, cfg.renormalize);
            const MomentSet m = estimate_moments(y);
            if (sgn == 0.0) sgn = detail::warm_sign(cfg.cost_case, m.kappa);

            const Matrix q = model.stationarity(m);
            // correlation of Y; the barrier log|det| of the renormalized
            // representative has gradient -rho in these coordinates
            const Matrix raw2 = m.U0[0] * m.m2(0);  // E(Y_p Y_q)
            const Matrix rho =
                raw2.array() / (m.sigma2 * m.sigma2.transpose()).array();
            Matrix g = sgn * (-4.0 * q.transpose()) + cfg.warm_start.barrier * rho;
            g.diagonal().setZero();
            const double gnorm = g.norm();
            if (gnorm < 1e-12) break;

            const Matrix delta = (-cfg.warm_start.rate / gnorm) * g;
            c = matrix_exp(delta) * cc;
            res.trace.steps.push_back(StepRecord{delta.norm(), model.cost(m), 0.0, 0, true});
        }

        for (int t = 0; t < cfg.max_iters; ++t) {
            std::pair<Matrix, StepRecord> s;
            try {
                s = step(c, x, cfg);
            } catch (const IllConditionedError& e) {
                s = detail::truncated_step(c, x, cfg, e.condition);
            }
            c = std::move(s.first);
            res.trace.steps.push_back(s.second);
            if (s.second.delta_norm < cfg.tol_delta) {
                res.converged = true;
                break;
            }
        }
    } catch (const std::exception& e) {
        res.failure = e.what();
        res.converged = false;
    }

    res.C_final = c;
    res.Y = SignalMatrix(c * x.data);
    res.convergence_order = convergence_order(res.trace);

    if (!res.C_final.allFinite()) {
        res.failure = "final C has non-finite entries";
        res.converged = false;
    } else {
        // relative determinant guard: |det| of the row-normalized C
        Matrix cn = res.C_final;
        for (Index i = 0; i < cn.rows(); ++i) {
            const double rn = cn.row(i).norm();
            if (rn > 0.0) cn.row(i) /= rn;
        }
        if (std::abs(cn.partialPivLu().determinant()) <= 1e-30) {
            res.failure = "final C is rank-deficient";
            res.converged = false;
        }
    }
    return res;
}

// Off-diagonal Hessian of the configured cost at C, arranged per the
// vectorized model: P~ T [(I-P) W (I-P) + P] P~'.
inline Matrix hessian_at(const Matrix& c, const SignalMatrix& x, CostCase cc) {
    SignalMatrix y(c * x.data);
    const MomentSet m = estimate_moments(y);
    const Matrix w = cost_model(cc).w_matrix(m);

    const Index n = c.rows();
    const Matrix t = build_T(n).matrix;
    const Matrix p = build_P(n).matrix;
    const Matrix pt = build_P_tilde(n).matrix;
    const Matrix ip = Matrix::Identity(n * n, n * n) - p;
    return pt * (t * (ip * w * ip + p)) * pt.transpose();
}

}  // namespace cosetica

#endif
