#ifndef COSETICA_EVALUATION_HPP
#define COSETICA_EVALUATION_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cosetica/cost_model.hpp"
#include "cosetica/matrix_exp.hpp"
#include "cosetica/moment_estimation.hpp"
#include "cosetica/rng.hpp"
#include "cosetica/types.hpp"

// Ground-truth benchmarking: synthetic mixtures, Amari-index scoring,
// finite-difference oracles for the gradient/Hessian assemblies, and exact
// moment oracles for the independence fixed point.

namespace cosetica {

enum class SourceKind { uniform, laplacian, gaussian, rademacher, two_point };

struct Distribution {
    SourceKind kind = SourceKind::uniform;
    double p = 0.5;  // two_point only
};

struct MixtureSpec {
    Index n_sources = 3;
    std::vector<Distribution> distributions;  // length n_sources
    double condition = 1.0;                   // random_condition(c); c >= 1
    std::optional<Matrix> mixing;             // explicit mixing matrix override
    Index samples = 100000;
    std::uint64_t seed = 0;
};

struct Mixture {
    SignalMatrix X;  // A * S
    Matrix A;
    SignalMatrix S;  // unit-variance independent sources
};

struct ScoreReport {
    double amari_index;
    Vector per_channel_kurtosis;
    double cost_case1;
    double cost_case2;
};

inline double draw(RngStream& rng, const Distribution& d) {
    switch (d.kind) {
        case SourceKind::uniform: return rng.uniform_sym();
        case SourceKind::laplacian: return rng.laplace();
        case SourceKind::gaussian: return rng.normal();
        case SourceKind::rademacher: return rng.rademacher();
        case SourceKind::two_point: return rng.two_point(d.p);
    }
    throw std::invalid_argument("draw: unknown distribution");
}

namespace detail {

// Orthogonal factor from a seeded Gaussian matrix, with the QR sign ambiguity
// fixed so the result is deterministic.
inline Matrix random_orthogonal(Index n, RngStream& rng) {
    Matrix g(n, n);
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < n; ++i) g(i, j) = rng.normal();
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index j = 0; j < n; ++j)
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    return q;
}

// U diag(s) V' with a geometric singular-value ladder sqrt(c) .. 1/sqrt(c):
// condition number exactly c by construction.
inline Matrix random_condition_matrix(Index n, double c, RngStream& rng) {
    const Matrix u = random_orthogonal(n, rng);
    const Matrix v = random_orthogonal(n, rng);
    Vector s(n);
    for (Index i = 0; i < n; ++i) {
        const double f = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.5;
        s(i) = std::pow(c, 0.5 - f);  // sqrt(c) down to 1/sqrt(c)
    }
    return u * s.asDiagonal() * v.transpose();
}

}  // namespace detail

inline Mixture generate_mixture(const MixtureSpec& spec) {
    if (spec.n_sources < 1) throw DimensionError("generate_mixture: n_sources must be positive");
    if (spec.condition < 1.0)
        throw std::invalid_argument("generate_mixture: condition target must be >= 1");
    std::vector<Distribution> dists = spec.distributions;
    if (dists.empty()) dists.assign(spec.n_sources, Distribution{});
    if (static_cast<Index>(dists.size()) != spec.n_sources)
        throw DimensionError("generate_mixture: distributions length != n_sources");

    Mixture mix;
    Matrix src(spec.n_sources, spec.samples);
    for (Index i = 0; i < spec.n_sources; ++i) {
        RngStream rng(spec.seed, static_cast<std::uint64_t>(i));
        for (Index t = 0; t < spec.samples; ++t) src(i, t) = draw(rng, dists[i]);
    }
    mix.S = SignalMatrix(std::move(src));

    if (spec.mixing) {
        mix.A = *spec.mixing;
        if (mix.A.rows() != spec.n_sources || mix.A.cols() != spec.n_sources)
            throw DimensionError("generate_mixture: explicit mixing has wrong shape");
    } else {
        // the construction hits the target exactly; the attempt loop only
        // guards against numerically defective draws
        bool done = false;
        for (int attempt = 0; attempt < 100 && !done; ++attempt) {
            RngStream rng(spec.seed, 1000000 + static_cast<std::uint64_t>(attempt));
            mix.A = detail::random_condition_matrix(spec.n_sources, spec.condition, rng);
            Eigen::JacobiSVD<Matrix> svd(mix.A);
            const double cond = svd.singularValues()(0) / svd.singularValues().tail(1)(0);
            done = std::isfinite(cond) && cond <= 1.05 * spec.condition;
        }
        if (!done)
            throw std::runtime_error("generate_mixture: condition target unachievable in 100 attempts");
    }
    mix.X = SignalMatrix(mix.A * mix.S.data);
    return mix;
}

inline double amari_index(const Matrix& c, const Matrix& a) {
    Matrix g = (c * a).cwiseAbs();
    const Index n = g.rows();
    if (n != g.cols() || n < 2) throw DimensionError("amari_index: C*A must be square, N >= 2");
    Vector rmax = g.rowwise().maxCoeff();
    if (rmax.minCoeff() <= 0.0) throw std::invalid_argument("amari_index: zero row in C*A");
    // quotient out the row-scaling ambiguity of C before scoring, so the
    // index is exactly invariant under C -> D.Pi.C (the plain column term is
    // not); the permutation-distance values 0 / 1 are unchanged
    for (Index i = 0; i < n; ++i) g.row(i) /= rmax(i);
    const Vector cmax = g.colwise().maxCoeff();
    if (cmax.minCoeff() <= 0.0) throw std::invalid_argument("amari_index: zero column in C*A");
    double total = 0.0;
    for (Index i = 0; i < n; ++i) total += g.row(i).sum() - 1.0;
    for (Index j = 0; j < n; ++j) total += g.col(j).sum() / cmax(j) - 1.0;
    return total / static_cast<double>(2 * n * (n - 1));
}

using CostFn = std::function<double(const Matrix&, const SignalMatrix&)>;

inline CostFn cost_function(CostCase cc) {
    return [cc](const Matrix& c, const SignalMatrix& x) {
        SignalMatrix y(c * x.data);
        return cost_model(cc).cost(estimate_moments(y));
    };
}

// Central difference of t -> costfn(e^{t E_kl} C, x) for every direction
// (k,l); the entry for Delta_{kl} is stored at slot l + N(k-1), matching the
// analytic gradient arrangement.
inline VecMat fd_gradient(const CostFn& costfn, const Matrix& c, const SignalMatrix& x, double h) {
    const Index n = c.rows();
    Vector g(n * n);
    Matrix e = Matrix::Zero(n, n);
    for (Index k = 0; k < n; ++k)
        for (Index l = 0; l < n; ++l) {
            e(k, l) = h;
            const double fp = costfn(matrix_exp(e) * c, x);
            e(k, l) = -h;
            const double fm = costfn(matrix_exp(e) * c, x);
            e(k, l) = 0.0;
            g(vec_index(l, k, n)) = (fp - fm) / (2.0 * h);
        }
    return VecMat(n, std::move(g));
}

// Mixed central second differences of (s,t) -> costfn(e^{s E_a + t E_b} C, x)
// over off-diagonal direction pairs (joint exponentiation -- the object the
// vectorized W reproduces).  Entry for (Delta_a, Delta_b) at (cs slot of a,
// cs slot of b); rows/columns of diagonal directions stay zero.
inline Matrix fd_hessian(const CostFn& costfn, const Matrix& c, const SignalMatrix& x, double h) {
    const Index n = c.rows();
    std::vector<std::pair<Index, Index>> dirs;
    for (Index k = 0; k < n; ++k)
        for (Index l = 0; l < n; ++l)
            if (k != l) dirs.emplace_back(k, l);

    const double f0 = costfn(c, x);
    Matrix hess = Matrix::Zero(n * n, n * n);
    Matrix e = Matrix::Zero(n, n);
    for (std::size_t a = 0; a < dirs.size(); ++a) {
        const Index sa = vec_index(dirs[a].first, dirs[a].second, n);
        e.setZero();
        e(dirs[a].first, dirs[a].second) = h;
        const double fp = costfn(matrix_exp(e) * c, x);
        e(dirs[a].first, dirs[a].second) = -h;
        const double fm = costfn(matrix_exp(e) * c, x);
        hess(sa, sa) = (fp - 2.0 * f0 + fm) / (h * h);

        for (std::size_t b = a + 1; b < dirs.size(); ++b) {
            const Index sb = vec_index(dirs[b].first, dirs[b].second, n);
            double acc = 0.0;
            for (const auto [wa, wb] :
                 {std::pair{1.0, 1.0}, {1.0, -1.0}, {-1.0, 1.0}, {-1.0, -1.0}}) {
                e.setZero();
                e(dirs[a].first, dirs[a].second) = wa * h;
                e(dirs[b].first, dirs[b].second) = wb * h;
                acc += wa * wb * costfn(matrix_exp(e) * c, x);
            }
            hess(sa, sb) = hess(sb, sa) = acc / (4.0 * h * h);
        }
    }
    return hess;
}

// Three-level Richardson combination of plain central differences (h, h/2,
// h/4): kills the O(h^2) and O(h^4) truncation terms while the base h stays
// large enough that float cancellation in the second differences is
// negligible.  Used where the plain order-2 oracle's noise floor would eat a
// 1e-3 relative tolerance.
inline Matrix fd_hessian_richardson(const CostFn& costfn, const Matrix& c, const SignalMatrix& x,
                                    double h) {
    const Matrix h1 = fd_hessian(costfn, c, x, h);
    const Matrix h2 = fd_hessian(costfn, c, x, h / 2.0);
    const Matrix h3 = fd_hessian(costfn, c, x, h / 4.0);
    const Matrix r1 = (4.0 * h2 - h1) / 3.0;
    const Matrix r2 = (4.0 * h3 - h2) / 3.0;
    return (16.0 * r2 - r1) / 15.0;
}

// Population moments of independent, symmetric, unit-variance channels with
// the given kurtoses: the exact fixed point (Q = 0) of both cost cases.
inline MomentSet independent_oracle_moments(const Vector& kappas) {
    const Index n = kappas.size();
    for (Index i = 0; i < n; ++i)
        if (!(kappas(i) > 0.0))
            throw std::invalid_argument("independent_oracle_moments: kappa must be positive");
    MomentSet m;
    m.m2 = Vector::Ones(n);
    m.m4 = kappas;
    m.sigma2 = Vector::Ones(n);
    m.sigma4 = kappas.array().pow(0.25);
    m.kappa = kappas;
    m.R1 = Matrix::Identity(n, n);
    m.R3 = kappas.asDiagonal();
    m.U0.assign(n, Matrix::Identity(n, n));
    m.U2.resize(n);
    for (Index i = 0; i < n; ++i) {
        m.U2[i] = Matrix::Identity(n, n);
        m.U2[i](i, i) = kappas(i);
    }
    return m;
}

inline ScoreReport score(const Matrix& c, const Matrix& a, const SignalMatrix& x) {
    SignalMatrix y(c * x.data);
    const MomentSet m = estimate_moments(y);
    return ScoreReport{amari_index(c, a), m.kappa, cost(m), cost2(m)};
}

// Full-factorial product design: channel i cycles through a 4-point symmetric
// set, S = 4^N samples, so sample cross-moments factorize exactly and the
// independence fixed point holds in-sample (up to float cancellation).
inline SignalMatrix product_design_signal(Index n) {
    if (n < 1 || n > 8) throw DimensionError("product_design_signal: need 1 <= N <= 8");
    Index s = 1;
    for (Index i = 0; i < n; ++i) s *= 4;
    Matrix data(n, s);
    for (Index i = 0; i < n; ++i) {
        const double a = 1.0 + 0.25 * static_cast<double>(i);
        const double b = 0.5 + 0.125 * static_cast<double>(i);
        const double pts[4] = {a, -a, b, -b};
        Index period = 1;
        for (Index j = 0; j < i; ++j) period *= 4;
        for (Index t = 0; t < s; ++t) data(i, t) = pts[(t / period) % 4];
    }
    return SignalMatrix(std::move(data));
}

}  // namespace cosetica

#endif
