#ifndef COSETICA_VALIDATION_HPP
#define COSETICA_VALIDATION_HPP

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "cosetica/evaluation.hpp"
#include "cosetica/newton_engine.hpp"
#include "cosetica/rng.hpp"
#include "cosetica/tensor_algebra.hpp"

// The oracle suite behind `check`: algebraic identities, FD matches for both
// cost cases, scale invariance, and the independence fixed point.  Returns
// one result per (check, dimension) pair so the CLI can print a table.

namespace cosetica {

struct CheckResult {
    std::string name;
    bool pass;
    std::string detail;
};

namespace detail {

inline Matrix random_matrix(Index n, RngStream& rng) {
    Matrix a(n, n);
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < n; ++i) a(i, j) = rng.normal();
    return a;
}

inline Matrix random_zero_diag(Index n, RngStream& rng) {
    Matrix d = random_matrix(n, rng);
    d.diagonal().setZero();
    return d / d.norm();
}

inline SignalMatrix check_data(Index n, Index s, std::uint64_t seed) {
    MixtureSpec spec;
    spec.n_sources = n;
    spec.samples = s;
    spec.seed = seed;
    spec.condition = 5.0;
    spec.distributions.resize(n);
    for (Index i = 0; i < n; ++i)
        spec.distributions[i] = {i % 2 == 0 ? SourceKind::uniform : SourceKind::laplacian, 0.5};
    return center(generate_mixture(spec).X);
}

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << v;
    return os.str();
}

}  // namespace detail

inline std::vector<CheckResult> run_validation(const std::vector<Index>& dims,
                                               bool corrupt_w = false) {
    std::vector<CheckResult> out;
    const auto add = [&](const std::string& name, bool pass, const std::string& detail) {
        out.push_back({name, pass, detail});
    };

    for (const Index n : dims) {
        RngStream rng(17, static_cast<std::uint64_t>(n));
        const Matrix t = build_T(n).matrix;
        const Matrix p = build_P(n).matrix;
        const Matrix pt = build_P_tilde(n).matrix;
        const Matrix eye = Matrix::Identity(n, n);
        const std::string dim = "[N=" + std::to_string(n) + "]";

        double worst = 0.0;
        for (int rep = 0; rep < 20; ++rep) {
            const Matrix x = detail::random_matrix(n, rng);
            worst = std::max(worst, (t * kron(eye, x) * t - kron(x, eye)).cwiseAbs().maxCoeff());
        }
        add("appendix identity T(I(x)X)T = X(x)I " + dim, worst == 0.0,
            "max dev " + detail::fmt(worst));

        worst = 0.0;
        for (int rep = 0; rep < 20; ++rep) {
            const Matrix a = detail::random_matrix(n, rng);
            worst = std::max(worst, (cs_inv(cs(a)) - a).cwiseAbs().maxCoeff());
            worst = std::max(worst, (cs_inv(t * cs(a).data) - a.transpose()).cwiseAbs().maxCoeff());
        }
        add("cs bijectivity and T cs(A) = cs(A') " + dim, worst == 0.0,
            "max dev " + detail::fmt(worst));

        const double tinv = (t * t - Matrix::Identity(n * n, n * n)).cwiseAbs().maxCoeff();
        add("T involution " + dim, tinv == 0.0, "max dev " + detail::fmt(tinv));

        const double proj =
            std::max((p * p - p).cwiseAbs().maxCoeff(),
                     (pt.transpose() * pt - (Matrix::Identity(n * n, n * n) - p))
                         .cwiseAbs()
                         .maxCoeff());
        add("projector identities " + dim, proj == 0.0, "max dev " + detail::fmt(proj));
    }

    // FD matches, scale invariance and fixed points at sampled-data scale
    for (const Index n : dims) {
        if (n < 2 || n > 6) continue;
        const std::string dim = "[N=" + std::to_string(n) + "]";
        const SignalMatrix x = detail::check_data(n, 4000, 91 + static_cast<std::uint64_t>(n));
        const Matrix c0 = Matrix::Identity(n, n);
        const MomentSet m = estimate_moments(x);

        for (const CostCase cc : {CostCase::case1, CostCase::case2}) {
            const std::string tag = cc == CostCase::case1 ? "case 1 " : "case 2 ";
            const CostModel& model = cost_model(cc);

            const VecMat ag = model.gradient(m);
            const VecMat fg = fd_gradient(cost_function(cc), c0, x, 1e-5);
            double gdev = 0.0;
            for (Index i = 0; i < n * n; ++i) {
                const double scale = std::max(std::abs(fg.data(i)), 1e-8 / 1e-4);
                gdev = std::max(gdev, std::abs(ag.data(i) - fg.data(i)) / scale);
            }
            add("gradient vs finite differences " + tag + dim, gdev < 1e-4,
                "max rel dev " + detail::fmt(gdev));

            if (n <= 4) {
                const bool inject = corrupt_w && cc == CostCase::case1;
                detail::corrupt_w_sign = inject;
                const Matrix ah = hessian_at(c0, x, cc);
                detail::corrupt_w_sign = false;
                const Matrix fh_full = fd_hessian_richardson(cost_function(cc), c0, x, 4e-3);
                const Matrix pt = build_P_tilde(n).matrix;
                const Matrix fh = pt * fh_full * pt.transpose();
                double hdev = 0.0;
                for (Index i = 0; i < fh.rows(); ++i)
                    for (Index j = 0; j < fh.cols(); ++j)
                        if (std::abs(fh(i, j)) > 1e-6)
                            hdev = std::max(hdev,
                                            std::abs(ah(i, j) - fh(i, j)) / std::abs(fh(i, j)));
                add("hessian vs finite differences " + tag + dim +
                        (inject ? " (w sign fault injected)" : ""),
                    hdev < 1e-3, "max rel dev " + detail::fmt(hdev));
            }
        }

        // scale invariance: cost exactly, Q and Delta at the canonical representative
        {
            RngStream rng(5, static_cast<std::uint64_t>(n));
            Vector scales(n);
            for (Index i = 0; i < n; ++i) scales(i) = std::exp(2.0 * (rng.uniform01() - 0.5));
            auto [c_a, y_a] = canonical_state(c0, x, true);
            auto [c_b, y_b] = canonical_state(Matrix(scales.asDiagonal() * c0), x, true);
            const MomentSet ma = estimate_moments(y_a);
            const MomentSet mb = estimate_moments(y_b);
            const double cost_dev =
                std::abs(cost(ma) - cost(mb)) / std::max(std::abs(cost(ma)), 1e-30);
            const Matrix qa = case1_stats(ma).Q;
            const Matrix qb = case1_stats(mb).Q;
            const double q_dev = (qa - qb).norm() / std::max(qa.norm(), 1e-30);
            const Matrix da = solve_delta(case1_stats(ma), ma).delta;
            const Matrix db = solve_delta(case1_stats(mb), mb).delta;
            const double d_dev = (da - db).norm() / std::max(da.norm(), 1e-30);
            const double dev = std::max({cost_dev, q_dev, d_dev});
            add("row-scale invariance at representative " + dim, dev < 1e-10,
                "max rel dev " + detail::fmt(dev));
        }

        // independence fixed point: exact oracle and in-sample product design
        {
            Vector kap(n);
            for (Index i = 0; i < n; ++i) kap(i) = 1.5 + 0.7 * static_cast<double>(i);
            const MomentSet oracle = independent_oracle_moments(kap);
            const double qn = case1_stats(oracle).Q.norm();
            const double dn = solve_delta(case1_stats(oracle), oracle).delta.norm();
            double pd = 0.0;
            if (n <= 6) {
                const SignalMatrix xi = product_design_signal(n);
                const MomentSet mi = estimate_moments(xi);
                pd = solve_delta(case1_stats(mi), mi).delta.norm();
            }
            const double dev = std::max({qn, dn, pd});
            add("independence fixed point " + dim, dev < 1e-8, "max ||.|| " + detail::fmt(dev));
        }
    }

    // quadratic model consistency and exponential sanity (dimension-independent)
    {
        const Index n = 3;
        // larger draw than the FD fixtures: the slope fit reads the genuine
        // cubic tail of the remainder, and a short draw can put an accidental
        // zero of c3 + c4 t inside the t window, denting the fit
        const SignalMatrix x = detail::check_data(n, 10000, 422);
        const MomentSet m = estimate_moments(x);
        RngStream rng(23, 0);
        const Matrix d = detail::random_zero_diag(n, rng);
        for (const CostCase cc : {CostCase::case1, CostCase::case2}) {
            const CostModel& model = cost_model(cc);
            std::vector<double> lt, lr;
            for (const double t :
                 {1e-1, std::pow(10.0, -1.5), 1e-2, std::pow(10.0, -2.5), 1e-3}) {
                const double exact = cost_function(cc)(matrix_exp(Matrix(t * d)), x);
                const double approx = model.model(Matrix(t * d), m);
                lt.push_back(std::log10(t));
                lr.push_back(std::log10(std::abs(exact - approx) + 1e-300));
            }
            double sx = 0, sy = 0, sxx = 0, sxy = 0;
            for (std::size_t i = 0; i < lt.size(); ++i) {
                sx += lt[i];
                sy += lr[i];
                sxx += lt[i] * lt[i];
                sxy += lt[i] * lr[i];
            }
            const auto k = static_cast<double>(lt.size());
            const double slope = (sxy - sx * sy / k) / (sxx - sx * sx / k);
            add(std::string("quadratic model remainder slope case ") +
                    (cc == CostCase::case1 ? "1" : "2"),
                slope >= 2.7, "slope " + detail::fmt(slope));
        }

        double worst = 0.0;
        for (int rep = 0; rep < 20; ++rep) {
            Matrix a = detail::random_matrix(4, rng);
            a /= std::max(1.0, a.norm());
            worst = std::max(
                worst,
                (matrix_exp(a) * matrix_exp(Matrix(-a)) - Matrix::Identity(4, 4)).norm());
        }
        add("matrix exponential inverse round trip", worst < 1e-12, "max dev " + detail::fmt(worst));
    }

    return out;
}

}  // namespace cosetica

#endif
