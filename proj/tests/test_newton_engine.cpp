#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <array>
#include <cmath>

#include "cosetica/evaluation.hpp"
#include "cosetica/matrix_exp.hpp"
#include "cosetica/newton_engine.hpp"
#include "cosetica/rng.hpp"

using namespace cosetica;

namespace {

SignalMatrix mixed_signal(Index n, Index s, std::uint64_t seed, Matrix* a_out = nullptr) {
    Matrix src(n, s);
    for (Index i = 0; i < n; ++i) {
        RngStream rng(seed, static_cast<std::uint64_t>(i));
        for (Index t = 0; t < s; ++t)
            src(i, t) = (i % 2 == 0) ? rng.uniform_sym() : rng.laplace();
    }
    RngStream mix_rng(seed, 999);
    Matrix a(n, n);
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < n; ++i) a(i, j) = mix_rng.normal() + (i == j ? 2.0 : 0.0);
    if (a_out) *a_out = a;
    return SignalMatrix{a * src};
}

IterationTrace trace_of(const std::vector<double>& norms) {
    IterationTrace tr;
    for (const double v : norms) tr.steps.push_back(StepRecord{v, 0.0, 0.0, 0, false});
    return tr;
}

}  // namespace

TEST_CASE("matrix_exp basics", "[expm]") {
    REQUIRE(matrix_exp(Matrix::Zero(3, 3)) == Matrix::Identity(3, 3));

    // nilpotent: e^D = I + D up to ulp-level solve noise
    Matrix d = Matrix::Zero(2, 2);
    d(0, 1) = 0.7;
    REQUIRE((matrix_exp(d) - (Matrix::Identity(2, 2) + d)).cwiseAbs().maxCoeff() < 1e-14);

    // rotation generator
    const double t = 0.9;
    Matrix r(2, 2);
    r << 0, t, -t, 0;
    const Matrix e = matrix_exp(r);
    REQUIRE(std::abs(e(0, 0) - std::cos(t)) < 1e-15);
    REQUIRE(std::abs(e(0, 1) - std::sin(t)) < 1e-15);
    REQUIRE(std::abs(e(1, 0) + std::sin(t)) < 1e-15);
    REQUIRE(std::abs(e(1, 1) - std::cos(t)) < 1e-15);
}

TEST_CASE("matrix_exp round trip", "[expm]") {
    RngStream rng(21);
    for (int rep = 0; rep < 20; ++rep) {
        Matrix a(4, 4);
        for (Index j = 0; j < 4; ++j)
            for (Index i = 0; i < 4; ++i) a(i, j) = rng.normal();
        a /= std::max(1.0, a.norm());
        const Matrix prod = matrix_exp(a) * matrix_exp(Matrix(-a));
        REQUIRE((prod - Matrix::Identity(4, 4)).norm() < 1e-12);
    }
}

TEST_CASE("matrix_exp accuracy against spectral form", "[expm]") {
    RngStream rng(23);
    for (const double scale : {0.3, 3.0, 40.0}) {
        Matrix a(5, 5);
        for (Index j = 0; j < 5; ++j)
            for (Index i = 0; i < 5; ++i) a(i, j) = rng.normal();
        a = 0.5 * (a + a.transpose()).eval();
        a *= scale / a.norm();
        Eigen::SelfAdjointEigenSolver<Matrix> es(a);
        const Matrix expect = es.eigenvectors() *
                              es.eigenvalues().array().exp().matrix().asDiagonal() *
                              es.eigenvectors().transpose();
        REQUIRE((matrix_exp(a) - expect).norm() < 1e-13 * expect.norm());
    }
}

TEST_CASE("matrix_exp input validation", "[expm]") {
    REQUIRE_THROWS_AS(matrix_exp(Matrix::Zero(2, 3)), DimensionError);
    Matrix bad = Matrix::Zero(2, 2);
    bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
    REQUIRE_THROWS_AS(matrix_exp(bad), std::invalid_argument);
    bad(0, 0) = std::numeric_limits<double>::infinity();
    REQUIRE_THROWS_AS(matrix_exp(bad), std::invalid_argument);
}

TEST_CASE("canonical_state rescales rows to unit second moment", "[engine]") {
    const SignalMatrix x = mixed_signal(3, 4000, 31);
    Matrix c = Matrix::Identity(3, 3);
    c(0, 0) = 5.0;
    c(2, 2) = 0.01;
    const auto [cc, y] = canonical_state(c, x);
    const Vector m2 = y.data.array().square().rowwise().mean();
    REQUIRE((m2.array() - 1.0).abs().maxCoeff() < 1e-12);
    REQUIRE((cc * x.data - y.data).cwiseAbs().maxCoeff() < 1e-12);

    // without renormalization the state passes through untouched
    const auto [c2, y2] = canonical_state(c, x, false);
    REQUIRE(c2 == c);
    REQUIRE(y2.data == (c * x.data).eval());
}

TEST_CASE("step at an oracle fixed point", "[engine]") {
    // product-design data: sample moments factorize exactly, so C = I is a
    // fixed point up to float noise
    const SignalMatrix x = product_design_signal(3);
    SolverConfig cfg;
    cfg.renormalize = false;
    const auto [next, rec] = step(Matrix::Identity(3, 3), x, cfg);
    REQUIRE(rec.delta_norm < 1e-12);
    REQUIRE((next - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
    REQUIRE(rec.damping_halvings == 0);
    REQUIRE_FALSE(rec.warm);
}

TEST_CASE("halving damping caps the step and preserves direction", "[engine]") {
    const SignalMatrix x = mixed_signal(3, 20000, 37);
    SolverConfig cfg;
    cfg.max_step_norm = 0.01;  // small cap to force halvings

    const auto [cc, y] = canonical_state(Matrix::Identity(3, 3), x);
    const MomentSet m = estimate_moments(y);
    const UpdateStep raw = solve_delta(case1_stats(m), m);
    REQUIRE(raw.delta.norm() > cfg.max_step_norm);  // cap actually binds

    const auto [next, rec] = step(Matrix::Identity(3, 3), x, cfg);
    REQUIRE(rec.damping_halvings > 0);
    REQUIRE(rec.delta_norm <= cfg.max_step_norm);
    // the applied delta is the solved delta halved damping_halvings times
    const double expect = raw.delta.norm() * std::pow(0.5, rec.damping_halvings);
    REQUIRE(std::abs(rec.delta_norm - expect) < 1e-12 * expect);

    // with damping off the full step is applied
    cfg.damping = Damping::none;
    const auto [next2, rec2] = step(Matrix::Identity(3, 3), x, cfg);
    REQUIRE(rec2.damping_halvings == 0);
    REQUIRE(std::abs(rec2.delta_norm - raw.delta.norm()) < 1e-12 * raw.delta.norm());
}

TEST_CASE("steps contract near the solution", "[engine]") {
    const SignalMatrix x = product_design_signal(3);
    RngStream rng(41);
    Matrix b(3, 3);
    for (Index j = 0; j < 3; ++j)
        for (Index i = 0; i < 3; ++i) b(i, j) = (i == j) ? 0.0 : rng.normal();
    b /= b.norm();
    const Matrix c_star = Matrix::Identity(3, 3);
    Matrix c = matrix_exp(Matrix(1e-3 * b)) * c_star;

    SolverConfig cfg;
    const auto [c1, rec1] = step(c, x, cfg);
    const auto [c2, rec2] = step(c1, x, cfg);
    REQUIRE(rec2.delta_norm < rec1.delta_norm);
    REQUIRE(rec2.delta_norm < 0.1 * rec1.delta_norm);  // quadratic contraction
}

TEST_CASE("run on already-independent data converges at the first step", "[engine]") {
    const SignalMatrix x = product_design_signal(3);
    SolverConfig cfg;
    const SeparationResult res = run(x, Matrix::Identity(3, 3), cfg);
    REQUIRE(res.converged);
    REQUIRE(res.trace.steps.size() == 1);
    REQUIRE(res.trace.steps[0].delta_norm < cfg.tol_delta);
    REQUIRE_FALSE(res.failure.has_value());
}

TEST_CASE("run with max_iters 0 returns C0 unchanged", "[engine]") {
    const SignalMatrix x = mixed_signal(2, 500, 43);
    Matrix c0(2, 2);
    c0 << 1.25, -0.5, 0.75, 2.0;
    SolverConfig cfg;
    cfg.max_iters = 0;
    const SeparationResult res = run(x, c0, cfg);
    REQUIRE_FALSE(res.converged);
    REQUIRE(res.C_final == c0);  // bit-exact
    REQUIRE(res.trace.steps.empty());
    REQUIRE_FALSE(res.convergence_order.has_value());
}

TEST_CASE("run separates a small mixture", "[engine]") {
    // all sub-Gaussian sources: the Case I separator is then a proper
    // extremum, so the warm phase has a consistent direction
    const Index n = 3, s = 20000;
    Matrix src(n, s);
    for (Index i = 0; i < n; ++i) {
        RngStream rng(47, static_cast<std::uint64_t>(i));
        for (Index t = 0; t < s; ++t) src(i, t) = rng.uniform_sym();
    }
    RngStream mix_rng(47, 999);
    Matrix a(n, n);
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < n; ++i) a(i, j) = mix_rng.normal() + (i == j ? 2.0 : 0.0);
    const SignalMatrix x{a * src};
    SolverConfig cfg;
    cfg.warm_start.n_steps = 250;
    cfg.max_iters = 50;
    const SeparationResult res = run(x, Matrix::Identity(3, 3), cfg);
    REQUIRE(res.converged);
    REQUIRE(res.trace.newton_steps() <= 50);
    REQUIRE(res.trace.warm_steps() <= 250);
    REQUIRE(amari_index(res.C_final, a) < 0.1);

    // det sign is conserved from C0 = I
    REQUIRE(res.C_final.determinant() > 0.0);
}

TEST_CASE("exact solve refuses a captured zero-excess channel", "[engine]") {
    // kappa = 3 zeroes that channel's column of bold Q and its curvature:
    // the exact Newton system is singular there, by construction
    Vector kap(3);
    kap << 1.8, 6.0, 3.0;
    const MomentSet m = independent_oracle_moments(kap);
    REQUIRE_THROWS_AS(solve_delta2(case2_stats(m), m), IllConditionedError);
}

TEST_CASE("run converges through a captured Gaussian channel", "[engine]") {
    // two uniform + one Gaussian source: case 2 walks onto the captured
    // point where the Gaussian row's curvature collapses, the exact solve
    // refuses, and the truncated fallback carries the run to tolerance
    MixtureSpec spec;
    spec.n_sources = 3;
    spec.samples = 20000;
    spec.seed = 1;
    spec.condition = 5.0;
    spec.distributions = {{SourceKind::uniform, 0.5},
                          {SourceKind::uniform, 0.5},
                          {SourceKind::gaussian, 0.5}};
    const Mixture mix = generate_mixture(spec);
    const SignalMatrix x = center(mix.X);

    SolverConfig cfg;
    cfg.cost_case = CostCase::case2;
    cfg.warm_start.n_steps = 250;
    cfg.max_iters = 50;
    const SeparationResult res = run(x, Matrix::Identity(3, 3), cfg);
    REQUIRE(res.converged);
    REQUIRE_FALSE(res.failure.has_value());

    // the refused condition estimate is kept in the trace
    double max_cond = 0.0;
    for (const auto& st : res.trace.steps)
        if (!st.warm) max_cond = std::max(max_cond, st.system_condition);
    CHECK(max_cond > 1e12);

    // the two sub-Gaussian rows still pick out their sources
    const MomentSet my = estimate_moments(res.Y);
    std::array<Index, 3> rows{0, 1, 2};
    std::sort(rows.begin(), rows.end(), [&](Index p, Index q) {
        return std::abs(my.kappa(p) - 3.0) > std::abs(my.kappa(q) - 3.0);
    });
    const Matrix g = res.C_final * mix.A;
    Matrix sub(2, 2);
    sub << g(rows[0], 0), g(rows[0], 1), g(rows[1], 0), g(rows[1], 1);
    CHECK(amari_index(sub, Matrix::Identity(2, 2)) < 0.1);
}

TEST_CASE("cost trajectory is left-invariant", "[engine]") {
    const SignalMatrix x = mixed_signal(3, 8000, 53);
    RngStream rng(11);
    Matrix mm(3, 3);
    for (Index j = 0; j < 3; ++j)
        for (Index i = 0; i < 3; ++i) mm(i, j) = rng.normal() + (i == j ? 1.5 : 0.0);
    const Matrix c0 = Matrix::Identity(3, 3);

    SolverConfig cfg;
    cfg.max_iters = 6;
    cfg.tol_delta = 1e-15;  // keep both runs going the full 6 steps
    const SeparationResult r1 = run(x, c0, cfg);
    const SignalMatrix x2{mm.inverse() * x.data};
    const SeparationResult r2 = run(x2, c0 * mm, cfg);

    REQUIRE(r1.trace.steps.size() == r2.trace.steps.size());
    for (std::size_t t = 0; t < r1.trace.steps.size(); ++t) {
        const double f1 = r1.trace.steps[t].cost;
        const double f2 = r2.trace.steps[t].cost;
        REQUIRE(std::abs(f1 - f2) < 1e-9 * std::abs(f1));
    }
}

TEST_CASE("row rescaling of C leaves the update invariant", "[engine]") {
    const SignalMatrix x = mixed_signal(3, 10000, 59);
    Matrix c0(3, 3);
    RngStream rng(13);
    for (Index j = 0; j < 3; ++j)
        for (Index i = 0; i < 3; ++i) c0(i, j) = rng.normal() + (i == j ? 2.0 : 0.0);
    Vector scales(3);
    scales << 3.0, 0.2, 11.0;

    SolverConfig cfg;
    const auto [n1, rec1] = step(c0, x, cfg);
    const auto [n2, rec2] = step(Matrix(scales.asDiagonal() * c0), x, cfg);
    REQUIRE(std::abs(rec1.delta_norm - rec2.delta_norm) < 1e-10 * rec1.delta_norm);
    REQUIRE((n1 - n2).cwiseAbs().maxCoeff() < 1e-10 * n1.cwiseAbs().maxCoeff());
}

TEST_CASE("run reports failure on degenerate data", "[engine]") {
    Matrix bad = Matrix::Zero(3, 1000);
    RngStream rng(17);
    for (Index t = 0; t < 1000; ++t) {
        bad(0, t) = rng.normal();
        bad(1, t) = rng.uniform_sym();
        // row 2 stays zero
    }
    const SeparationResult res = run(SignalMatrix{bad}, Matrix::Identity(3, 3), SolverConfig{});
    REQUIRE_FALSE(res.converged);
    REQUIRE(res.failure.has_value());
    REQUIRE(res.failure->find("channel") != std::string::npos);
}

TEST_CASE("run validates its configuration", "[engine]") {
    const SignalMatrix x = mixed_signal(2, 500, 61);
    SolverConfig cfg;
    cfg.tol_delta = 2.0;  // >= max_step_norm
    REQUIRE_THROWS_AS(run(x, Matrix::Identity(2, 2), cfg), std::invalid_argument);
    REQUIRE_THROWS_AS(run(x, Matrix::Identity(3, 3), SolverConfig{}), DimensionError);
}

TEST_CASE("hessian_at shape and well-posedness", "[engine]") {
    const SignalMatrix x2 = product_design_signal(2);
    const Matrix h2 = hessian_at(Matrix::Identity(2, 2), x2, CostCase::case1);
    REQUIRE(h2.rows() == 2);
    REQUIRE(h2.cols() == 2);

    const SignalMatrix x3 = product_design_signal(3);
    for (const CostCase cc : {CostCase::case1, CostCase::case2}) {
        const Matrix h = hessian_at(Matrix::Identity(3, 3), x3, cc);
        REQUIRE(h.rows() == 6);
        REQUIRE(h.fullPivLu().isInvertible());
    }
}

TEST_CASE("convergence_order on synthetic sequences", "[engine]") {
    // exactly quadratic: norms 10^{-2^t}
    const auto quad = trace_of({1e-1, 1e-2, 1e-4, 1e-8, 1e-16});
    const auto s2 = convergence_order(quad);
    REQUIRE(s2.has_value());
    REQUIRE(std::abs(*s2 - 2.0) < 1e-12);

    // exactly linear: norms 2^{-t} * 1e-3
    std::vector<double> lin;
    for (int t = 0; t < 11; ++t) lin.push_back(std::pow(2.0, -t) * 1e-3);
    const auto s1 = convergence_order(trace_of(lin));
    REQUIRE(s1.has_value());
    REQUIRE(std::abs(*s1 - 1.0) < 1e-12);
}

TEST_CASE("convergence_order is honest about non-estimable traces", "[engine]") {
    // too few steps
    REQUIRE_FALSE(convergence_order(trace_of({1e-3, 1e-6, 1e-12})).has_value());
    // all norms outside the window
    REQUIRE_FALSE(convergence_order(trace_of({0.5, 0.4, 0.3, 0.2, 0.1})).has_value());
    // only one qualifying pair
    REQUIRE_FALSE(convergence_order(trace_of({0.5, 0.5, 1e-3, 1e-6, 1e-14})).has_value());
    // zero variance in the regressor
    REQUIRE_FALSE(convergence_order(trace_of({1e-5, 1e-5, 1e-5, 1e-5, 1e-5})).has_value());
    // empty
    REQUIRE_FALSE(convergence_order(IterationTrace{}).has_value());
}
