#ifndef COSETICA_MOMENT_ESTIMATION_HPP
#define COSETICA_MOMENT_ESTIMATION_HPP

#include <cmath>
#include <vector>

#include "cosetica/types.hpp"

// Sample statistics consumed by both cost models.  All expectations are plain
// 1/S means (no bias correction) so the in-sample identities R1_ii = 1 and
// R3_ii = kappa_i hold exactly.  Sums are accumulated per 4096-sample block
// and the block partials reduced pairwise: a fixed summation order, so the
// estimates are bit-reproducible regardless of any internal parallelism.

namespace cosetica {

struct MomentSet {
    Vector m2, m4;          // raw E(Y_i^2), E(Y_i^4)
    Vector sigma2, sigma4;  // |E(Y_i^2)|^(1/2), |E(Y_i^4)|^(1/4)
    Matrix R1;              // R1_pi = E(Y_i Y_p) / m2_i        (column i scaled)
    Matrix R3;              // R3_pi = E(Y_i^3 Y_p) / m2_i^2
    std::vector<Matrix> U0;  // U0^i_pq = E(Y_p Y_q) / m2_i
    std::vector<Matrix> U2;  // U2^i_pq = E(Y_i^2 Y_p Y_q) / m2_i^2
    Vector kappa;            // m4_i / m2_i^2

    Index dim() const { return m2.size(); }
};

namespace detail {

constexpr Index kMomentBlock = 4096;

template <typename T>
T pairwise_reduce(const std::vector<T>& parts, std::size_t lo, std::size_t hi) {
    if (hi - lo == 1) return parts[lo];
    const std::size_t mid = lo + (hi - lo) / 2;
    return pairwise_reduce(parts, lo, mid) + pairwise_reduce(parts, mid, hi);
}

}  // namespace detail

inline SignalMatrix center(const SignalMatrix& x) {
    Matrix out = x.data;
    out.colwise() -= out.rowwise().mean();
    return SignalMatrix(std::move(out));
}

inline MomentSet estimate_moments(const SignalMatrix& y) {
    const Index n = y.channels();
    const Index s = y.samples();
    const double inv_s = 1.0 / static_cast<double>(s);

    // blockwise raw sums: gram_pq = sum y_p y_q, cube_ip = sum y_i^3 y_p,
    // quad^i_pq = sum y_i^2 y_p y_q
    std::vector<Matrix> gram_parts, cube_parts;
    std::vector<std::vector<Matrix>> quad_parts;
    for (Index s0 = 0; s0 < s; s0 += detail::kMomentBlock) {
        const Index len = std::min(detail::kMomentBlock, s - s0);
        const Matrix yb = y.data.middleCols(s0, len);
        gram_parts.push_back(yb * yb.transpose());
        cube_parts.push_back(yb.array().cube().matrix() * yb.transpose());
        std::vector<Matrix> quad(n);
        for (Index i = 0; i < n; ++i) {
            const Eigen::ArrayXd w = yb.row(i).array().square();
            quad[i] = (yb.array().rowwise() * w.transpose()).matrix() * yb.transpose();
        }
        quad_parts.push_back(std::move(quad));
    }
    const Matrix gram = detail::pairwise_reduce(gram_parts, 0, gram_parts.size());
    const Matrix cube = detail::pairwise_reduce(cube_parts, 0, cube_parts.size());
    std::vector<Matrix> quad(n);
    for (Index i = 0; i < n; ++i) {
        std::vector<Matrix> parts;
        parts.reserve(quad_parts.size());
        for (const auto& q : quad_parts) parts.push_back(q[i]);
        quad[i] = detail::pairwise_reduce(parts, 0, parts.size());
    }

    MomentSet m;
    m.m2 = gram.diagonal() * inv_s;
    const double max_m2 = m.m2.maxCoeff();
    for (Index i = 0; i < n; ++i)
        if (m.m2(i) <= 1e-30 * max_m2) throw DegenerateChannelError(i);

    m.m4 = cube.diagonal() * inv_s;
    m.sigma2 = m.m2.cwiseAbs().cwiseSqrt();
    m.sigma4 = m.m4.cwiseAbs().unaryExpr([](double v) { return std::pow(v, 0.25); });
    m.kappa = Vector(n);
    for (Index i = 0; i < n; ++i) m.kappa(i) = m.m4(i) / (m.m2(i) * m.m2(i));

    m.R1 = Matrix(n, n);
    m.R3 = Matrix(n, n);
    for (Index i = 0; i < n; ++i) {
        m.R1.col(i) = gram.col(i) * (inv_s / m.m2(i));
        m.R3.col(i) = cube.row(i).transpose() * (inv_s / (m.m2(i) * m.m2(i)));
    }

    m.U0.resize(n);
    m.U2.resize(n);
    const Matrix gram_sym = 0.5 * (gram + gram.transpose());
    for (Index i = 0; i < n; ++i) {
        m.U0[i] = gram_sym * (inv_s / m.m2(i));
        const Matrix q_sym = 0.5 * (quad[i] + quad[i].transpose());
        m.U2[i] = q_sym * (inv_s / (m.m2(i) * m.m2(i)));
    }
    return m;
}

inline Vector kurtosis_vector(const MomentSet& m, bool excess = false) {
    return excess ? Vector(m.kappa.array() - 3.0) : m.kappa;
}

}  // namespace cosetica

#endif
