#ifndef COSETICA_MATRIX_EXP_HPP
#define COSETICA_MATRIX_EXP_HPP

#include <cmath>

#include "cosetica/types.hpp"

namespace cosetica {

// e^A by scaling-and-squaring with the fixed-order (13,13) Pade approximant.
// Relative accuracy ~1e-15 .. 1e-13 for the step matrices this solver
// produces (||Delta|| <= 1), so exponential error never pollutes the
// quadratic-convergence measurements.
inline Matrix matrix_exp(const Matrix& a) {
    if (a.rows() != a.cols()) throw DimensionError("matrix_exp: matrix is not square");
    if (!a.allFinite()) throw std::invalid_argument("matrix_exp: non-finite input");

    static constexpr double theta13 = 5.371920351148152;
    static constexpr double b[14] = {64764752532480000.0,
                                     32382376266240000.0,
                                     7771770303897600.0,
                                     1187353796428800.0,
                                     129060195264000.0,
                                     10559470521600.0,
                                     670442572800.0,
                                     33522128640.0,
                                     1323241920.0,
                                     40840800.0,
                                     960960.0,
                                     16380.0,
                                     182.0,
                                     1.0};

    const Index n = a.rows();
    const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
    if (norm1 == 0.0) return Matrix::Identity(n, n);
    int squarings = 0;
    Matrix as = a;
    if (norm1 > theta13) {
        squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
        as /= std::ldexp(1.0, squarings);
    }

    const Matrix eye = Matrix::Identity(n, n);
    const Matrix a2 = as * as;
    const Matrix a4 = a2 * a2;
    const Matrix a6 = a2 * a4;
    const Matrix u =
        as * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 +
              b[1] * eye);
    const Matrix v =
        a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * eye;

    Matrix f = Matrix(v - u).partialPivLu().solve(v + u);
    for (int i = 0; i < squarings; ++i) f = f * f;
    return f;
}

}  // namespace cosetica

#endif
