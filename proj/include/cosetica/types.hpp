#ifndef COSETICA_TYPES_HPP
#define COSETICA_TYPES_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace cosetica {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Raised by moment estimation when a channel's second moment is (relatively) zero.
struct DegenerateChannelError : std::runtime_error {
    Index channel;
    explicit DegenerateChannelError(Index ch)
        : std::runtime_error("degenerate channel " + std::to_string(ch) +
                             ": sample second moment is zero (relative threshold 1e-30)"),
          channel(ch) {}
};

// Raised by the Newton solve when cond[(I-P)W(I-P)+P] exceeds 1e12.
struct IllConditionedError : std::runtime_error {
    double condition;
    explicit IllConditionedError(double cond)
        : std::runtime_error("Newton system ill-conditioned: condition estimate " +
                             std::to_string(cond)),
          condition(cond) {}
};

// N channels over S samples, rows = channels.  Holds X and Y = CX.
struct SignalMatrix {
    Matrix data;  // N x S

    SignalMatrix() = default;
    explicit SignalMatrix(Matrix d) : data(std::move(d)) {
        if (data.cols() < 2)
            throw DimensionError("SignalMatrix needs at least 2 samples");
    }

    Index channels() const { return data.rows(); }
    Index samples() const { return data.cols(); }
};

}  // namespace cosetica

#endif
