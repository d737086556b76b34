#ifndef COSETICA_COST_MODEL_HPP
#define COSETICA_COST_MODEL_HPP

#include "cosetica/cost_kurtosis.hpp"
#include "cosetica/cost_squared_kurtosis.hpp"

// The pluggable contract shared by the two cases: cost value, stationarity
// matrix, W operator, closed-form step, and the quadratic model.

namespace cosetica {

enum class CostCase { case1 = 1, case2 = 2 };

class CostModel {
  public:
    virtual ~CostModel() = default;
    virtual double cost(const MomentSet& m) const = 0;
    virtual Matrix stationarity(const MomentSet& m) const = 0;  // Q resp. bold Q
    virtual VecMat gradient(const MomentSet& m) const = 0;
    virtual Matrix w_matrix(const MomentSet& m) const = 0;
    virtual UpdateStep solve(const MomentSet& m) const = 0;
    virtual double model(const Matrix& delta, const MomentSet& m) const = 0;
};

namespace detail {

class Case1Model final : public CostModel {
  public:
    double cost(const MomentSet& m) const override { return cosetica::cost(m); }
    Matrix stationarity(const MomentSet& m) const override { return case1_stats(m).Q; }
    VecMat gradient(const MomentSet& m) const override { return gradient_vec(case1_stats(m)); }
    Matrix w_matrix(const MomentSet& m) const override { return assemble_W(case1_stats(m), m); }
    UpdateStep solve(const MomentSet& m) const override { return solve_delta(case1_stats(m), m); }
    double model(const Matrix& delta, const MomentSet& m) const override {
        return quadratic_model(delta, m, case1_stats(m));
    }
};

class Case2Model final : public CostModel {
  public:
    double cost(const MomentSet& m) const override { return cost2(m); }
    Matrix stationarity(const MomentSet& m) const override { return case2_stats(m).bQ; }
    VecMat gradient(const MomentSet& m) const override { return gradient_vec2(case2_stats(m)); }
    Matrix w_matrix(const MomentSet& m) const override { return assemble_W2(case2_stats(m), m); }
    UpdateStep solve(const MomentSet& m) const override { return solve_delta2(case2_stats(m), m); }
    double model(const Matrix& delta, const MomentSet& m) const override {
        return quadratic_model2(delta, m, case2_stats(m));
    }
};

}  // namespace detail

inline const CostModel& cost_model(CostCase c) {
    static const detail::Case1Model one;
    static const detail::Case2Model two;
    return c == CostCase::case1 ? static_cast<const CostModel&>(one)
                                : static_cast<const CostModel&>(two);
}

}  // namespace cosetica

#endif
