#pragma once

#include "pinv/coefficients.hpp"
#include "pinv/geometry.hpp"

#include <array>
#include <memory>
#include <utility>
#include <vector>

namespace pinv {

using FieldSet = std::vector<SpaceTimeField>;

/// Implicit Euler solver for N coupled reaction-diffusion-convection equations with Dirichlet data.
///
/// Each step solves one sparse system over all components. Diffusion and off-diagonal gradient
/// couplings are centered; a component's own convection is centered while the cell Peclet number
/// |A| dx stays below 2 and switches to upwinding above it.
class ParabolicSolver {
public:
    ParabolicSolver(const Grid& grid, SystemOperator op);
    ~ParabolicSolver();
    ParabolicSolver(ParabolicSolver&&) noexcept;
    ParabolicSolver& operator=(ParabolicSolver&&) noexcept;

    const Grid& grid() const { return grid_; }
    const SystemOperator& op() const { return op_; }

    /// March from level k_start (holding data.initial) to the final level.
    /// Levels before k_start are left at zero.
    FieldSet solve(const ProblemData& data, int k_start = 0) const;

    /// Discrete adjoint of solve: M_k^T L^k = G^k + P L^{k+1} / dt with L^{N+1} = terminal.
    /// Level k_start of the result holds P L^{k_start+1} / dt, the sensitivity to the initial state.
    FieldSet adjoint(const std::vector<SpatialField>& terminal, const FieldSet& sources, int k_start = 0) const;

    /// Largest absolute defect of the discrete equations (interior rows and boundary rows).
    double residual(const FieldSet& state, const ProblemData& data, int k_start = 0) const;

    /// L_h applied to the state at level k (interior nodes; zero on the boundary).
    std::vector<SpatialField> apply_operator(const std::vector<SpatialField>& state, int k) const;

private:
    struct Impl;
    Grid grid_;
    SystemOperator op_;
    std::unique_ptr<Impl> impl_;
};

FieldSet solve_system(const SystemOperator& op, const ProblemData& data, const Grid& grid, int k_start = 0);

std::pair<SpaceTimeField, SpaceTimeField> solve_2x2(const CoefficientSet2x2& coeffs, const ProblemData& data,
                                                    const Grid& grid);
std::array<SpaceTimeField, 3> solve_3x3(const CoefficientSet3x3& coeffs, const ProblemData& data,
                                        const Grid& grid);

/// Backward-in-time adjoint of solve_2x2 with terminal state (p_T, q_T) and optional sources.
std::pair<SpaceTimeField, SpaceTimeField> solve_adjoint_2x2(const CoefficientSet2x2& coeffs,
                                                            const std::pair<SpatialField, SpatialField>& terminal,
                                                            const Grid& grid,
                                                            const std::pair<SpaceTimeField, SpaceTimeField>& sources = {});

/// Coefficients of the formally adjoint 2x2 system run forward in reversed time (constant coefficients).
CoefficientSet2x2 reversed_adjoint_coefficients(const CoefficientSet2x2& coeffs);

}  // namespace pinv
