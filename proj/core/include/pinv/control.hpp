#pragma once

#include "pinv/coefficients.hpp"
#include "pinv/forward.hpp"
#include "pinv/geometry.hpp"

#include <vector>

namespace pinv {

/// Penalised least-squares control problem with the control acting on the first component over omega.
struct ControlProblem {
    Grid grid;
    ProblemData data;
    SubdomainMask omega;
    /// One field per component, to be reached at t_target.
    std::vector<SpatialField> target;
    /// Target time; values <= 0 mean the final time of the grid.
    double t_target = -1.0;
    double epsilon = 0.05;
    double beta = 1e-2;
    double beta_factor = 0.1;
    double beta_floor = 1e-8;
    int cg_max_iter = 400;
    double cg_rtol = 1e-8;
    double tol_nu = 1e-8;
};

struct ControlResult {
    /// Control over the target grid, nonzero only on interior nodes of omega at levels 1 .. k_target.
    SpaceTimeField h;
    std::vector<SpatialField> achieved;
    /// Sum over components of |X_c(t_target) - target_c|_{L2}.
    double misfit = 0.0;
    double target_norm = 0.0;
    double energy = 0.0;
    double beta = 0.0;
    bool reached = false;
    std::vector<double> beta_history;
    std::vector<double> misfit_history;
    int cg_iterations = 0;
};

/// Control-to-state machinery for an arbitrary system on the target time grid.
class ControlMap {
public:
    ControlMap(const Grid& grid, SystemOperator op, const SubdomainMask& omega);
    const Grid& grid() const { return grid_; }
    /// Final state produced by the control alone (zero initial and boundary data).
    std::vector<SpatialField> apply(const SpaceTimeField& h) const;
    /// Adjoint of apply in the weighted L2 products of state and control.
    SpaceTimeField adjoint(const std::vector<SpatialField>& y) const;
    double inner(const SpaceTimeField& h1, const SpaceTimeField& h2) const;
    double state_inner(const std::vector<SpatialField>& y1, const std::vector<SpatialField>& y2) const;
    bool active(int node) const { return mask_[static_cast<std::size_t>(node)] != 0; }

private:
    Grid grid_;
    ParabolicSolver solver_;
    std::vector<char> mask_;
    std::vector<double> ws_;
};

/// Grid for the control horizon [0, t_target]; the step size is kept.
Grid control_grid(const Grid& grid, double t_target);

/// Generic synthesis used by both system sizes.
ControlResult synthesize_control(const ControlProblem& problem, const SystemOperator& op);

/// 2x2 system of the forward model; checks |B . nu| on the part of omega touching the boundary.
ControlResult synthesize_control_2x2(const ControlProblem& problem, const CoefficientSet2x2& coeffs);

/// 3x3 system; the controlled dynamics use the transposed reaction matrix.
ControlResult synthesize_control_3x3(const ControlProblem& problem, const CoefficientSet3x3& coeffs,
                                     double tol13 = 1e-8);

struct PositivityOptions {
    double delta0 = 0.1;
    /// Control horizon as a fraction of theta.
    double t1_fraction = 0.8;
    /// Plateau height of the target and the width of its boundary roll-off.
    double level = 1.0;
    double rolloff = 0.05;
    double epsilon = 0.02;
};

struct PositivityResult {
    ControlResult control;
    SpatialField U_theta, V_theta;
    double floor = 0.0;
    bool verified = false;
    bool control_used = false;
};

/// Steer (U, V) toward a smooth positive plateau by t1 = t1_fraction * theta, let it evolve freely to theta,
/// and verify min |U|, |V| >= delta0 on the complement of omega1. No control is used if the free state already passes.
PositivityResult realize_positivity(const Grid& grid, const CoefficientSet2x2& coeffs, const ProblemData& data,
                                    const SubdomainMask& omega, const SubdomainMask& omega1,
                                    const PositivityOptions& options = {});

}  // namespace pinv
