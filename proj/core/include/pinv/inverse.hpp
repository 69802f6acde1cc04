#pragma once

#include "pinv/coefficients.hpp"
#include "pinv/forward.hpp"
#include "pinv/geometry.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace pinv {

struct RateOptions {
    /// Fine steps per coarse step used right after theta; 0 picks dt_fine <= fine_factor * dx^2.
    int substeps = 0;
    double fine_factor = 0.01;
};

/// Time derivative at theta of the system started from zero at theta with the given sources.
/// The first few steps after theta are taken on a much finer time grid, so the derivative is
/// resolved even next to the boundary where the zero Dirichlet data and the sources disagree.
std::vector<SpatialField> matched_difference_rate(const Grid& grid, const SystemOperator& op, const FieldSet& sources,
                                                  const RateOptions& options = {});

/// Solve the difference system forward from theta with zero state there (levels before theta are zero).
FieldSet simulate_matched_difference(const Grid& grid, const SystemOperator& op, const FieldSet& sources);

/// Fill boundary nodes by quadratic extrapolation from the three nearest interior nodes along the normal.
void extrapolate_to_boundary(const Grid& grid, SpatialField& f);

/// f = dU/dt / V~ and g = dV/dt / U~ at theta, pointwise. Boundary values are extrapolated
/// from the interior when extrapolate_boundary is set, since the identity only holds inside.
std::pair<SpatialField, SpatialField> snapshot_reconstruct(const Grid& grid, const SpatialField& dUdt,
                                                           const SpatialField& dVdt, const SpatialField& Ut_theta,
                                                           const SpatialField& Vt_theta, double delta0,
                                                           bool extrapolate_boundary = true);

/// One-component observation: U on omega x (0, T) plus the full snapshot of (U, V) at theta.
struct Observation {
    SpaceTimeField u_on_omega;
    SpatialField snapshot_U;
    SpatialField snapshot_V;
    double noise_level = 0.0;
};

/// Forward setting for the variational inversion; b and c in `known` are ignored.
struct VariationalProblem {
    Grid grid;
    CoefficientSet2x2 known;
    ProblemData data;
    SubdomainMask omega;
    SpatialField b_prior;
    SpatialField c_prior;
};

struct VariationalOptions {
    double mu = 1e-8;
    int max_iter = 300;
    /// Stop when the gradient norm falls below grad_rtol times its initial value.
    double grad_rtol = 1e-7;
    int memory = 10;
    /// Geometric mu sweep for discrepancy selection (largest first). Empty keeps `mu`.
    std::vector<double> mu_sweep;
    double discrepancy_tau = 1.05;
};

struct ReconstructionResult {
    SpatialField b_hat, c_hat;
    SpatialField f_hat, g_hat;
    std::vector<double> misfit_history;
    double kappa_hat = 0.0;
    double mu = 0.0;
    double data_misfit = 0.0;
    int iterations = 0;
    bool converged = false;
    bool warning = false;
};

/// Tikhonov objective 1/2 |U - U_obs|^2_{omega_T} + 1/2 |(U, V)(theta) - snapshot|^2 + mu/2 |(b, c) - prior|^2.
class VariationalObjective {
public:
    VariationalObjective(const VariationalProblem& problem, const Observation& obs, double mu);
    /// Objective value; fills the adjoint gradient when the output pointers are given.
    double evaluate(const SpatialField& b, const SpatialField& c, SpatialField* grad_b = nullptr,
                    SpatialField* grad_c = nullptr) const;
    /// Data part of the objective at the last evaluation (no regularisation).
    double last_data_term() const { return last_data_; }
    double mu() const { return mu_; }

private:
    const VariationalProblem& problem_;
    const Observation& obs_;
    double mu_;
    std::vector<double> ws_, ws_omega_, wt_;
    mutable double last_data_ = 0.0;
};

/// Simulate (U, V) for the given b, c and package the observation, adding relative Gaussian noise.
Observation make_observation(const VariationalProblem& problem, const SpatialField& b, const SpatialField& c,
                             double noise_level, std::uint64_t seed);

ReconstructionResult variational_reconstruct(const VariationalProblem& problem, const Observation& obs,
                                             const VariationalOptions& options = {});

/// Coefficient pair for the stability sweep: the second system is the first with b + f and c + g.
struct StabilityPair {
    CoefficientSet2x2 tilde;
    SpatialField f, g;
};

struct StabilityRow {
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
    bool degenerate = false;
    bool excluded = false;
    std::string reason;
};

struct StabilityResult {
    std::vector<StabilityRow> rows;
    double kappa_hat = 0.0;
    std::vector<std::string> excluded;
};

struct StabilityOptions {
    double delta0 = -1.0;
    double bound_M = 1e6;
};

/// Ratio for a single pair; assumption failures come back as excluded rows with a reason.
StabilityRow stability_ratio(const Grid& grid, const ProblemData& reference, const StabilityPair& pair,
                             const SubdomainMask& omega, const StabilityOptions& options = {});

/// Ratio (|f| + |g|) / (|dt u|_{W21} + |u|_{W21}) over omega x (theta, T) for each pair, where u
/// solves the difference system with zero state at theta. reference holds the data of the tilde system.
StabilityResult stability_sweep(const Grid& grid, const ProblemData& reference, const std::vector<StabilityPair>& pairs,
                                const SubdomainMask& omega, const StabilityOptions& options = {});

}  // namespace pinv
