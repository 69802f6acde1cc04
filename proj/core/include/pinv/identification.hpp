#pragma once

#include "pinv/coefficients.hpp"
#include "pinv/geometry.hpp"
#include "pinv/inverse.hpp"

#include <array>
#include <utility>
#include <vector>

namespace pinv {

/// One experiment: the reference snapshot at theta and the time derivative of the difference there.
struct IdentificationExperiment {
    SpatialField U_theta, V_theta;
    SpatialField dUdt, dVdt;
};

/// Nodal differences of all eight coefficients; vector entries use one field per spatial axis.
struct CoefficientDifferences {
    SpatialField a, b, c, d;
    std::array<SpatialField, 2> A, B, C, D;

    static CoefficientDifferences zero(const Grid& grid);
    /// Coefficient set holding these differences as time-independent fields.
    CoefficientSet2x2 as_coefficients(const Grid& grid) const;
};

struct DeterminantResult {
    bool pass = false;
    /// Determinant of the full nodal system on the checked nodes, zero elsewhere.
    SpatialField det;
    double min_abs = 0.0;
    int failing_nodes = 0;
};

/// Nodewise determinant of the experiment matrix built from (U~, V~, grad U~, grad V~) at theta, on the complement of omega1.
/// tol_det <= 0 uses 1e-8 times the product of the row norms at each node.
DeterminantResult determinant_check(const Grid& grid, const std::vector<std::pair<SpatialField, SpatialField>>& snapshots,
                                    const SubdomainMask& omega1, double tol_det = -1.0);

struct IdentificationOptions {
    double tol_det = -1.0;
    double condition_cap = 1e12;
};

struct IdentificationResult {
    CoefficientDifferences diff;
    DeterminantResult det;
    std::vector<int> flagged_nodes;
};

/// Solve the nodal systems for all coefficient differences; zero on omega1.
/// Throws RankDeficiencyError with fewer than 2 n + 2 experiments.
IdentificationResult full_identification(const Grid& grid, const std::vector<IdentificationExperiment>& experiments,
                                         const SubdomainMask& omega1, const IdentificationOptions& options = {});

/// Time-constant reference pairs (1, 0), (0, 1) and then (x_i, 0), (0, x_i) for each axis.
std::vector<std::pair<SpatialField, SpatialField>> example_references(const Grid& grid);

/// Simulate one experiment per reference pair: sources keep (p, q) an exact discrete solution of the
/// tilde system, and the true system is tilde + diff.
std::vector<IdentificationExperiment> simulate_experiments(const Grid& grid, const CoefficientSet2x2& tilde,
                                                           const CoefficientSet2x2& diff,
                                                           const std::vector<std::pair<SpatialField, SpatialField>>& refs,
                                                           const RateOptions& rate = {});

/// Field-wise sum of two coefficient sets.
CoefficientSet2x2 add_coefficients(const CoefficientSet2x2& x, const CoefficientSet2x2& y, const Grid& grid);

}  // namespace pinv
