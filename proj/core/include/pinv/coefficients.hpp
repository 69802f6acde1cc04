#pragma once

#include "pinv/geometry.hpp"

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace pinv {

/// Scalar coefficient on the domain, either time-independent (one level) or one value per time level.
/// A default-constructed field is identically zero.
class CoefficientField {
public:
    CoefficientField() = default;
    static CoefficientField constant(const Grid& grid, double value);
    static CoefficientField spatial(SpatialField values);
    static CoefficientField spacetime(const SpaceTimeField& values);
    static CoefficientField from_function(const Grid& grid, const std::function<double(double, double)>& fn);
    static CoefficientField from_function_t(const Grid& grid,
                                            const std::function<double(double, double, double)>& fn);

    bool is_zero() const { return values_.empty(); }
    bool time_dependent() const { return levels_ > 1; }
    int levels() const { return levels_; }
    int nodes() const { return nodes_; }

    double at(int k, int node) const {
        if (values_.empty()) return 0.0;
        int kk = levels_ > 1 ? k : 0;
        return values_[static_cast<std::size_t>(kk) * nodes_ + node];
    }
    SpatialField level(int k) const;
    /// Expand to a full space-time field on the grid.
    SpaceTimeField expand(const Grid& grid) const;
    double sup_norm() const;
    bool all_finite() const;
    bool matches(const Grid& grid) const;

    CoefficientField scaled(double c) const;
    CoefficientField plus(const CoefficientField& other, const Grid& grid) const;

private:
    int nodes_ = 0;
    int levels_ = 0;
    std::vector<double> values_;
};

/// Vector-valued coefficient, one scalar component per spatial axis. Empty means zero.
struct VectorCoefficient {
    std::array<CoefficientField, 2> comp;

    bool is_zero() const { return comp[0].is_zero() && comp[1].is_zero(); }
    bool time_dependent() const { return comp[0].time_dependent() || comp[1].time_dependent(); }
    double sup_norm() const;
    VectorCoefficient scaled(double c) const { return {{comp[0].scaled(c), comp[1].scaled(c)}}; }
    static VectorCoefficient uniform(const Grid& grid, std::array<double, 2> value);
};

/// Reaction scalars and convection fields of the 2x2 system
///   dU/dt = Lap U + a U + b V + A.grad U + B.grad V + f
///   dV/dt = Lap V + c U + d V + C.grad U + D.grad V + g.
struct CoefficientSet2x2 {
    CoefficientField a, b, c, d;
    VectorCoefficient A, B, C, D;

    bool time_dependent() const;
    double sup_norm() const;
    /// Throws ConfigError if any coefficient exceeds the bound M or is not finite.
    void check_bound(double M) const;
    void check_grid(const Grid& grid) const;
};

/// Reaction matrix a_ij of the 3x3 system; time-dependent entries allowed.
struct CoefficientSet3x3 {
    std::array<std::array<CoefficientField, 3>, 3> a;

    bool time_dependent() const;
    double sup_norm() const;
    void check_grid(const Grid& grid) const;
    CoefficientSet3x3 transposed() const;
};

/// Sources, Dirichlet data and initial states, one entry per component.
/// Empty sources or boundary fields mean zero.
struct ProblemData {
    std::vector<SpaceTimeField> sources;
    std::vector<SpaceTimeField> boundary;
    std::vector<SpatialField> initial;

    static ProblemData zero(const Grid& grid, int components);
    /// Warnings about boundary data that disagrees with the initial state at t = 0.
    std::vector<std::string> compatibility_warnings(const Grid& grid, double tol = 1e-8) const;
};

/// Generic linear operator for an N-component system:
///   L(X)_c = Lap X_c + sum_e reaction[c][e] X_e + sum_e convection[c][e] . grad X_e.
struct SystemOperator {
    int ncomp = 0;
    std::vector<std::vector<CoefficientField>> reaction;
    std::vector<std::vector<VectorCoefficient>> convection;

    explicit SystemOperator(int n = 0);
    static SystemOperator from(const CoefficientSet2x2& c);
    static SystemOperator from(const CoefficientSet3x3& c);
    bool time_dependent() const;
};

}  // namespace pinv
