#pragma once

#include "pinv/coefficients.hpp"
#include "pinv/geometry.hpp"

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace pinv {

/// Carleman weight data: alpha(x) = exp(2 lambda |psi|_inf) - exp(lambda psi(x)),
/// rho(t) = 1 / ((t - delta)(T - delta - t)) and eta(x, t) = alpha(x) rho(t).
/// With delta = 0 this is the usual weight on (0, T).
struct WeightSpec {
    SpatialField psi;
    SpatialField alpha;
    double lambda = 2.0;
    double s = 1.0;
    double tau = 1.0;
    double T = 1.0;
    double delta = 0.0;
    std::vector<std::string> warnings;

    bool inside(double t) const { return t > delta && t < T - delta; }
    double rho(double t) const { return 1.0 / ((t - delta) * (T - delta - t)); }
    double eta(int node, double t) const { return alpha[static_cast<std::size_t>(node)] * rho(t); }
    /// log of exp(-2 s eta); -inf outside the open window.
    double log_weight(int node, double t) const;
    double alpha_min() const;
};

/// Polynomial bump psi peaked at the centre of omega, normalised to max 1, then alpha from psi.
WeightSpec build_weight(const Grid& grid, const SubdomainMask& omega, double lambda = 2.0);
/// Weight from a caller-supplied psi; warns about interior critical points outside omega.
WeightSpec weight_from_psi(const Grid& grid, const SpatialField& psi, const SubdomainMask& omega, double lambda);

/// Local weight of the first step: phi0 grows linearly toward gamma, phi1(t) = -(t - theta)^2.
struct LocalWeight {
    SpatialField phi0;
    double theta = 0.0;
    double s = 1.0;
    double kappa0 = 1.0;
    double phi1(double t) const { return -(t - theta) * (t - theta); }
};

/// Normal coordinate x . nu shifted so its minimum over the region is zero.
SpatialField normal_coordinate(const Grid& grid, const SubdomainMask& region, std::array<double, 2> nu);
LocalWeight build_local_weight(const Grid& grid, const SubdomainMask& omega, double s);

/// Three sides of a weighted inequality, kept in log form because the weights underflow.
struct CarlemanSides {
    double lhs = 0.0;
    double rhs_obs = 0.0;
    double rhs_src = 0.0;
    double log_lhs = -HUGE_VAL;
    double log_rhs_obs = -HUGE_VAL;
    double log_rhs_src = -HUGE_VAL;
    /// log of the left-hand-side integrand summed over each time level (weights included).
    std::vector<double> log_lhs_by_level;

    bool degenerate() const;
    double log_ratio() const;
    double ratio() const;
};

/// Accumulates exp(log terms) without overflow or underflow.
class LogSum {
public:
    void add(double log_term);
    void add(double log_weight, double value);
    double log() const;
    double value() const;

private:
    double max_ = -HUGE_VAL;
    double sum_ = 0.0;
};

struct CarlemanOptions {
    double residual_tol = 1e-8;
    double tol_nu = 1e-8;
};

/// Weighted sides of the one-observation Carleman inequality for the 2x2 system.
CarlemanSides carleman_sides_2x2(const Grid& grid, const CoefficientSet2x2& coeffs, const SpaceTimeField& u,
                                 const SpaceTimeField& v, const SpaceTimeField& f, const SpaceTimeField& g,
                                 const WeightSpec& weight, const SubdomainMask& omega,
                                 const CarlemanOptions& options = {});

/// Weighted sides for the 3x3 system observed through u alone.
CarlemanSides carleman_sides_3x3(const Grid& grid, const CoefficientSet3x3& coeffs, const SpaceTimeField& u,
                                 const SpaceTimeField& v, const SpaceTimeField& w, const SpaceTimeField& f,
                                 const SpaceTimeField& g, const SpaceTimeField& h, const WeightSpec& weight,
                                 const SubdomainMask& omega, const CarlemanOptions& options = {});

struct AuditRow {
    double s = 0.0;
    double max_ratio = 0.0;
    double log10_max_ratio = 0.0;
    int valid = 0;
    int degenerate = 0;
};

struct AuditTable {
    std::vector<AuditRow> rows;
    std::optional<std::size_t> s0_index;
    bool finite = false;
    bool nonincreasing = false;
    bool bounded = false;
    bool pass = false;
    double s0() const { return s0_index ? rows[*s0_index].s : 0.0; }
};

/// Per-s maximum ratio over instances. sides[i][j] holds instance j at s_grid[i].
/// s0 is the first s from which the ratios never increase again (at least two points must remain).
AuditTable audit_ratios(const std::vector<double>& s_grid, const std::vector<std::vector<CarlemanSides>>& sides,
                        double log10_cap = 300.0);

struct Instance2x2 {
    CoefficientSet2x2 coeffs;
    SpaceTimeField u, v, f, g;
};

AuditTable audit_carleman_2x2(const Grid& grid, const std::vector<Instance2x2>& instances, WeightSpec weight,
                              const SubdomainMask& omega, const std::vector<double>& s_grid,
                              double log10_cap = 300.0);

struct InequalitySides {
    double lhs = 0.0;
    double rhs = 0.0;
};

/// Lemma 3.1 sides on a uniform grid over [0, T] with theta = T / 2 at a node.
/// exponent_sign = -1 gives the weight exp(-2 s (t - theta)^2).
InequalitySides lemma31_check(const std::vector<double>& g, double T, double s, double kappa0 = 1.0,
                              double exponent_sign = -1.0);

struct Lemma32Result {
    double lhs = 0.0;
    double rhs = 0.0;
    double log_lhs = -HUGE_VAL;
    double log_rhs = -HUGE_VAL;
    double kappa17 = 0.0;
};

/// Lemma 3.2 sides over (delta, T - delta) with the weight shifted accordingly (weight.delta is set here).
Lemma32Result lemma32_check(const Grid& grid, const SpaceTimeField& q, WeightSpec weight, double s, double delta);

struct Lemma23Result {
    double lhs = 0.0;
    double rhs = 0.0;
    double kappa = 0.0;
};

/// s^2 int |u|^2 e^{2 s xi} against int |f|^2 e^{2 s xi} over region x (0, T), xi the normal coordinate.
Lemma23Result lemma23_weighted_estimate(const Grid& grid, const SpaceTimeField& u, const SpaceTimeField& f,
                                        const VectorCoefficient& p, const CoefficientField& q,
                                        const SubdomainMask& omega, const SubdomainMask& omega_prime, double s,
                                        double tol_nu = -1.0);

/// ||u||_{L2(omega' x (0,T))} / ||f||_{L2(omega' x (0,T))}; zero when f vanishes there.
double transport_estimate_ratio(const Grid& grid, const SpaceTimeField& u, const SpaceTimeField& f,
                                const SubdomainMask& omega_prime);

}  // namespace pinv
