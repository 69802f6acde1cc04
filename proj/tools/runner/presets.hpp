#pragma once

#include "config.hpp"

#include "pinv/carleman.hpp"
#include "pinv/inverse.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace pinv::cli {

/// Independent seed for item `index` of a named stream.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

/// Initial and (time-constant) boundary data read from view.initial / view.boundary for the named components.
ProblemData problem_data(const Grid& grid, const ConfigView& view, const std::vector<std::string>& components);

/// Exact solution sin(m pi x) exp(-(m pi)^2 t) of the decoupled heat preset on [0, 1].
SpaceTimeField heat_solution(const Grid& grid, int mode);

/// Random 2x2 system with sources, solved so that (u, v) is a discrete solution.
Instance2x2 random_instance_2x2(const Grid& grid, std::uint64_t seed, double range);

struct Instance3x3 {
    CoefficientSet3x3 coeffs;
    SpaceTimeField u, v, w, f, g, h;
};
Instance3x3 random_instance_3x3(const Grid& grid, std::uint64_t seed, double range);

/// Smooth perturbation pair (f, g) = epsilon * (cosine series), the same function on every grid for a given seed.
StabilityPair random_stability_pair(const Grid& grid, const CoefficientSet2x2& tilde, std::uint64_t seed, int modes,
                                    double epsilon);

/// Smooth right-hand side for the transport audit, defined as a function so it refines consistently.
SpaceTimeField random_transport_rhs(const Grid& grid, std::uint64_t seed);

}  // namespace pinv::cli
