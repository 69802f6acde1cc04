#pragma once

#include "pinv/geometry.hpp"

#include <cstdint>
#include <random>

namespace pinv {

/// Platform-independent uniform draws on top of std::mt19937_64.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Box-Muller normal draw.
    double normal();
    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

/// Sum of a few sine modes per axis with decaying random amplitudes; vanishes on the boundary.
SpatialField random_sine_field(const Grid& grid, Rng& rng, int modes, double amplitude);
/// Smooth random field that does not vanish on the boundary (cosine modes plus an offset).
SpatialField random_smooth_field(const Grid& grid, Rng& rng, int modes, double amplitude);
/// Smooth random space-time field: spatial sine modes times random time polynomials.
SpaceTimeField random_spacetime_field(const Grid& grid, Rng& rng, int modes, double amplitude);
/// Random Fourier series on a uniform time grid of n points over [0, T].
std::vector<double> random_time_series(Rng& rng, int n, double T, int modes, double amplitude);

}  // namespace pinv
