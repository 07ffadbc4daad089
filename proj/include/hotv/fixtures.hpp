#pragma once

// Seeded synthetic inputs shared by the tests, the acceptance suite and the CLI.

#include <cstdint>
#include <random>
#include <vector>

#include "grid.hpp"

namespace hotv::fixtures {

inline constexpr std::uint64_t default_seed = 20240917;

/// Noise-free piecewise-affine image: two affine ramps split by the line
/// x + 2y = 1.2 (in unit coordinates), values inside [0.1, 0.9].
inline ScalarField piecewise_affine(int width = 32, int height = 32, double h = 1.0)
{
    ScalarField f(width, height, h);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const double s = (x + 0.5) / width;
            const double t = (y + 0.5) / height;
            f(x, y) = (s + 2.0 * t < 1.2) ? 0.2 + 0.3 * s + 0.1 * t : 0.8 - 0.2 * s - 0.1 * t;
        }
    return f;
}

/// piecewise_affine plus i.i.d. uniform noise on [-amplitude, amplitude].
inline ScalarField noisy_piecewise_affine(std::uint64_t seed = default_seed, int width = 32, int height = 32,
                                          double amplitude = 0.05, double h = 1.0)
{
    ScalarField f = piecewise_affine(width, height, h);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> noise(-amplitude, amplitude);
    for (double& v : f.raw())
        v += noise(rng);
    return f;
}

/// 1D ramp from 0.1 to 0.9 plus uniform noise, times `scale`, as a width x 1 field.
inline ScalarField noisy_ramp(std::uint64_t seed = default_seed, int width = 128, double amplitude = 0.05,
                              double scale = 1.0, double h = 1.0)
{
    ScalarField f(width, 1, h);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> noise(-amplitude, amplitude);
    for (int x = 0; x < width; ++x)
        f(x, 0) = scale * (0.1 + 0.8 * x / (width - 1.0) + noise(rng));
    return f;
}

// The staircase comparison needs gradients in the linear-growth range of the
// density, hence the large scale; lambda is shared by m = 1 and m = 2.
inline constexpr double staircase_scale = 300.0;
inline constexpr double staircase_lambda = 0.1;

inline ScalarField staircase_ramp(std::uint64_t seed = default_seed)
{
    return noisy_ramp(seed, 128, 0.05, staircase_scale);
}

/// Roughly `fraction` of the pixels become the hole, drawn at random.
inline Mask random_hole(Extents e, double fraction, std::uint64_t seed = default_seed)
{
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution hole(fraction);
    std::vector<bool> observed(e.count());
    for (std::size_t i = 0; i < observed.size(); ++i)
        observed[i] = !hole(rng);
    observed[0] = true;
    return Mask(e, std::move(observed));
}

/// Rectangular hole [x0, x1) x [y0, y1).
inline Mask box_hole(Extents e, int x0, int y0, int x1, int y1)
{
    std::vector<bool> observed(e.count(), true);
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x)
            observed[static_cast<std::size_t>(y * e.width + x)] = false;
    return Mask(e, std::move(observed));
}

} // namespace hotv::fixtures
