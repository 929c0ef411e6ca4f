#pragma once

#include <cstdint>
#include <vector>

#include "twistprod/geometry.hpp"

namespace twistprod {

inline constexpr std::size_t kDefaultSamples = 50;
inline constexpr std::uint64_t kDefaultSeed = 42;

/// Uniform points strictly inside the chart box. The stream is a
/// std::mt19937_64 seeded with seed, mapped to (0, 1) by hand, so a seed
/// reproduces the same points on every platform.
std::vector<std::vector<double>> sample_points(const ChartDomain& chart, std::size_t count,
                                               std::uint64_t seed);

/// Tensor grid with `per_axis` interior points per coordinate, used to probe
/// positivity of twisting functions.
std::vector<std::vector<double>> probe_grid(const ChartDomain& chart, std::size_t per_axis);

}  // namespace twistprod
