#pragma once

// Geometric collapse diagnostics for generated 2D samples.

#include <cstddef>
#include <span>
#include <vector>

#include "amgan/mixture.hpp"

namespace amgan {

// A sample sits in mode k when it lies within this many sigmas of center k.
inline constexpr double kModeRadiusSigmas = 3.0;
// Minimum share of the batch a mode needs to count as covered.
inline constexpr double kCoverageFraction = 0.02;

struct ModeCoverage {
  std::size_t covered = 0;
  std::vector<double> per_mode_fraction;
};

// Throws EmptyBatch.
ModeCoverage mode_coverage(std::span<const Point2> samples, const MixtureSpec& spec);

// Mean over covered modes of (per-axis RMS spread of the samples inside the
// mode) / sigma. Near 1 for a healthy mode, near 0 when a mode has collapsed
// onto a point. Zero when no mode is covered. Throws EmptyBatch.
double intra_mode_dispersion(std::span<const Point2> samples, const MixtureSpec& spec);

}  // namespace amgan
