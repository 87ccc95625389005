#pragma once

#include <cstdint>
#include <string>

#include "phaseret/image.hpp"

namespace phaseret {

/// Synthetic phase phantoms, values in [0, amplitude] radians. All
/// generators are deterministic in (shape, seed).
Image2D make_blob(int height, int width, std::uint64_t seed, double amplitude = 1.0,
                  int blobs = 3);

/// Piecewise-constant nested terraces.
Image2D make_steps(int height, int width, std::uint64_t seed, double amplitude = 1.0,
                   int levels = 4);

/// Blocky glyph mask ("PR") scaled to the grid.
Image2D make_text_mask(int height, int width, double amplitude = 1.0);

/// Natural-statistics texture (multi-octave smoothed noise plus occluding
/// shapes), values in [0.05, 0.95]. Reference corpus source for the
/// no-reference quality metrics.
Image2D make_texture(int height, int width, std::uint64_t seed);

/// Sum of 2-D cosines at the given frequency index pairs, unit peak scale.
/// Used for band-limited test phases.
Image2D make_cosine_mix(int height, int width,
                        const std::vector<std::pair<int, int>>& modes,
                        double amplitude, std::uint64_t seed);

Image2D make_phantom(const std::string& kind, int height, int width,
                     std::uint64_t seed, double amplitude);

}  // namespace phaseret
