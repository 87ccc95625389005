#pragma once

#include "phaseret/optics/field.hpp"

namespace phaseret::optics {

// Unnormalized forward 2-D DFT. Any extents are supported: power-of-two sizes
// run an iterative radix-2 transform, everything else goes through Bluestein's
// chirp-z reduction (so the 440 = 2^3 * 5 * 11 grids of interest are exact
// O(N log N) transforms, not naive sums).
ComplexField2D fft2(const ComplexField2D& field);

// Inverse with 1/(H*W) normalization; ifft2(fft2(x)) == x to machine accuracy.
ComplexField2D ifft2(const ComplexField2D& field);

// 1-D helpers used by the 2-D driver and the benchmarks. `data` holds n
// contiguous values; inverse applies the 1/n factor.
void fft_1d(cplx* data, int n);
void ifft_1d(cplx* data, int n);

}  // namespace phaseret::optics
