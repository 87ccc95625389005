#pragma once

#include "phaseret/image.hpp"
#include "phaseret/optics/config.hpp"
#include "phaseret/optics/field.hpp"

namespace phaseret::optics {

/// Frequency-domain multipliers of the angular-spectrum propagator for one
/// geometry. Propagating components have modulus exactly 1; spatial
/// frequencies beyond the 1/lambda cutoff take the decaying evanescent branch,
/// so |value| <= 1 everywhere.
struct TransferFunction {
  ComplexField2D values;
};

/// FFT-layout spatial frequency (cycles/meter) of bin `index` on an n-sample
/// axis with the given pitch.
double fft_frequency(int index, int n, double pitch);

TransferFunction transfer_function(const ImagingConfig& cfg);

/// ifft2(H .* fft2(near)): free-space propagation over cfg.distance.
ComplexField2D propagate(const ComplexField2D& near, const ImagingConfig& cfg);
ComplexField2D propagate(const ComplexField2D& near, const TransferFunction& tf);

/// Adjoint of `propagate` (conjugated multipliers). For purely propagating
/// spectra this equals back-propagation by -z.
ComplexField2D propagate_adjoint(const ComplexField2D& field, const TransferFunction& tf);

/// sqrt(I0) * exp(i*theta) pointwise, so |field|^2 == I0.
ComplexField2D phase_to_field(const Image2D& theta, const ImagingConfig& cfg);

/// Full nonlinear measurement model: |propagate(phase_to_field(theta))|^2.
Image2D forward_full(const Image2D& theta, const ImagingConfig& cfg);

/// Weak-phase linearized model: I0 * (1 + 2*Re[c * H_z(i*theta)]), where the
/// carrier c = conj(H_z at DC) removes the global propagation phase that
/// intensity cannot observe. At z=0 this returns exactly I0 everywhere.
Image2D forward_born(const Image2D& theta, const ImagingConfig& cfg);

}  // namespace phaseret::optics
