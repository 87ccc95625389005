#include "phaseret/optics/propagate.hpp"

#include <cmath>

#include "phaseret/optics/fft.hpp"

namespace phaseret::optics {

double fft_frequency(int index, int n, double pitch) {
  int k = (index < (n + 1) / 2) ? index : index - n;
  return double(k) / (double(n) * pitch);
}

TransferFunction transfer_function(const ImagingConfig& cfg) {
  cfg.validate();
  TransferFunction tf;
  tf.values = ComplexField2D(cfg.height, cfg.width);
  const double k = cfg.wavenumber();
  const double z = cfg.distance;
  const double lam2 = cfg.wavelength * cfg.wavelength;
  for (int i = 0; i < cfg.height; ++i) {
    const double fy = fft_frequency(i, cfg.height, cfg.pixel_pitch);
    for (int j = 0; j < cfg.width; ++j) {
      const double fx = fft_frequency(j, cfg.width, cfg.pixel_pitch);
      const double r = lam2 * (fx * fx + fy * fy);
      cplx value;
      if (r <= 1.0) {
        const double phase = -k * z * std::sqrt(1.0 - r);
        value = {std::cos(phase), std::sin(phase)};
      } else {
        // decaying branch; |z| keeps it a decay for either propagation sign
        value = {std::exp(-k * std::abs(z) * std::sqrt(r - 1.0)), 0.0};
      }
      tf.values.at(i, j) = value;
    }
  }
  return tf;
}

ComplexField2D propagate(const ComplexField2D& near, const TransferFunction& tf) {
  if (!near.same_shape(tf.values))
    throw DimensionError("propagate: field/transfer-function shape mismatch");
  ComplexField2D spec = fft2(near);
  for (size_t i = 0; i < spec.v.size(); ++i) spec.v[i] *= tf.values.v[i];
  return ifft2(spec);
}

ComplexField2D propagate(const ComplexField2D& near, const ImagingConfig& cfg) {
  if (near.height != cfg.height || near.width != cfg.width)
    throw DimensionError("propagate: field does not match config grid");
  return propagate(near, transfer_function(cfg));
}

ComplexField2D propagate_adjoint(const ComplexField2D& field, const TransferFunction& tf) {
  if (!field.same_shape(tf.values))
    throw DimensionError("propagate_adjoint: shape mismatch");
  ComplexField2D spec = fft2(field);
  for (size_t i = 0; i < spec.v.size(); ++i) spec.v[i] *= std::conj(tf.values.v[i]);
  return ifft2(spec);
}

ComplexField2D phase_to_field(const Image2D& theta, const ImagingConfig& cfg) {
  if (theta.height != cfg.height || theta.width != cfg.width)
    throw DimensionError("phase_to_field: phase does not match config grid");
  require_finite(theta, "phase_to_field");
  const double amp = std::sqrt(cfg.i0);
  ComplexField2D out(theta.height, theta.width);
  for (size_t i = 0; i < theta.v.size(); ++i) {
    out.v[i] = {amp * std::cos(theta.v[i]), amp * std::sin(theta.v[i])};
  }
  return out;
}

Image2D forward_full(const Image2D& theta, const ImagingConfig& cfg) {
  return intensity(propagate(phase_to_field(theta, cfg), cfg));
}

Image2D forward_born(const Image2D& theta, const ImagingConfig& cfg) {
  if (theta.height != cfg.height || theta.width != cfg.width)
    throw DimensionError("forward_born: phase does not match config grid");
  require_finite(theta, "forward_born");
  const TransferFunction tf = transfer_function(cfg);
  ComplexField2D f(theta.height, theta.width);
  for (size_t i = 0; i < theta.v.size(); ++i) f.v[i] = {0.0, theta.v[i]};  // i*theta
  ComplexField2D g = propagate(f, tf);
  const cplx carrier = std::conj(tf.values.v[0]);  // removes exp(-i*k*z)
  Image2D out(theta.height, theta.width);
  for (size_t i = 0; i < out.v.size(); ++i) {
    out.v[i] = cfg.i0 * (1.0 + 2.0 * (carrier * g.v[i]).real());
  }
  return out;
}

}  // namespace phaseret::optics
