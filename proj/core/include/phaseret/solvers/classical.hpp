#pragma once

#include "phaseret/optics/propagate.hpp"
#include "phaseret/solvers/options.hpp"

namespace phaseret::solvers {

/// Alternating projections: impose sqrt(I_meas) modulus in the detector
/// plane, back-propagate, impose sqrt(I0) modulus (and the support mask, when
/// given) in the object plane, propagate forward. The trace records the
/// intensity MSE of the current estimate before each update. `init_phase`
/// overrides the opts.init object-plane phase initialization.
RetrievalResult gerchberg_saxton(const Image2D& intensity_meas,
                                 const optics::ImagingConfig& cfg,
                                 const SolverOptions& opts,
                                 const std::optional<Image2D>& init_phase = {});

/// Gradient descent on f(psi) = sum(|H_z psi|^2 - I)^2 with the Wirtinger
/// gradient 2 * H_z^adj((|H_z psi|^2 - I) .* H_z psi). `init_field` overrides
/// the opts.init initialization when supplied.
RetrievalResult wirtinger_flow(const Image2D& intensity_meas,
                               const optics::ImagingConfig& cfg,
                               const SolverOptions& opts,
                               const std::optional<optics::ComplexField2D>& init_field = {});

/// Closed-form weak-phase inversion: solves the linearized model in frequency
/// space with Tikhonov-regularized division of the contrast-transfer filter.
/// The recovered phase is mean-free (the DC component is unobservable).
Image2D fourier_born_inverse(const Image2D& intensity_meas,
                             const optics::ImagingConfig& cfg,
                             double alpha = 1e-3);

/// Real filter g(nu) = -Im[carrier * H_z(nu)] relating fft2(theta) to the
/// Born intensity contrast. Exposed for conditioning checks.
Image2D born_transfer_filter(const optics::ImagingConfig& cfg);

}  // namespace phaseret::solvers
