#include "phaseret/solvers/classical.hpp"

#include <cmath>

#include "phaseret/optics/fft.hpp"
#include "phaseret/rng.hpp"

namespace phaseret::solvers {

using optics::ComplexField2D;
using optics::cplx;

const char* to_string(TerminationReason r) {
  switch (r) {
    case TerminationReason::tolerance: return "tolerance";
    case TerminationReason::max_iters: return "max_iters";
    case TerminationReason::divergence: return "divergence";
  }
  return "unknown";
}

namespace {

void check_measurement(const Image2D& I, const optics::ImagingConfig& cfg) {
  if (I.height != cfg.height || I.width != cfg.width)
    throw DimensionError("solver: measurement does not match config grid");
  require_finite(I, "solver measurement");
  for (double x : I.v)
    if (x < 0.0) throw ConfigError("solver: negative intensity in measurement");
}

double intensity_mse(const ComplexField2D& far, const Image2D& I) {
  double acc = 0.0;
  for (size_t i = 0; i < I.v.size(); ++i) {
    const cplx z = far.v[i];
    const double d = (z.real() * z.real() + z.imag() * z.imag()) - I.v[i];
    acc += d * d;
  }
  return acc / double(I.v.size());
}

bool rel_change_stop(double prev, double cur, double base, double tol) {
  if (tol <= 0.0) return false;
  if (base <= 0.0) return true;  // already exact at start
  return std::abs(cur - prev) / base < tol;
}

}  // namespace

RetrievalResult gerchberg_saxton(const Image2D& intensity_meas,
                                 const optics::ImagingConfig& cfg,
                                 const SolverOptions& opts,
                                 const std::optional<Image2D>& init_phase) {
  cfg.validate();
  opts.validate();
  check_measurement(intensity_meas, cfg);
  if (opts.support_mask && !opts.support_mask->same_shape(intensity_meas))
    throw DimensionError("gerchberg_saxton: support mask shape mismatch");
  if (init_phase && !init_phase->same_shape(intensity_meas))
    throw DimensionError("gerchberg_saxton: init phase shape mismatch");

  const int h = cfg.height, w = cfg.width;
  const double amp0 = std::sqrt(cfg.i0);
  const optics::TransferFunction tf = transfer_function(cfg);

  auto on_support = [&](size_t i) {
    return !opts.support_mask || opts.support_mask->v[i] != 0.0;
  };

  // object-plane init: sqrt(I0) with zero (or seeded random) phase on support
  ComplexField2D obj(h, w);
  Rng rng(opts.seed);
  for (size_t i = 0; i < obj.v.size(); ++i) {
    if (!on_support(i)) continue;
    double phase = 0.0;
    if (init_phase)
      phase = init_phase->v[i];
    else if (opts.init == InitKind::random)
      phase = rng.uniform(0.0, 6.283185307179586);
    obj.v[i] = {amp0 * std::cos(phase), amp0 * std::sin(phase)};
  }

  RetrievalResult res;
  ComplexField2D far = propagate(obj, tf);
  res.loss_trace.push_back(intensity_mse(far, intensity_meas));
  const double base = res.loss_trace[0];

  optics::ImagingConfig back_cfg = cfg;
  back_cfg.distance = -cfg.distance;
  const optics::TransferFunction tf_back = transfer_function(back_cfg);

  for (int it = 1; it <= opts.max_iters; ++it) {
    // (a) impose the measured modulus in the detector plane
    for (size_t i = 0; i < far.v.size(); ++i) {
      const double target = std::sqrt(intensity_meas.v[i]);
      const double mag = std::abs(far.v[i]);
      far.v[i] = (mag > 0.0) ? far.v[i] * (target / mag) : cplx{target, 0.0};
    }
    // (b) back to the object plane
    obj = propagate(far, tf_back);
    // (c) impose the object-plane amplitude and support
    for (size_t i = 0; i < obj.v.size(); ++i) {
      if (!on_support(i)) {
        obj.v[i] = {0.0, 0.0};
        continue;
      }
      const double ph = std::atan2(obj.v[i].imag(), obj.v[i].real());
      obj.v[i] = {amp0 * std::cos(ph), amp0 * std::sin(ph)};
    }
    // (d) forward again and record the residual
    far = propagate(obj, tf);
    const double loss = res.loss_trace.back();
    const double cur = intensity_mse(far, intensity_meas);
    res.loss_trace.push_back(cur);
    res.iterations_run = it;
    if (!std::isfinite(cur)) {
      res.terminated_by = TerminationReason::divergence;
      break;
    }
    if (rel_change_stop(loss, cur, base, opts.tol)) {
      res.terminated_by = TerminationReason::tolerance;
      break;
    }
    res.terminated_by = TerminationReason::max_iters;
  }

  res.phase = Image2D(h, w);
  for (size_t i = 0; i < obj.v.size(); ++i)
    res.phase.v[i] = on_support(i) ? std::atan2(obj.v[i].imag(), obj.v[i].real()) : 0.0;
  return res;
}

RetrievalResult wirtinger_flow(const Image2D& intensity_meas,
                               const optics::ImagingConfig& cfg,
                               const SolverOptions& opts,
                               const std::optional<ComplexField2D>& init_field) {
  cfg.validate();
  opts.validate();
  check_measurement(intensity_meas, cfg);

  const int h = cfg.height, w = cfg.width;
  const optics::TransferFunction tf = transfer_function(cfg);
  const double mean_i = mean_value(intensity_meas);
  const double mu = opts.step_size > 0.0 ? opts.step_size
                                         : 0.1 / (mean_i > 0.0 ? mean_i : 1.0);

  ComplexField2D psi;
  if (init_field) {
    if (!init_field->same_shape(ComplexField2D(h, w)))
      throw DimensionError("wirtinger_flow: init field shape mismatch");
    psi = *init_field;
  } else if (opts.init == InitKind::spectral) {
    // power iteration on H^adj diag(I) H, a cheap spectral initializer
    Rng rng(opts.seed);
    psi = ComplexField2D(h, w);
    for (auto& z : psi.v) z = {rng.normal(), rng.normal()};
    for (int it = 0; it < 16; ++it) {
      ComplexField2D t = propagate(psi, tf);
      for (size_t i = 0; i < t.v.size(); ++i) t.v[i] *= intensity_meas.v[i];
      psi = propagate_adjoint(t, tf);
      const double nrm = std::sqrt(optics::total_power(psi));
      if (nrm <= 0.0) break;
      for (auto& z : psi.v) z /= nrm;
    }
    // rescale the leading direction to the measured energy
    const double p = optics::total_power(psi);
    double target = 0.0;
    for (double x : intensity_meas.v) target += x;
    if (p > 0.0 && target > 0.0) {
      const double s = std::sqrt(target / p);
      for (auto& z : psi.v) z *= s;
    }
  } else if (opts.init == InitKind::random) {
    Rng rng(opts.seed);
    const double amp = std::sqrt(mean_i > 0.0 ? mean_i : 1.0);
    psi = ComplexField2D(h, w);
    for (auto& z : psi.v) {
      const double ph = rng.uniform(0.0, 6.283185307179586);
      z = {amp * std::cos(ph), amp * std::sin(ph)};
    }
  } else {
    psi = ComplexField2D(h, w, cplx{std::sqrt(mean_i > 0.0 ? mean_i : 1.0), 0.0});
  }

  RetrievalResult res;
  ComplexField2D far = propagate(psi, tf);
  res.loss_trace.push_back(intensity_mse(far, intensity_meas));
  const double base = res.loss_trace[0];
  const double diverged_at = 1e6 * (base > 0.0 ? base : 1.0);

  for (int it = 1; it <= opts.max_iters; ++it) {
    // residual-weighted field, pulled back through the adjoint
    ComplexField2D weighted(h, w);
    for (size_t i = 0; i < far.v.size(); ++i) {
      const cplx z = far.v[i];
      const double e = (z.real() * z.real() + z.imag() * z.imag()) - intensity_meas.v[i];
      weighted.v[i] = 2.0 * e * z;
    }
    ComplexField2D grad = propagate_adjoint(weighted, tf);
    for (size_t i = 0; i < psi.v.size(); ++i) psi.v[i] -= mu * grad.v[i];

    far = propagate(psi, tf);
    const double prev = res.loss_trace.back();
    const double cur = intensity_mse(far, intensity_meas);
    res.loss_trace.push_back(cur);
    res.iterations_run = it;
    if (!std::isfinite(cur) || cur > diverged_at) {
      res.terminated_by = TerminationReason::divergence;
      break;
    }
    if (rel_change_stop(prev, cur, base, opts.tol)) {
      res.terminated_by = TerminationReason::tolerance;
      break;
    }
    res.terminated_by = TerminationReason::max_iters;
  }

  res.phase = Image2D(h, w);
  for (size_t i = 0; i < psi.v.size(); ++i)
    res.phase.v[i] = std::atan2(psi.v[i].imag(), psi.v[i].real());
  return res;
}

Image2D born_transfer_filter(const optics::ImagingConfig& cfg) {
  const optics::TransferFunction tf = transfer_function(cfg);
  const cplx carrier = std::conj(tf.values.v[0]);
  Image2D g(cfg.height, cfg.width);
  for (size_t i = 0; i < g.v.size(); ++i)
    g.v[i] = -(carrier * tf.values.v[i]).imag();
  return g;
}

Image2D fourier_born_inverse(const Image2D& intensity_meas,
                             const optics::ImagingConfig& cfg, double alpha) {
  cfg.validate();
  check_measurement(intensity_meas, cfg);
  if (alpha <= 0.0) throw ConfigError("fourier_born_inverse: alpha must be > 0");

  const int h = cfg.height, w = cfg.width;
  // contrast d = (I/I0 - 1)/2 relates to theta via fft(d) = g .* fft(theta)
  ComplexField2D d(h, w);
  for (size_t i = 0; i < d.v.size(); ++i)
    d.v[i] = {(intensity_meas.v[i] / cfg.i0 - 1.0) * 0.5, 0.0};

  const Image2D g = born_transfer_filter(cfg);
  ComplexField2D spec = optics::fft2(d);
  for (size_t i = 0; i < spec.v.size(); ++i) {
    const double gv = g.v[i];
    spec.v[i] *= gv / (gv * gv + alpha);  // Tikhonov-regularized division
  }
  ComplexField2D theta_c = optics::ifft2(spec);
  Image2D theta(h, w);
  for (size_t i = 0; i < theta.v.size(); ++i) theta.v[i] = theta_c.v[i].real();
  require_finite(theta, "fourier_born_inverse");
  return theta;
}

}  // namespace phaseret::solvers
