#include "phaseret/fit/untrained.hpp"

#include <chrono>
#include <cmath>
#include <ostream>

#include "phaseret/optics/fft.hpp"

namespace phaseret::fit {

using optics::ComplexField2D;
using optics::cplx;

const char* to_string(ForwardModel m) {
  return m == ForwardModel::fourier_full ? "full" : "born";
}

ForwardModel forward_model_from_string(const std::string& name) {
  if (name == "full" || name == "fourier_full") return ForwardModel::fourier_full;
  if (name == "born" || name == "fourier_born") return ForwardModel::fourier_born;
  throw ConfigError("unknown forward model: " + name);
}

bool stop_by_change(double prev_loss, double cur_loss, double initial_loss,
                    double tol, TolMode mode) {
  if (tol <= 0.0) return false;
  const double change = std::abs(cur_loss - prev_loss);
  if (mode == TolMode::absolute) return change < tol;
  if (initial_loss <= 0.0) return true;
  return change / initial_loss < tol;
}

ad::Tensor diffraction_intensity(const ad::Tensor& theta,
                                 const optics::ImagingConfig& cfg,
                                 ForwardModel model) {
  if (theta.rank() != 3 || theta.dim(0) != 1)
    throw DimensionError("diffraction_intensity: expected [1,H,W] phase tensor");
  if (theta.dim(1) != cfg.height || theta.dim(2) != cfg.width)
    throw DimensionError("diffraction_intensity: phase does not match config grid");
  const int h = cfg.height, w = cfg.width;
  const size_t n = size_t(h) * w;
  const optics::TransferFunction tf = transfer_function(cfg);
  const cplx carrier = std::conj(tf.values.v[0]);
  const double i0 = cfg.i0;

  if (model == ForwardModel::fourier_full) {
    // psi0 = sqrt(I0) e^{i theta}; p = H psi0; I = |p|^2
    auto psi0 = std::make_shared<ComplexField2D>(h, w);
    const double amp = std::sqrt(i0);
    const auto& tv = theta.values();
    for (size_t i = 0; i < n; ++i)
      psi0->v[i] = {amp * std::cos(tv[i]), amp * std::sin(tv[i])};
    auto far = std::make_shared<ComplexField2D>(propagate(*psi0, tf));
    std::vector<double> out(n);
    for (size_t i = 0; i < n; ++i) {
      const cplx z = far->v[i];
      out[i] = z.real() * z.real() + z.imag() * z.imag();
    }
    // dL/dtheta = -2 Im[ psi0 .* conj(H^adj(r .* p)) ], r = upstream grad
    auto grad_fn = [psi0, far, tf, h, w, n](const std::vector<double>& up) {
      ComplexField2D weighted(h, w);
      for (size_t i = 0; i < n; ++i) weighted.v[i] = up[i] * far->v[i];
      ComplexField2D q = propagate_adjoint(weighted, tf);
      std::vector<double> g(n);
      for (size_t i = 0; i < n; ++i)
        g[i] = -2.0 * (psi0->v[i] * std::conj(q.v[i])).imag();
      return g;
    };
    return ad::custom_unary(theta, {1, h, w}, std::move(out), std::move(grad_fn),
                            "forward_full");
  }

  // Born: I = I0 (1 + 2 Re[carrier * H(i theta)])
  ComplexField2D f(h, w);
  const auto& tv = theta.values();
  for (size_t i = 0; i < n; ++i) f.v[i] = {0.0, tv[i]};
  ComplexField2D g = propagate(f, tf);
  std::vector<double> out(n);
  for (size_t i = 0; i < n; ++i)
    out[i] = i0 * (1.0 + 2.0 * (carrier * g.v[i]).real());
  // dL/dtheta = -2 I0 Im[ carrier * conj(H^adj(r)) ]
  auto grad_fn = [tf, carrier, i0, h, w, n](const std::vector<double>& up) {
    ComplexField2D r(h, w);
    for (size_t i = 0; i < n; ++i) r.v[i] = {up[i], 0.0};
    ComplexField2D s = propagate_adjoint(r, tf);
    std::vector<double> gr(n);
    for (size_t i = 0; i < n; ++i)
      gr[i] = -2.0 * i0 * (carrier * std::conj(s.v[i])).imag();
    return gr;
  };
  return ad::custom_unary(theta, {1, h, w}, std::move(out), std::move(grad_fn),
                          "forward_born");
}

namespace {

struct LossEval {
  ad::Tensor loss;
  ad::Tensor phase;
};

LossEval eval_loss(const nets::Network& net, const ad::Tensor& input,
                   const ad::Tensor& target, const optics::ImagingConfig& cfg,
                   ForwardModel model) {
  LossEval e;
  e.phase = net.forward(input);
  ad::Tensor pred = diffraction_intensity(e.phase, cfg, model);
  e.loss = ad::mse_loss(pred, target);
  return e;
}

}  // namespace

FitResult retrieve_untrained(const Image2D& intensity_meas,
                             const optics::ImagingConfig& cfg,
                             const nets::NetworkSpec& spec,
                             const FitOptions& opts) {
  cfg.validate();
  opts.validate();
  if (intensity_meas.height != cfg.height || intensity_meas.width != cfg.width)
    throw DimensionError("retrieve_untrained: measurement does not match config");
  require_finite(intensity_meas, "retrieve_untrained");
  for (double x : intensity_meas.v)
    if (x < 0.0) throw ConfigError("retrieve_untrained: negative intensity");

  const auto t_start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
        .count();
  };

  nets::NetworkSpec run_spec = spec;
  run_spec.seed = opts.seed;
  nets::Network net(run_spec);

  // network sees the unit-max normalized image; the loss sees raw intensities
  const double peak = max_value(intensity_meas);
  std::vector<double> norm(intensity_meas.v);
  if (peak > 0.0)
    for (auto& x : norm) x /= peak;
  ad::Tensor input = ad::Tensor::from_values({1, cfg.height, cfg.width}, std::move(norm));
  ad::Tensor target =
      ad::Tensor::from_values({1, cfg.height, cfg.width}, intensity_meas.v);

  ad::AdamState adam;
  auto params = net.parameters();

  FitResult res;
  auto finish = [&](const ad::Tensor& phase_tensor) {
    res.phase = Image2D(cfg.height, cfg.width);
    res.phase.v = phase_tensor.values();
    res.wall_time_s = elapsed();
    res.success = res.terminated_by != solvers::TerminationReason::divergence &&
                  !res.loss_trace.empty() &&
                  res.loss_trace.back() <= res.loss_trace.front() + 1e-300;
  };

  LossEval cur;
  try {
    cur = eval_loss(net, input, target, cfg, opts.model);
  } catch (const NumericError&) {
    res.terminated_by = solvers::TerminationReason::divergence;
    res.loss_trace.push_back(std::numeric_limits<double>::quiet_NaN());
    res.phase = Image2D(cfg.height, cfg.width);
    res.wall_time_s = elapsed();
    return res;
  }
  res.loss_trace.push_back(cur.loss.scalar());
  const double base = res.loss_trace[0];
  if (opts.log_stream && opts.log_every > 0)
    *opts.log_stream << "iteration,loss,seconds\n"
                     << 0 << "," << base << "," << elapsed() << "\n";

  for (int it = 1; it <= opts.max_iters; ++it) {
    try {
      net.zero_grad();
      ad::backward(cur.loss);
      if (opts.optimizer == OptimizerKind::adam)
        ad::adam_step(params, adam, opts.lr);
      else
        ad::sgd_step(params, opts.lr);
      cur = eval_loss(net, input, target, cfg, opts.model);
    } catch (const NumericError&) {
      res.terminated_by = solvers::TerminationReason::divergence;
      res.iterations_run = it;
      res.loss_trace.push_back(std::numeric_limits<double>::quiet_NaN());
      finish(cur.phase);
      return res;
    }
    const double prev = res.loss_trace.back();
    const double loss = cur.loss.scalar();
    res.loss_trace.push_back(loss);
    res.iterations_run = it;
    if (opts.log_stream && opts.log_every > 0 && it % opts.log_every == 0)
      *opts.log_stream << it << "," << loss << "," << elapsed() << "\n";
    if (stop_by_change(prev, loss, base, opts.tol, opts.tol_mode)) {
      res.terminated_by = solvers::TerminationReason::tolerance;
      finish(cur.phase);
      return res;
    }
    res.terminated_by = solvers::TerminationReason::max_iters;
  }
  finish(cur.phase);
  return res;
}

std::vector<FitResult> compare_networks(const Image2D& intensity_meas,
                                        const optics::ImagingConfig& cfg,
                                        const std::vector<nets::NetworkSpec>& specs,
                                        const FitOptions& opts) {
  std::vector<FitResult> rows;
  rows.reserve(specs.size());
  for (const auto& spec : specs) {
    try {
      rows.push_back(retrieve_untrained(intensity_meas, cfg, spec, opts));
    } catch (const std::exception&) {
      FitResult failed;
      failed.terminated_by = solvers::TerminationReason::divergence;
      failed.loss_trace.push_back(std::numeric_limits<double>::quiet_NaN());
      failed.phase = Image2D(cfg.height, cfg.width);
      rows.push_back(std::move(failed));
    }
  }
  return rows;
}

}  // namespace phaseret::fit
