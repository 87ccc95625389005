#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "phaseret/ad/adam.hpp"
#include "phaseret/nets/network.hpp"
#include "phaseret/optics/propagate.hpp"
#include "phaseret/solvers/options.hpp"

namespace phaseret::fit {

enum class ForwardModel { fourier_full, fourier_born };
enum class TolMode { relative, absolute };
enum class OptimizerKind { adam, sgd };

const char* to_string(ForwardModel m);
ForwardModel forward_model_from_string(const std::string& name);

struct FitOptions {
  ForwardModel model = ForwardModel::fourier_full;
  int max_iters = 1000;
  double tol = 1e-4;
  TolMode tol_mode = TolMode::relative;
  double lr = 1e-3;
  OptimizerKind optimizer = OptimizerKind::adam;
  std::uint64_t seed = 0;
  int log_every = 0;
  std::ostream* log_stream = nullptr;  // per-iteration CSV when log_every > 0

  void validate() const {
    if (max_iters < 1) throw ConfigError("FitOptions: max_iters must be >= 1");
    if (tol < 0) throw ConfigError("FitOptions: tol must be >= 0");
    if (lr <= 0) throw ConfigError("FitOptions: lr must be > 0");
  }
};

struct FitResult {
  Image2D phase;
  std::vector<double> loss_trace;  // size == iterations_run + 1
  int iterations_run = 0;
  solvers::TerminationReason terminated_by = solvers::TerminationReason::max_iters;
  double wall_time_s = 0.0;
  bool success = false;  // finite run with loss_trace.back() <= loss_trace.front()
};

/// Differentiable measurement node: maps a [1,H,W] phase tensor to the
/// predicted intensity under the chosen diffraction model, with the gradient
/// computed analytically through the linear propagator (adjoint = conjugated
/// transfer function).
ad::Tensor diffraction_intensity(const ad::Tensor& theta,
                                 const optics::ImagingConfig& cfg,
                                 ForwardModel model);

/// Stopping rule shared by the fit loop and its tests.
bool stop_by_change(double prev_loss, double cur_loss, double initial_loss,
                    double tol, TolMode mode);

/// The untrained optimization loop: the network maps the normalized
/// measurement to a phase estimate, the diffraction model maps that phase to
/// a predicted intensity, and the MSE against the raw measurement drives the
/// parameter updates. The network is built fresh from `spec` with
/// opts.seed as the initialization seed.
FitResult retrieve_untrained(const Image2D& intensity_meas,
                             const optics::ImagingConfig& cfg,
                             const nets::NetworkSpec& spec,
                             const FitOptions& opts);

/// Runs each spec with identical options; one failed fit is reported in its
/// row and does not abort the table. Row order follows the spec order.
std::vector<FitResult> compare_networks(const Image2D& intensity_meas,
                                        const optics::ImagingConfig& cfg,
                                        const std::vector<nets::NetworkSpec>& specs,
                                        const FitOptions& opts);

}  // namespace phaseret::fit
