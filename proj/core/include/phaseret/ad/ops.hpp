#pragma once

#include "phaseret/ad/tensor.hpp"

namespace phaseret::ad {

/// 2-D cross-correlation. input [C_in,H,W], weight [C_out,C_in,k,k] with k
/// odd, bias [C_out]. Output extent (H + 2*padding - k)/stride + 1 must be an
/// exact integer. Differentiable w.r.t. input, weight and bias.
Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias,
              int stride = 1, int padding = 0);

/// Adjoint of conv2d: input [C_a,H,W], weight [C_a,C_b,k,k], output
/// [C_b,(H-1)*stride - 2*padding + k, ...]. For all compatible x, y:
/// <conv2d(x,w), y> == <x, conv2d_transpose(y,w)>.
Tensor conv2d_transpose(const Tensor& input, const Tensor& weight,
                        int stride = 1, int padding = 0);

/// Per-window max; gradient routes to the first-in-scan-order argmax.
Tensor maxpool2d(const Tensor& input, int window = 2, int stride = 2);

/// Per-channel normalization over the spatial dims (single-image statistics),
/// differentiable through mean and variance.
Tensor batchnorm2d(const Tensor& input, const Tensor& gamma, const Tensor& beta,
                   double eps = 1e-5);

Tensor relu(const Tensor& input);     // gradient at 0 defined as 0
Tensor sigmoid(const Tensor& input);
Tensor add(const Tensor& a, const Tensor& b);
Tensor mul_scalar(const Tensor& input, double s);

/// Join along the channel axis; both inputs [C,H,W] with equal H, W.
Tensor concat_channels(const Tensor& a, const Tensor& b);

/// Nearest-neighbor upsampling of the spatial dims by an integer factor.
Tensor upsample_nearest(const Tensor& input, int factor);

/// Mean of squared differences; gradient 2*(pred-target)/N.
Tensor mse_loss(const Tensor& pred, const Tensor& target);

Tensor sum(const Tensor& input);

/// Hook for ops whose forward values and input-gradient rule live outside
/// this module (e.g. the diffraction models). `grad_fn` maps the upstream
/// gradient to the gradient w.r.t. `input`.
Tensor custom_unary(const Tensor& input, Shape out_shape,
                    std::vector<double> out_values,
                    std::function<std::vector<double>(const std::vector<double>&)> grad_fn,
                    const char* name);

}  // namespace phaseret::ad
