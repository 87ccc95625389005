#pragma once

#include <vector>

#include "phaseret/ad/ops.hpp"
#include "phaseret/rng.hpp"

namespace phaseret::nets {

/// Layer building blocks shared by the three architectures. Constructing a
/// block registers its parameters (He-uniform weights, zero biases/betas,
/// unit gammas) in the builder's parameter list in a fixed order.
struct BlockBuilder {
  Rng rng;
  std::vector<ad::Tensor>* params;

  BlockBuilder(std::uint64_t seed, std::vector<ad::Tensor>* out)
      : rng(seed), params(out) {}

  ad::Tensor he_weight(ad::Shape shape, int fan_in);
  ad::Tensor zeros(ad::Shape shape);
  ad::Tensor ones(ad::Shape shape);
};

/// conv(k, pad = k/2) -> batchnorm -> relu
struct ConvBnRelu {
  ad::Tensor w, b, gamma, beta;
  int pad = 1;

  static ConvBnRelu make(BlockBuilder& bb, int c_in, int c_out, int k = 3);
  ad::Tensor operator()(const ad::Tensor& x) const;
};

struct DoubleConv {
  ConvBnRelu c1, c2;

  static DoubleConv make(BlockBuilder& bb, int c_in, int c_out);
  ad::Tensor operator()(const ad::Tensor& x) const;
};

/// Bias-free 2x2 stride-2 transpose convolution: exact spatial doubling.
struct UpConv {
  ad::Tensor w;  // [c_in, c_out, 2, 2]

  static UpConv make(BlockBuilder& bb, int c_in, int c_out);
  ad::Tensor operator()(const ad::Tensor& x) const;
};

/// Plain conv with bias, no normalization (fusion layers and the head).
struct PlainConv {
  ad::Tensor w, b;
  int pad = 0;

  static PlainConv make(BlockBuilder& bb, int c_in, int c_out, int k = 1);
  ad::Tensor operator()(const ad::Tensor& x) const;
};

/// Nested mini encoder/decoder used as the unit of U2Net and Res-U2Net.
/// `residual` turns the post-concatenation convolutions into ResBlocks: their
/// output is added element-wise to the branch that entered the concatenation,
/// and the unit output is added to the carrier features. With all
/// post-concatenation conv weights zeroed a residual unit is the identity on
/// its carrier path.
struct MiniUNet {
  ConvBnRelu carrier;
  std::vector<ConvBnRelu> enc;  // levels 0..m-1 (level 0 from carrier)
  std::vector<ConvBnRelu> dec;  // levels m-2..0, stored by level index
  ConvBnRelu out;
  bool residual = false;

  static MiniUNet make(BlockBuilder& bb, int c_in, int c_out, int levels,
                       bool residual);
  ad::Tensor operator()(const ad::Tensor& x) const;

  static int mid_channels(int c_out);
};

}  // namespace phaseret::nets
