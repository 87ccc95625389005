#include "phaseret/nets/blocks.hpp"

#include <algorithm>
#include <cmath>

namespace phaseret::nets {

using ad::Tensor;

Tensor BlockBuilder::he_weight(ad::Shape shape, int fan_in) {
  const double limit = std::sqrt(6.0 / double(fan_in));
  std::vector<double> v(ad::shape_size(shape));
  for (auto& x : v) x = rng.uniform(-limit, limit);
  Tensor t = Tensor::from_values(std::move(shape), std::move(v), true);
  params->push_back(t);
  return t;
}

Tensor BlockBuilder::zeros(ad::Shape shape) {
  Tensor t = Tensor::zeros(std::move(shape), true);
  params->push_back(t);
  return t;
}

Tensor BlockBuilder::ones(ad::Shape shape) {
  Tensor t = Tensor::full(std::move(shape), 1.0, true);
  params->push_back(t);
  return t;
}

ConvBnRelu ConvBnRelu::make(BlockBuilder& bb, int c_in, int c_out, int k) {
  ConvBnRelu blk;
  blk.w = bb.he_weight({c_out, c_in, k, k}, c_in * k * k);
  blk.b = bb.zeros({c_out});
  blk.gamma = bb.ones({c_out});
  blk.beta = bb.zeros({c_out});
  blk.pad = k / 2;
  return blk;
}

Tensor ConvBnRelu::operator()(const Tensor& x) const {
  return ad::relu(ad::batchnorm2d(ad::conv2d(x, w, b, 1, pad), gamma, beta));
}

DoubleConv DoubleConv::make(BlockBuilder& bb, int c_in, int c_out) {
  DoubleConv dc;
  dc.c1 = ConvBnRelu::make(bb, c_in, c_out);
  dc.c2 = ConvBnRelu::make(bb, c_out, c_out);
  return dc;
}

Tensor DoubleConv::operator()(const Tensor& x) const { return c2(c1(x)); }

UpConv UpConv::make(BlockBuilder& bb, int c_in, int c_out) {
  UpConv up;
  up.w = bb.he_weight({c_in, c_out, 2, 2}, c_in * 4);
  return up;
}

Tensor UpConv::operator()(const Tensor& x) const {
  return ad::conv2d_transpose(x, w, 2, 0);
}

PlainConv PlainConv::make(BlockBuilder& bb, int c_in, int c_out, int k) {
  PlainConv pc;
  pc.w = bb.he_weight({c_out, c_in, k, k}, c_in * k * k);
  pc.b = bb.zeros({c_out});
  pc.pad = k / 2;
  return pc;
}

Tensor PlainConv::operator()(const Tensor& x) const {
  return ad::conv2d(x, w, b, 1, pad);
}

int MiniUNet::mid_channels(int c_out) { return std::max(4, c_out / 2); }

MiniUNet MiniUNet::make(BlockBuilder& bb, int c_in, int c_out, int levels,
                        bool residual) {
  MiniUNet m;
  m.residual = residual;
  const int mid = mid_channels(c_out);
  m.carrier = ConvBnRelu::make(bb, c_in, c_out);
  m.enc.push_back(ConvBnRelu::make(bb, c_out, mid));
  for (int j = 1; j < levels; ++j) m.enc.push_back(ConvBnRelu::make(bb, mid, mid));
  m.dec.resize(levels - 1);
  for (int j = levels - 2; j >= 0; --j) m.dec[j] = ConvBnRelu::make(bb, 2 * mid, mid);
  m.out = ConvBnRelu::make(bb, mid, c_out);
  return m;
}

Tensor MiniUNet::operator()(const Tensor& x) const {
  Tensor car = carrier(x);
  std::vector<Tensor> skips;
  skips.reserve(enc.size());
  Tensor f = enc[0](car);
  skips.push_back(f);
  for (size_t j = 1; j < enc.size(); ++j) {
    f = enc[j](ad::maxpool2d(f));
    skips.push_back(f);
  }
  for (int j = int(dec.size()) - 1; j >= 0; --j) {
    Tensor up = ad::upsample_nearest(f, 2);
    Tensor y = dec[j](ad::concat_channels(up, skips[j]));
    f = residual ? ad::add(y, up) : y;
  }
  Tensor o = out(f);
  return residual ? ad::add(o, car) : o;
}

}  // namespace phaseret::nets
