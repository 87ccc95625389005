#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "phaseret/image.hpp"
#include "phaseret/nets/blocks.hpp"
#include "phaseret/nets/spec.hpp"

namespace phaseret::nets {

/// A built architecture: spec + ordered parameter tensors + forward closure.
/// The output of forward() is phase_scale * sigmoid(head), one channel, same
/// spatial extents as the input.
class Network {
 public:
  explicit Network(const NetworkSpec& spec);

  const NetworkSpec& spec() const { return spec_; }
  std::vector<ad::Tensor>& parameters() { return params_; }
  const std::vector<ad::Tensor>& parameters() const { return params_; }
  std::int64_t parameter_count() const;
  void zero_grad();

  /// input [1,H,W] with H, W divisible by spec().spatial_divisor().
  ad::Tensor forward(const ad::Tensor& input) const;

  /// Plain-text spec header + raw little-endian parameter doubles.
  void save(std::ostream& os) const;
  static Network load(std::istream& is);

 private:
  struct UNetBody {
    std::vector<DoubleConv> enc;
    std::vector<UpConv> ups;
    std::vector<DoubleConv> dec;
    ad::Tensor operator()(const ad::Tensor& x) const;
  };
  struct U2Body {
    std::vector<MiniUNet> enc;
    std::vector<UpConv> ups;
    std::vector<MiniUNet> dec;
    bool residual = false;
    ad::Tensor operator()(const ad::Tensor& x) const;
  };

  NetworkSpec spec_;
  std::vector<ad::Tensor> params_;
  std::optional<UNetBody> unet_;
  std::vector<U2Body> bodies_;
  std::optional<PlainConv> fusion_;  // res_u2net stage combiner
  PlainConv head_;
};

inline Network build(const NetworkSpec& spec) { return Network(spec); }

/// Inference-only convenience: runs forward without recording the tape.
/// `normalized` is expected in [0,1]; output values lie in (0, phase_scale).
Image2D forward_phase(const Network& net, const Image2D& normalized);

}  // namespace phaseret::nets
