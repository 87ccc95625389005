#pragma once

#include <cstdint>
#include <string>

#include "phaseret/errors.hpp"

namespace phaseret::nets {

enum class NetKind { unet, u2net, res_u2net };

const char* to_string(NetKind k);
NetKind net_kind_from_string(const std::string& name);  // throws ConfigError

/// Declarative description of one architecture. The parameter count of the
/// built network is a pure function of this record.
struct NetworkSpec {
  NetKind kind = NetKind::unet;
  int depth = 4;          // outer encoder levels
  int base_channels = 16;
  int inner_depth = 3;    // nested levels per unit (u2net / res_u2net)
  int stages = 2;         // parallel bodies (res_u2net)
  std::uint64_t seed = 0;
  double phase_scale = 6.283185307179586476925286766559;  // radians

  void validate() const;

  /// Input H and W must be divisible by this power of two.
  int spatial_divisor() const;
};

}  // namespace phaseret::nets
