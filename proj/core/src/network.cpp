#include "phaseret/nets/network.hpp"

#include <istream>
#include <ostream>
#include <sstream>

namespace phaseret::nets {

using ad::Tensor;

const char* to_string(NetKind k) {
  switch (k) {
    case NetKind::unet: return "unet";
    case NetKind::u2net: return "u2net";
    case NetKind::res_u2net: return "resu2net";
  }
  return "unknown";
}

NetKind net_kind_from_string(const std::string& name) {
  if (name == "unet") return NetKind::unet;
  if (name == "u2net") return NetKind::u2net;
  if (name == "resu2net" || name == "res_u2net" || name == "res-u2net")
    return NetKind::res_u2net;
  throw ConfigError("unknown network kind: " + name);
}

void NetworkSpec::validate() const {
  if (depth < 2) throw ConfigError("NetworkSpec: depth must be >= 2");
  if (base_channels < 4) throw ConfigError("NetworkSpec: base_channels must be >= 4");
  if (kind != NetKind::unet && inner_depth < 2)
    throw ConfigError("NetworkSpec: inner_depth must be >= 2");
  if (kind == NetKind::res_u2net && stages < 1)
    throw ConfigError("NetworkSpec: stages must be >= 1");
  if (phase_scale <= 0) throw ConfigError("NetworkSpec: phase_scale must be > 0");
}

int NetworkSpec::spatial_divisor() const {
  int halvings = depth - 1;
  if (kind != NetKind::unet) halvings += inner_depth - 1;
  return 1 << halvings;
}

Tensor Network::UNetBody::operator()(const Tensor& x) const {
  std::vector<Tensor> skips;
  skips.reserve(enc.size());
  Tensor f = enc[0](x);
  skips.push_back(f);
  for (size_t i = 1; i < enc.size(); ++i) {
    f = enc[i](ad::maxpool2d(f));
    skips.push_back(f);
  }
  for (int i = int(dec.size()) - 1; i >= 0; --i) {
    Tensor up = ups[i](f);
    f = dec[i](ad::concat_channels(up, skips[i]));
  }
  return f;
}

Tensor Network::U2Body::operator()(const Tensor& x) const {
  std::vector<Tensor> skips;
  skips.reserve(enc.size());
  Tensor f = enc[0](x);
  skips.push_back(f);
  for (size_t i = 1; i < enc.size(); ++i) {
    f = enc[i](ad::maxpool2d(f));
    skips.push_back(f);
  }
  for (int i = int(dec.size()) - 1; i >= 0; --i) {
    Tensor up = ups[i](f);
    Tensor y = dec[i](ad::concat_channels(up, skips[i]));
    f = residual ? ad::add(y, up) : y;
  }
  return f;
}

Network::Network(const NetworkSpec& spec) : spec_(spec) {
  spec_.validate();
  BlockBuilder bb(spec_.seed, &params_);
  const int d = spec_.depth;
  const int b = spec_.base_channels;

  if (spec_.kind == NetKind::unet) {
    UNetBody body;
    body.enc.push_back(DoubleConv::make(bb, 1, b));
    for (int i = 1; i < d; ++i)
      body.enc.push_back(DoubleConv::make(bb, b << (i - 1), b << i));
    body.ups.resize(d - 1);
    body.dec.resize(d - 1);
    for (int i = d - 2; i >= 0; --i) {
      body.ups[i] = UpConv::make(bb, b << (i + 1), b << i);
      body.dec[i] = DoubleConv::make(bb, 2 * (b << i), b << i);
    }
    unet_ = std::move(body);
  } else {
    const bool res = spec_.kind == NetKind::res_u2net;
    const int n_bodies = res ? spec_.stages : 1;
    const int m = spec_.inner_depth;
    for (int s = 0; s < n_bodies; ++s) {
      U2Body body;
      body.residual = res;
      body.enc.push_back(MiniUNet::make(bb, 1, b, m, res));
      for (int i = 1; i < d; ++i)
        body.enc.push_back(MiniUNet::make(bb, b, b, m, res));
      body.ups.resize(d - 1);
      body.dec.resize(d - 1);
      for (int i = d - 2; i >= 0; --i) {
        body.ups[i] = UpConv::make(bb, b, b);
        body.dec[i] = MiniUNet::make(bb, 2 * b, b, m, res);
      }
      bodies_.push_back(std::move(body));
    }
    if (res) fusion_ = PlainConv::make(bb, spec_.stages * b, b, 1);
  }
  head_ = PlainConv::make(bb, b, 1, 1);
}

std::int64_t Network::parameter_count() const {
  std::int64_t n = 0;
  for (const auto& p : params_) n += p.size();
  return n;
}

void Network::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

Tensor Network::forward(const Tensor& input) const {
  if (input.rank() != 3 || input.dim(0) != 1)
    throw DimensionError("Network::forward: expected [1,H,W] input");
  const int div = spec_.spatial_divisor();
  if (input.dim(1) % div != 0 || input.dim(2) % div != 0)
    throw ConfigError("Network::forward: spatial extents must be divisible by " +
                      std::to_string(div));

  Tensor f;
  if (unet_) {
    f = (*unet_)(input);
  } else {
    Tensor merged;
    for (size_t s = 0; s < bodies_.size(); ++s) {
      Tensor out = bodies_[s](input);
      merged = (s == 0) ? out : ad::concat_channels(merged, out);
    }
    f = fusion_ ? (*fusion_)(merged) : merged;
  }
  return ad::mul_scalar(ad::sigmoid(head_(f)), spec_.phase_scale);
}

Image2D forward_phase(const Network& net, const Image2D& normalized) {
  ad::NoGradGuard guard;
  Tensor in = Tensor::from_values({1, normalized.height, normalized.width},
                                  normalized.v);
  Tensor out = net.forward(in);
  Image2D phase(normalized.height, normalized.width);
  phase.v = out.values();
  return phase;
}

void Network::save(std::ostream& os) const {
  os << "PRNET1 kind=" << to_string(spec_.kind) << " depth=" << spec_.depth
     << " base=" << spec_.base_channels << " inner=" << spec_.inner_depth
     << " stages=" << spec_.stages << " seed=" << spec_.seed << " phase_scale=";
  os.precision(17);
  os << spec_.phase_scale << " params=" << parameter_count() << "\n";
  for (const auto& p : params_) {
    const auto& v = p.values();
    os.write(reinterpret_cast<const char*>(v.data()),
             std::streamsize(v.size() * sizeof(double)));
  }
}

Network Network::load(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("Network::load: missing header");
  std::istringstream hs(line);
  std::string magic;
  hs >> magic;
  if (magic != "PRNET1") throw ConfigError("Network::load: bad magic");
  NetworkSpec spec;
  std::int64_t declared = -1;
  std::string tok;
  while (hs >> tok) {
    auto eq = tok.find('=');
    if (eq == std::string::npos) throw ConfigError("Network::load: bad header token");
    const std::string key = tok.substr(0, eq);
    const std::string val = tok.substr(eq + 1);
    if (key == "kind") spec.kind = net_kind_from_string(val);
    else if (key == "depth") spec.depth = std::stoi(val);
    else if (key == "base") spec.base_channels = std::stoi(val);
    else if (key == "inner") spec.inner_depth = std::stoi(val);
    else if (key == "stages") spec.stages = std::stoi(val);
    else if (key == "seed") spec.seed = std::stoull(val);
    else if (key == "phase_scale") spec.phase_scale = std::stod(val);
    else if (key == "params") declared = std::stoll(val);
    else throw ConfigError("Network::load: unknown header key " + key);
  }
  Network net(spec);
  if (declared >= 0 && declared != net.parameter_count())
    throw ConfigError("Network::load: parameter count mismatch");
  for (auto& p : net.params_) {
    auto& v = p.mutable_values();
    is.read(reinterpret_cast<char*>(v.data()),
            std::streamsize(v.size() * sizeof(double)));
    if (!is) throw ConfigError("Network::load: truncated parameter blob");
    ad::check_finite(v, "Network::load");
  }
  return net;
}

}  // namespace phaseret::nets
