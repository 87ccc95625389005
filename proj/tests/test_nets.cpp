#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "phaseret/nets/network.hpp"

using namespace phaseret;
using namespace phaseret::nets;
using ad::Tensor;

namespace {

// closed-form parameter counts, derived independently from the layer plan
std::int64_t cb(std::int64_t cin, std::int64_t cout, std::int64_t k = 3) {
  return k * k * cin * cout + 3 * cout;  // weight + bias + gamma + beta
}
std::int64_t dc(std::int64_t cin, std::int64_t cout) {
  return cb(cin, cout) + cb(cout, cout);
}
std::int64_t up(std::int64_t cin, std::int64_t cout) { return 4 * cin * cout; }
std::int64_t plain(std::int64_t cin, std::int64_t cout, std::int64_t k = 1) {
  return k * k * cin * cout + cout;
}

std::int64_t unet_params(int d, std::int64_t b) {
  std::int64_t total = dc(1, b);
  for (int i = 1; i < d; ++i) total += dc(b << (i - 1), b << i);
  for (int i = 0; i < d - 1; ++i)
    total += up(b << (i + 1), b << i) + dc(2 * (b << i), b << i);
  return total + plain(b, 1);
}

std::int64_t mini_params(std::int64_t cin, std::int64_t cout, int m) {
  const std::int64_t mid = std::max<std::int64_t>(4, cout / 2);
  std::int64_t total = cb(cin, cout) + cb(cout, mid);
  total += (m - 1) * cb(mid, mid);
  total += (m - 1) * cb(2 * mid, mid);
  return total + cb(mid, cout);
}

std::int64_t u2_body_params(int d, std::int64_t b, int m) {
  std::int64_t total = mini_params(1, b, m);
  for (int i = 1; i < d; ++i) total += mini_params(b, b, m);
  for (int i = 0; i < d - 1; ++i) total += up(b, b) + mini_params(2 * b, b, m);
  return total;
}

std::int64_t expected_params(const NetworkSpec& s) {
  switch (s.kind) {
    case NetKind::unet:
      return unet_params(s.depth, s.base_channels);
    case NetKind::u2net:
      return u2_body_params(s.depth, s.base_channels, s.inner_depth) +
             plain(s.base_channels, 1);
    case NetKind::res_u2net:
      return s.stages * u2_body_params(s.depth, s.base_channels, s.inner_depth) +
             plain(std::int64_t(s.stages) * s.base_channels, s.base_channels) +
             plain(s.base_channels, 1);
  }
  return 0;
}

NetworkSpec make_spec(NetKind kind, int depth, int base, int inner, int stages,
                      std::uint64_t seed) {
  NetworkSpec s;
  s.kind = kind;
  s.depth = depth;
  s.base_channels = base;
  s.inner_depth = inner;
  s.stages = stages;
  s.seed = seed;
  return s;
}

}  // namespace

TEST_CASE("hand-computed parameter count for UNet depth=2 base=4") {
  Network net(make_spec(NetKind::unet, 2, 4, 2, 1, 0));
  CHECK(net.parameter_count() == 1705);  // layer-by-layer hand enumeration
  CHECK(expected_params(net.spec()) == 1705);
}

TEST_CASE("parameter-count formula matches enumeration for random specs") {
  Rng rng(12345);
  for (int trial = 0; trial < 5; ++trial) {
    const NetKind kind = NetKind(trial % 3);
    NetworkSpec s = make_spec(kind, 2 + rng.uniform_int(0, 2),
                              4 * (1 + rng.uniform_int(0, 3)),
                              2 + rng.uniform_int(0, 1), 1 + rng.uniform_int(0, 2),
                              rng.bits());
    Network net(s);
    CHECK(net.parameter_count() == expected_params(s));
  }
}

TEST_CASE("output shape is 1xHxW for all three kinds, square or not") {
  for (NetKind kind : {NetKind::unet, NetKind::u2net, NetKind::res_u2net}) {
    NetworkSpec s = make_spec(kind, 3, 4, 2, 2, 1);
    Network net(s);
    for (auto [h, w] : {std::pair{32, 32}, std::pair{16, 48}}) {
      ad::NoGradGuard ng;
      Tensor in = Tensor::full({1, h, w}, 0.4);
      Tensor out = net.forward(in);
      CHECK(out.shape() == ad::Shape{1, h, w});
    }
  }
}

TEST_CASE("forward output lies strictly inside (0, phase_scale)") {
  NetworkSpec s = make_spec(NetKind::res_u2net, 2, 4, 2, 2, 7);
  s.phase_scale = 3.5;
  Network net(s);
  Rng rng(9);
  Image2D img(16, 16);
  for (auto& x : img.v) x = rng.uniform();
  Image2D phase = forward_phase(net, img);
  for (double p : phase.v) {
    CHECK(p > 0.0);
    CHECK(p < 3.5);
  }
}

TEST_CASE("identical seeds build identical networks; forward is reproducible") {
  NetworkSpec s = make_spec(NetKind::u2net, 3, 8, 2, 1, 321);
  Network a(s), b(s);
  REQUIRE(a.parameters().size() == b.parameters().size());
  for (size_t i = 0; i < a.parameters().size(); ++i)
    CHECK(a.parameters()[i].values() == b.parameters()[i].values());

  Rng rng(17);
  Image2D img(16, 16);
  for (auto& x : img.v) x = rng.uniform();
  CHECK(forward_phase(a, img).v == forward_phase(b, img).v);
}

TEST_CASE("residual unit with zeroed post-concatenation convs is the carrier identity") {
  std::vector<Tensor> params;
  BlockBuilder bb(42, &params);
  MiniUNet unit = MiniUNet::make(bb, 3, 8, 3, true);
  for (auto& stage : unit.dec) {
    auto& w = stage.w.mutable_values();
    std::fill(w.begin(), w.end(), 0.0);
  }
  {
    auto& w = unit.out.w.mutable_values();
    std::fill(w.begin(), w.end(), 0.0);
  }
  Rng rng(4);
  ad::NoGradGuard ng;
  Tensor x = oracles::random_tensor({3, 16, 16}, rng, false);
  Tensor out = unit(x);
  Tensor carrier_only = unit.carrier(x);
  REQUIRE(out.shape() == carrier_only.shape());
  for (size_t i = 0; i < out.values().size(); ++i)
    CHECK(out.values()[i] == doctest::Approx(carrier_only.values()[i]).epsilon(1e-12));
}

TEST_CASE("gradient of mean(theta) matches finite differences on every UNet parameter") {
  NetworkSpec s = make_spec(NetKind::unet, 2, 4, 2, 1, 5);
  Network net(s);
  Rng rng(6);
  std::vector<double> img(16 * 16);
  for (auto& x : img) x = rng.uniform();
  Tensor input = Tensor::from_values({1, 16, 16}, img);

  auto mean_theta = [&] {
    ad::NoGradGuard ng;
    Tensor out = net.forward(input);
    double acc = 0.0;
    for (double v : out.values()) acc += v;
    return acc / double(out.size());
  };

  net.zero_grad();
  Tensor loss = ad::mul_scalar(ad::sum(net.forward(input)), 1.0 / 256.0);
  ad::backward(loss);

  double worst_median = 0.0;
  for (auto& p : net.parameters()) {
    auto rep = oracles::finite_difference_check(p, mean_theta, p.grad(), 1e-5);
    worst_median = std::max(worst_median, rep.median_rel);
    CHECK(rep.median_rel < 1e-3);
  }
  CHECK(worst_median < 1e-3);
}

TEST_CASE("no parameter tensor is structurally cut off from the loss") {
  for (NetKind kind : {NetKind::unet, NetKind::u2net, NetKind::res_u2net}) {
    NetworkSpec s = make_spec(kind, 2, 4, 2, 2, 11);
    Network net(s);
    Rng rng(13);
    std::vector<double> img(16 * 16);
    for (auto& x : img) x = rng.uniform();
    Tensor input = Tensor::from_values({1, 16, 16}, img);
    net.zero_grad();
    ad::backward(ad::sum(net.forward(input)));
    for (auto& p : net.parameters()) {
      double linf = 0.0;
      for (double g : p.grad()) linf = std::max(linf, std::abs(g));
      CHECK(linf > 0.0);  // relu dead units may zero entries, never whole tensors
    }
  }
}

TEST_CASE("spec validation and divisibility errors") {
  NetworkSpec bad = make_spec(NetKind::unet, 1, 4, 2, 1, 0);
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  NetworkSpec small = make_spec(NetKind::unet, 2, 2, 2, 1, 0);
  CHECK_THROWS_AS(small.validate(), ConfigError);

  Network net(make_spec(NetKind::unet, 3, 4, 2, 1, 0));
  ad::NoGradGuard ng;
  Tensor in = Tensor::full({1, 10, 10}, 0.2);  // 10 not divisible by 4
  CHECK_THROWS_AS(net.forward(in), ConfigError);
}

TEST_CASE("save/load round trip preserves parameters and behavior") {
  NetworkSpec s = make_spec(NetKind::res_u2net, 2, 4, 2, 2, 77);
  Network net(s);
  std::stringstream buf;
  net.save(buf);
  Network loaded = Network::load(buf);
  REQUIRE(loaded.parameter_count() == net.parameter_count());

  Rng rng(19);
  Image2D img(16, 16);
  for (auto& x : img.v) x = rng.uniform();
  CHECK(forward_phase(net, img).v == forward_phase(loaded, img).v);
}

TEST_CASE("spatial divisor covers the nested levels") {
  CHECK(make_spec(NetKind::unet, 4, 4, 2, 1, 0).spatial_divisor() == 8);
  CHECK(make_spec(NetKind::u2net, 3, 4, 2, 1, 0).spatial_divisor() == 8);
  CHECK(make_spec(NetKind::res_u2net, 3, 4, 3, 1, 0).spatial_divisor() == 16);
}
