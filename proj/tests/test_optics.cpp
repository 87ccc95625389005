#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "phaseret/optics/fft.hpp"
#include "phaseret/optics/propagate.hpp"

using namespace phaseret;
using namespace phaseret::optics;

namespace {

ImagingConfig test_cfg(int h, int w, double z = 5e-5) {
  ImagingConfig cfg;
  cfg.height = h;
  cfg.width = w;
  cfg.wavelength = 1e-6;
  cfg.pixel_pitch = 4e-6;
  cfg.distance = z;
  cfg.i0 = 1.0;
  return cfg;
}

// spectrum restricted to the propagating cone, so propagation is unitary
ComplexField2D band_limited_field(const ImagingConfig& cfg, Rng& rng) {
  ComplexField2D spec(cfg.height, cfg.width);
  const double lam2 = cfg.wavelength * cfg.wavelength;
  for (int i = 0; i < cfg.height; ++i) {
    const double fy = fft_frequency(i, cfg.height, cfg.pixel_pitch);
    for (int j = 0; j < cfg.width; ++j) {
      const double fx = fft_frequency(j, cfg.width, cfg.pixel_pitch);
      if (lam2 * (fx * fx + fy * fy) <= 0.5)
        spec.at(i, j) = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    }
  }
  return ifft2(spec);
}

}  // namespace

TEST_CASE("fft2: DC of an all-ones grid") {
  ComplexField2D f(2, 2, {1.0, 0.0});
  ComplexField2D F = fft2(f);
  CHECK(std::abs(F.at(0, 0) - cplx{4.0, 0.0}) < 1e-14);
  CHECK(std::abs(F.at(0, 1)) < 1e-14);
  CHECK(std::abs(F.at(1, 0)) < 1e-14);
  CHECK(std::abs(F.at(1, 1)) < 1e-14);
}

TEST_CASE("fft2 round trip on an awkward 13x7 grid") {
  Rng rng(3);
  ComplexField2D f = oracles::random_field(13, 7, rng);
  ComplexField2D g = ifft2(fft2(f));
  double worst = 0.0;
  for (size_t i = 0; i < f.v.size(); ++i)
    worst = std::max(worst, std::abs(f.v[i] - g.v[i]));
  CHECK(worst < 1e-12);
}

TEST_CASE("fft2 matches the naive DFT oracle on every size up to 16") {
  Rng rng(5);
  for (int h = 2; h <= 16; ++h) {
    for (int w : {2, 3, h}) {
      ComplexField2D f = oracles::random_field(h, w, rng);
      ComplexField2D fast = fft2(f);
      ComplexField2D slow = oracles::naive_dft2(f);
      double worst = 0.0;
      for (size_t i = 0; i < f.v.size(); ++i)
        worst = std::max(worst, std::abs(fast.v[i] - slow.v[i]));
      CHECK(worst < 1e-10);
    }
  }
}

TEST_CASE("fft2 handles the production 440 grid") {
  Rng rng(7);
  ComplexField2D f = oracles::random_field(440, 440, rng);
  ComplexField2D g = ifft2(fft2(f));
  double worst = 0.0;
  for (size_t i = 0; i < f.v.size(); ++i)
    worst = std::max(worst, std::abs(f.v[i] - g.v[i]));
  CHECK(worst < 1e-11);
}

TEST_CASE("transfer function: z=0 is exactly one, DC carries exp(-ikz)") {
  ImagingConfig cfg0 = test_cfg(8, 8, 0.0);
  TransferFunction tf0 = transfer_function(cfg0);
  for (const auto& v : tf0.values.v) CHECK(v == cplx{1.0, 0.0});

  ImagingConfig cfg = test_cfg(8, 8, 3.7e-5);
  TransferFunction tf = transfer_function(cfg);
  const double kz = cfg.wavenumber() * cfg.distance;
  CHECK(std::abs(tf.values.at(0, 0) - cplx{std::cos(kz), -std::sin(kz)}) < 1e-12);
  for (const auto& v : tf.values.v) CHECK(std::abs(v) <= 1.0 + 1e-12);
}

TEST_CASE("transfer function: evanescent branch decays as exp(-kz*sqrt(r-1))") {
  // choose geometry so one bin sits beyond cutoff with k*z*sqrt(r-1) = 20
  ImagingConfig cfg = test_cfg(8, 8);
  cfg.wavelength = 5e-6;
  cfg.pixel_pitch = 2e-6;  // Nyquist 250k cyc/m, lambda*nu up to 1.25
  // bin (0, 4): fx = 4/(8*2e-6) = 250000, r = (5e-6*250000)^2 = 1.5625
  const double r = 1.5625;
  const double k = cfg.wavenumber();
  cfg.distance = 20.0 / (k * std::sqrt(r - 1.0));
  TransferFunction tf = transfer_function(cfg);
  CHECK(std::abs(tf.values.at(0, 4)) == doctest::Approx(std::exp(-20.0)).epsilon(1e-9));
}

TEST_CASE("propagate: z=0 identity, constant field picks the DC phase") {
  ImagingConfig cfg0 = test_cfg(16, 16, 0.0);
  Rng rng(11);
  ComplexField2D f = oracles::random_field(16, 16, rng);
  ComplexField2D g = propagate(f, cfg0);
  for (size_t i = 0; i < f.v.size(); ++i) CHECK(std::abs(f.v[i] - g.v[i]) < 1e-12);

  ImagingConfig cfg = test_cfg(16, 16);
  ComplexField2D c(16, 16, {0.7, 0.2});
  ComplexField2D pc = propagate(c, cfg);
  const double kz = cfg.wavenumber() * cfg.distance;
  const cplx want = cplx{0.7, 0.2} * cplx{std::cos(kz), -std::sin(kz)};
  for (const auto& v : pc.v) CHECK(std::abs(v - want) < 1e-12);
}

TEST_CASE("propagate conserves power and inverts exactly inside the cone") {
  ImagingConfig cfg = test_cfg(32, 32);
  Rng rng(13);
  ComplexField2D f = band_limited_field(cfg, rng);
  ComplexField2D g = propagate(f, cfg);
  CHECK(std::abs(total_power(g) - total_power(f)) < 1e-10 * total_power(f));

  ImagingConfig back = cfg;
  back.distance = -cfg.distance;
  ComplexField2D h = propagate(g, back);
  double worst = 0.0;
  for (size_t i = 0; i < f.v.size(); ++i)
    worst = std::max(worst, std::abs(f.v[i] - h.v[i]));
  CHECK(worst < 1e-10);
}

TEST_CASE("propagate is linear") {
  ImagingConfig cfg = test_cfg(16, 16);
  Rng rng(17);
  ComplexField2D f1 = oracles::random_field(16, 16, rng);
  ComplexField2D f2 = oracles::random_field(16, 16, rng);
  const cplx a{0.3, -1.1}, b{-0.8, 0.4};
  ComplexField2D mix(16, 16);
  for (size_t i = 0; i < mix.v.size(); ++i) mix.v[i] = a * f1.v[i] + b * f2.v[i];
  ComplexField2D lhs = propagate(mix, cfg);
  ComplexField2D p1 = propagate(f1, cfg);
  ComplexField2D p2 = propagate(f2, cfg);
  double worst = 0.0;
  for (size_t i = 0; i < mix.v.size(); ++i)
    worst = std::max(worst, std::abs(lhs.v[i] - (a * p1.v[i] + b * p2.v[i])));
  CHECK(worst < 1e-12);
}

TEST_CASE("intensity is |psi|^2") {
  ComplexField2D f(1, 2);
  f.v[0] = {1.0, 0.0};
  f.v[1] = {3.0, 4.0};
  Image2D I = intensity(f);
  CHECK(I.v[0] == 1.0);
  CHECK(I.v[1] == 25.0);

  Rng rng(19);
  ComplexField2D r = oracles::random_field(6, 5, rng);
  Image2D Ir = intensity(r);
  for (size_t i = 0; i < r.v.size(); ++i)
    CHECK(Ir.v[i] ==
          doctest::Approx(r.v[i].real() * r.v[i].real() + r.v[i].imag() * r.v[i].imag()));
}

TEST_CASE("phase_to_field: modulus is sqrt(I0) for any phase") {
  ImagingConfig cfg = test_cfg(8, 8);
  cfg.i0 = 2.5;
  Image2D zero(8, 8, 0.0);
  ComplexField2D f0 = phase_to_field(zero, cfg);
  for (const auto& v : f0.v) CHECK(std::abs(v - cplx{std::sqrt(2.5), 0.0}) < 1e-15);

  Image2D pi_img(8, 8, 3.1415926535897932);
  ComplexField2D fp = phase_to_field(pi_img, cfg);
  for (const auto& v : fp.v) CHECK(v.real() == doctest::Approx(-std::sqrt(2.5)));

  Rng rng(23);
  Image2D theta(8, 8);
  for (auto& x : theta.v) x = rng.uniform(-3.0, 3.0);
  ComplexField2D f = phase_to_field(theta, cfg);
  for (const auto& v : f.v)
    CHECK(std::abs(std::norm(v) - 2.5) < 1e-14);
}

TEST_CASE("forward_full: constant phase gives constant I0") {
  ImagingConfig cfg = test_cfg(16, 16);
  cfg.i0 = 3.0;
  Image2D theta(16, 16, 0.8);
  Image2D I = forward_full(theta, cfg);
  for (double v : I.v) CHECK(v == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("forward_full equals the explicit composition") {
  ImagingConfig cfg = test_cfg(16, 16);
  Image2D theta(16, 16, 0.0);
  theta.at(7, 9) = 1.0;  // impulse
  Image2D I = forward_full(theta, cfg);
  Image2D ref = intensity(propagate(phase_to_field(theta, cfg), cfg));
  for (size_t i = 0; i < I.v.size(); ++i) CHECK(I.v[i] == ref.v[i]);
}

TEST_CASE("forward_born: zero phase gives exactly I0; z=0 gives exactly I0") {
  ImagingConfig cfg = test_cfg(16, 16);
  cfg.i0 = 1.7;
  Image2D zero(16, 16, 0.0);
  for (double v : forward_born(zero, cfg).v) CHECK(v == doctest::Approx(1.7));

  ImagingConfig cfg0 = test_cfg(16, 16, 0.0);
  Rng rng(29);
  Image2D theta(16, 16);
  for (auto& x : theta.v) x = rng.uniform(-0.5, 0.5);
  for (double v : forward_born(theta, cfg0).v) CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("Born error vs full model decays quadratically in phase amplitude") {
  ImagingConfig cfg = test_cfg(32, 32);
  Rng rng(31);
  Image2D base(32, 32);
  for (auto& x : base.v) x = rng.uniform(-1.0, 1.0);

  std::vector<double> eps{1e-2, 1e-3, 1e-4};
  std::vector<double> err;
  for (double e : eps) {
    Image2D theta = base;
    for (auto& x : theta.v) x *= e;
    Image2D full = forward_full(theta, cfg);
    Image2D born = forward_born(theta, cfg);
    double worst = 0.0;
    for (size_t i = 0; i < full.v.size(); ++i)
      worst = std::max(worst, std::abs(full.v[i] - born.v[i]));
    err.push_back(worst);
  }
  const double slope = oracles::loglog_slope(eps, err);
  CHECK(slope == doctest::Approx(2.0).epsilon(0.05));
}
