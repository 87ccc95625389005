// Independent reference implementations used as test oracles. Everything here
// is deliberately naive (quadruple-loop correlation, O(N^4) DFT, central
// finite differences) and stays independent of the library code paths it
// checks.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "phaseret/ad/tensor.hpp"
#include "phaseret/optics/field.hpp"
#include "phaseret/rng.hpp"

namespace oracles {

// quadruple-loop cross-correlation with zero padding
inline std::vector<double> naive_conv2d(const std::vector<double>& x, int ci, int h,
                                        int w, const std::vector<double>& wt, int co,
                                        int k, const std::vector<double>& bias,
                                        int stride, int pad, int& ho, int& wo) {
  ho = (h + 2 * pad - k) / stride + 1;
  wo = (w + 2 * pad - k) / stride + 1;
  std::vector<double> out(size_t(co) * ho * wo, 0.0);
  for (int o = 0; o < co; ++o)
    for (int y = 0; y < ho; ++y)
      for (int xo = 0; xo < wo; ++xo) {
        double acc = bias.empty() ? 0.0 : bias[o];
        for (int c = 0; c < ci; ++c)
          for (int ky = 0; ky < k; ++ky)
            for (int kx = 0; kx < k; ++kx) {
              const int iy = y * stride - pad + ky;
              const int ix = xo * stride - pad + kx;
              if (iy < 0 || iy >= h || ix < 0 || ix >= w) continue;
              acc += x[(size_t(c) * h + iy) * w + ix] *
                     wt[((size_t(o) * ci + c) * k + ky) * k + kx];
            }
        out[(size_t(o) * ho + y) * wo + xo] = acc;
      }
  return out;
}

// direct O(N^4) double-sum DFT, unnormalized forward
inline phaseret::optics::ComplexField2D naive_dft2(
    const phaseret::optics::ComplexField2D& in) {
  using phaseret::optics::cplx;
  const int h = in.height, w = in.width;
  phaseret::optics::ComplexField2D out(h, w);
  const double two_pi = 6.283185307179586476925286766559;
  for (int u = 0; u < h; ++u)
    for (int v = 0; v < w; ++v) {
      cplx acc{0.0, 0.0};
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          const double ang = -two_pi * (double(u) * y / h + double(v) * x / w);
          acc += in.at(y, x) * cplx{std::cos(ang), std::sin(ang)};
        }
      out.at(u, v) = acc;
    }
  return out;
}

inline double rel_err(double a, double b, double floor = 1e-6) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

struct FdReport {
  double median_rel = 0.0;
  double max_rel = 0.0;
  int checked = 0;
};

// central finite differences on every coordinate of `param`; `loss` must
// re-evaluate the full forward pass from current parameter values.
inline FdReport finite_difference_check(
    phaseret::ad::Tensor param, const std::function<double()>& loss,
    const std::vector<double>& analytic, double h = 1e-5,
    const std::function<bool(std::size_t)>& exclude = {}) {
  auto& w = param.mutable_values();
  std::vector<double> rels;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (exclude && exclude(i)) continue;
    const double keep = w[i];
    w[i] = keep + h;
    const double lp = loss();
    w[i] = keep - h;
    const double lm = loss();
    w[i] = keep;
    const double fd = (lp - lm) / (2.0 * h);
    rels.push_back(rel_err(fd, analytic[i]));
  }
  FdReport rep;
  rep.checked = int(rels.size());
  if (rels.empty()) return rep;
  std::sort(rels.begin(), rels.end());
  rep.median_rel = rels[rels.size() / 2];
  rep.max_rel = rels.back();
  return rep;
}

inline phaseret::ad::Tensor random_tensor(phaseret::ad::Shape shape,
                                          phaseret::Rng& rng, bool requires_grad,
                                          double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(phaseret::ad::shape_size(shape));
  for (auto& x : v) x = rng.uniform(lo, hi);
  return phaseret::ad::Tensor::from_values(std::move(shape), std::move(v),
                                           requires_grad);
}

inline phaseret::optics::ComplexField2D random_field(int h, int w,
                                                     phaseret::Rng& rng) {
  phaseret::optics::ComplexField2D f(h, w);
  for (auto& z : f.v) z = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
  return f;
}

// least-squares slope of log(err) vs log(x)
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const int n = int(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace oracles
