#include "phaseret/ad/ops.hpp"

#include <algorithm>
#include <cmath>

#include "phaseret/parallel.hpp"

namespace phaseret::ad {

namespace {

using detail::Node;

// Registers `out` on the tape when gradients are enabled and some input needs
// them. `backward` follows the convention: ensure_grad() on a parent before
// accumulating into it.
Tensor finish_op(Shape out_shape, std::vector<double> out_values,
                 std::vector<Tensor> inputs,
                 std::function<void(Node&)> backward, const char* name) {
  check_finite(out_values, name);
  auto node = detail::make_node(std::move(out_shape), std::move(out_values), false, name);
  bool track = grad_enabled();
  bool any = false;
  if (track) {
    for (const auto& in : inputs) any = any || in.needs_grad();
  }
  if (track && any) {
    node->needs_grad = true;
    node->parents.reserve(inputs.size());
    for (const auto& in : inputs) node->parents.push_back(in.node_ptr());
    node->backward = std::move(backward);
  }
  return Tensor::wrap(std::move(node));
}

void expect_rank3(const Tensor& t, const char* op) {
  if (t.rank() != 3)
    throw DimensionError(std::string(op) + ": expected [C,H,W] tensor, got " +
                         shape_str(t.shape()));
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias,
              int stride, int padding) {
  expect_rank3(input, "conv2d");
  if (weight.rank() != 4) throw DimensionError("conv2d: weight must be [Co,Ci,k,k]");
  if (bias.rank() != 1) throw DimensionError("conv2d: bias must be [Co]");
  const int ci = input.dim(0), h = input.dim(1), w = input.dim(2);
  const int co = weight.dim(0), k = weight.dim(2);
  if (weight.dim(1) != ci)
    throw DimensionError("conv2d: weight input channels " + std::to_string(weight.dim(1)) +
                         " do not match input " + std::to_string(ci));
  if (weight.dim(3) != k) throw DimensionError("conv2d: kernel must be square");
  if (bias.dim(0) != co) throw DimensionError("conv2d: bias size mismatch");
  if (k % 2 == 0) throw ConfigError("conv2d: kernel size must be odd");
  if (stride < 1) throw ConfigError("conv2d: stride must be >= 1");
  if (padding < 0) throw ConfigError("conv2d: padding must be >= 0");
  if ((h + 2 * padding - k) % stride != 0 || (w + 2 * padding - k) % stride != 0)
    throw ConfigError("conv2d: output extent is not an integer");
  const int ho = (h + 2 * padding - k) / stride + 1;
  const int wo = (w + 2 * padding - k) / stride + 1;
  if (ho < 1 || wo < 1) throw ConfigError("conv2d: empty output");

  const double* x = input.values().data();
  const double* wt = weight.values().data();
  const double* b = bias.values().data();
  std::vector<double> out(size_t(co) * ho * wo);

  auto xat = [=](int c, int y, int xx) { return x[(size_t(c) * h + y) * w + xx]; };
  auto wat = [=](int o, int c, int ky, int kx) {
    return wt[((size_t(o) * ci + c) * k + ky) * k + kx];
  };

  parallel_for(std::int64_t(co) * ho, [&](std::int64_t r0, std::int64_t r1) {
    for (std::int64_t r = r0; r < r1; ++r) {
      const int o = int(r / ho);
      const int y = int(r % ho);
      double* orow = out.data() + (size_t(o) * ho + y) * wo;
      for (int xo = 0; xo < wo; ++xo) {
        double acc = b[o];
        for (int c = 0; c < ci; ++c) {
          for (int ky = 0; ky < k; ++ky) {
            const int iy = y * stride - padding + ky;
            if (iy < 0 || iy >= h) continue;
            for (int kx = 0; kx < k; ++kx) {
              const int ix = xo * stride - padding + kx;
              if (ix < 0 || ix >= w) continue;
              acc += xat(c, iy, ix) * wat(o, c, ky, kx);
            }
          }
        }
        orow[xo] = acc;
      }
    }
  });

  auto backward = [=](Node& node) {
    const auto& g = node.grad;
    auto& in_node = *node.parents[0];
    auto& w_node = *node.parents[1];
    auto& b_node = *node.parents[2];
    auto gat = [&](int o, int y, int xx) { return g[(size_t(o) * ho + y) * wo + xx]; };

    if (in_node.needs_grad) {
      in_node.ensure_grad();
      double* gi = in_node.grad.data();
      parallel_for(std::int64_t(ci) * h, [&](std::int64_t r0, std::int64_t r1) {
        for (std::int64_t r = r0; r < r1; ++r) {
          const int c = int(r / h);
          const int iy = int(r % h);
          for (int ix = 0; ix < w; ++ix) {
            double acc = 0.0;
            for (int o = 0; o < co; ++o) {
              for (int ky = 0; ky < k; ++ky) {
                const int ty = iy + padding - ky;
                if (ty < 0 || ty % stride != 0) continue;
                const int y = ty / stride;
                if (y >= ho) continue;
                for (int kx = 0; kx < k; ++kx) {
                  const int tx = ix + padding - kx;
                  if (tx < 0 || tx % stride != 0) continue;
                  const int xo = tx / stride;
                  if (xo >= wo) continue;
                  acc += gat(o, y, xo) * wat(o, c, ky, kx);
                }
              }
            }
            gi[(size_t(c) * h + iy) * w + ix] += acc;
          }
        }
      });
    }
    if (w_node.needs_grad) {
      w_node.ensure_grad();
      double* gw = w_node.grad.data();
      parallel_for(std::int64_t(co) * ci, [&](std::int64_t r0, std::int64_t r1) {
        for (std::int64_t r = r0; r < r1; ++r) {
          const int o = int(r / ci);
          const int c = int(r % ci);
          for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
              double acc = 0.0;
              for (int y = 0; y < ho; ++y) {
                const int iy = y * stride - padding + ky;
                if (iy < 0 || iy >= h) continue;
                for (int xo = 0; xo < wo; ++xo) {
                  const int ix = xo * stride - padding + kx;
                  if (ix < 0 || ix >= w) continue;
                  acc += gat(o, y, xo) * xat(c, iy, ix);
                }
              }
              gw[((size_t(o) * ci + c) * k + ky) * k + kx] += acc;
            }
          }
        }
      });
    }
    if (b_node.needs_grad) {
      b_node.ensure_grad();
      for (int o = 0; o < co; ++o) {
        double acc = 0.0;
        for (int y = 0; y < ho; ++y)
          for (int xo = 0; xo < wo; ++xo) acc += gat(o, y, xo);
        b_node.grad[o] += acc;
      }
    }
  };

  return finish_op({co, ho, wo}, std::move(out), {input, weight, bias},
                   std::move(backward), "conv2d");
}

Tensor conv2d_transpose(const Tensor& input, const Tensor& weight, int stride,
                        int padding) {
  expect_rank3(input, "conv2d_transpose");
  if (weight.rank() != 4)
    throw DimensionError("conv2d_transpose: weight must be [Ca,Cb,k,k]");
  const int ca = input.dim(0), h = input.dim(1), w = input.dim(2);
  const int cb = weight.dim(1), k = weight.dim(2);
  if (weight.dim(0) != ca)
    throw DimensionError("conv2d_transpose: weight channels do not match input");
  if (weight.dim(3) != k) throw DimensionError("conv2d_transpose: kernel must be square");
  if (stride < 1) throw ConfigError("conv2d_transpose: stride must be >= 1");
  if (padding < 0) throw ConfigError("conv2d_transpose: padding must be >= 0");
  const int ho = (h - 1) * stride - 2 * padding + k;
  const int wo = (w - 1) * stride - 2 * padding + k;
  if (ho < 1 || wo < 1) throw ConfigError("conv2d_transpose: empty output");

  const double* x = input.values().data();
  const double* wt = weight.values().data();
  std::vector<double> out(size_t(cb) * ho * wo);

  auto xat = [=](int c, int y, int xx) { return x[(size_t(c) * h + y) * w + xx]; };
  auto wat = [=](int a, int bch, int ky, int kx) {
    return wt[((size_t(a) * cb + bch) * k + ky) * k + kx];
  };

  parallel_for(std::int64_t(cb) * ho, [&](std::int64_t r0, std::int64_t r1) {
    for (std::int64_t r = r0; r < r1; ++r) {
      const int o = int(r / ho);
      const int oy = int(r % ho);
      double* orow = out.data() + (size_t(o) * ho + oy) * wo;
      for (int ox = 0; ox < wo; ++ox) {
        double acc = 0.0;
        for (int a = 0; a < ca; ++a) {
          for (int ky = 0; ky < k; ++ky) {
            const int ty = oy + padding - ky;
            if (ty < 0 || ty % stride != 0) continue;
            const int y = ty / stride;
            if (y >= h) continue;
            for (int kx = 0; kx < k; ++kx) {
              const int tx = ox + padding - kx;
              if (tx < 0 || tx % stride != 0) continue;
              const int xx = tx / stride;
              if (xx >= w) continue;
              acc += xat(a, y, xx) * wat(a, o, ky, kx);
            }
          }
        }
        orow[ox] = acc;
      }
    }
  });

  auto backward = [=](Node& node) {
    const auto& g = node.grad;
    auto& in_node = *node.parents[0];
    auto& w_node = *node.parents[1];
    auto gat = [&](int o, int y, int xx) { return g[(size_t(o) * ho + y) * wo + xx]; };

    if (in_node.needs_grad) {
      in_node.ensure_grad();
      double* gi = in_node.grad.data();
      parallel_for(std::int64_t(ca) * h, [&](std::int64_t r0, std::int64_t r1) {
        for (std::int64_t r = r0; r < r1; ++r) {
          const int a = int(r / h);
          const int y = int(r % h);
          for (int xx = 0; xx < w; ++xx) {
            double acc = 0.0;
            for (int o = 0; o < cb; ++o) {
              for (int ky = 0; ky < k; ++ky) {
                const int oy = y * stride - padding + ky;
                if (oy < 0 || oy >= ho) continue;
                for (int kx = 0; kx < k; ++kx) {
                  const int ox = xx * stride - padding + kx;
                  if (ox < 0 || ox >= wo) continue;
                  acc += gat(o, oy, ox) * wat(a, o, ky, kx);
                }
              }
            }
            gi[(size_t(a) * h + y) * w + xx] += acc;
          }
        }
      });
    }
    if (w_node.needs_grad) {
      w_node.ensure_grad();
      double* gw = w_node.grad.data();
      parallel_for(std::int64_t(ca) * cb, [&](std::int64_t r0, std::int64_t r1) {
        for (std::int64_t r = r0; r < r1; ++r) {
          const int a = int(r / cb);
          const int o = int(r % cb);
          for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
              double acc = 0.0;
              for (int y = 0; y < h; ++y) {
                const int oy = y * stride - padding + ky;
                if (oy < 0 || oy >= ho) continue;
                for (int xx = 0; xx < w; ++xx) {
                  const int ox = xx * stride - padding + kx;
                  if (ox < 0 || ox >= wo) continue;
                  acc += xat(a, y, xx) * gat(o, oy, ox);
                }
              }
              gw[((size_t(a) * cb + o) * k + ky) * k + kx] += acc;
            }
          }
        }
      });
    }
  };

  return finish_op({cb, ho, wo}, std::move(out), {input, weight},
                   std::move(backward), "conv2d_transpose");
}

Tensor maxpool2d(const Tensor& input, int window, int stride) {
  expect_rank3(input, "maxpool2d");
  if (window < 1 || stride < 1) throw ConfigError("maxpool2d: window/stride must be >= 1");
  const int c = input.dim(0), h = input.dim(1), w = input.dim(2);
  if ((h - window) % stride != 0 || (w - window) % stride != 0)
    throw ConfigError("maxpool2d: extents not divisible after windowing");
  const int ho = (h - window) / stride + 1;
  const int wo = (w - window) / stride + 1;

  const double* x = input.values().data();
  std::vector<double> out(size_t(c) * ho * wo);
  auto argmax = std::make_shared<std::vector<std::int64_t>>(out.size());

  for (int ch = 0; ch < c; ++ch) {
    for (int y = 0; y < ho; ++y) {
      for (int xo = 0; xo < wo; ++xo) {
        double best = -1e300;
        std::int64_t best_idx = -1;
        for (int ky = 0; ky < window; ++ky) {
          const int iy = y * stride + ky;
          for (int kx = 0; kx < window; ++kx) {
            const int ix = xo * stride + kx;
            const std::int64_t idx = (std::int64_t(ch) * h + iy) * w + ix;
            if (x[idx] > best) {  // strict '>' keeps the first occurrence on ties
              best = x[idx];
              best_idx = idx;
            }
          }
        }
        const size_t oidx = (size_t(ch) * ho + y) * wo + xo;
        out[oidx] = best;
        (*argmax)[oidx] = best_idx;
      }
    }
  }

  auto backward = [argmax](Node& node) {
    auto& in_node = *node.parents[0];
    if (!in_node.needs_grad) return;
    in_node.ensure_grad();
    for (size_t i = 0; i < node.grad.size(); ++i)
      in_node.grad[size_t((*argmax)[i])] += node.grad[i];
  };

  return finish_op({c, ho, wo}, std::move(out), {input}, std::move(backward),
                   "maxpool2d");
}

Tensor batchnorm2d(const Tensor& input, const Tensor& gamma, const Tensor& beta,
                   double eps) {
  expect_rank3(input, "batchnorm2d");
  const int c = input.dim(0), h = input.dim(1), w = input.dim(2);
  if (gamma.rank() != 1 || gamma.dim(0) != c)
    throw DimensionError("batchnorm2d: gamma must be [C]");
  if (beta.rank() != 1 || beta.dim(0) != c)
    throw DimensionError("batchnorm2d: beta must be [C]");

  const double* x = input.values().data();
  const double* gm = gamma.values().data();
  const double* bt = beta.values().data();
  const std::int64_t n = std::int64_t(h) * w;

  std::vector<double> out(size_t(c) * n);
  auto xhat = std::make_shared<std::vector<double>>(out.size());
  auto inv_std = std::make_shared<std::vector<double>>(c);

  for (int ch = 0; ch < c; ++ch) {
    const double* xc = x + size_t(ch) * n;
    double mean = 0.0;
    for (std::int64_t i = 0; i < n; ++i) mean += xc[i];
    mean /= double(n);
    double var = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      const double d = xc[i] - mean;
      var += d * d;
    }
    var /= double(n);
    const double is = 1.0 / std::sqrt(var + eps);
    (*inv_std)[ch] = is;
    double* oc = out.data() + size_t(ch) * n;
    double* hc = xhat->data() + size_t(ch) * n;
    for (std::int64_t i = 0; i < n; ++i) {
      const double xh = (xc[i] - mean) * is;
      hc[i] = xh;
      oc[i] = gm[ch] * xh + bt[ch];
    }
  }

  auto backward = [=](Node& node) {
    const auto& g = node.grad;
    auto& in_node = *node.parents[0];
    auto& gm_node = *node.parents[1];
    auto& bt_node = *node.parents[2];

    for (int ch = 0; ch < c; ++ch) {
      const double* gc = g.data() + size_t(ch) * n;
      const double* hc = xhat->data() + size_t(ch) * n;
      double sum_g = 0.0, sum_gh = 0.0;
      for (std::int64_t i = 0; i < n; ++i) {
        sum_g += gc[i];
        sum_gh += gc[i] * hc[i];
      }
      if (bt_node.needs_grad) {
        bt_node.ensure_grad();
        bt_node.grad[ch] += sum_g;
      }
      if (gm_node.needs_grad) {
        gm_node.ensure_grad();
        gm_node.grad[ch] += sum_gh;
      }
      if (in_node.needs_grad) {
        in_node.ensure_grad();
        double* gi = in_node.grad.data() + size_t(ch) * n;
        const double scale = gm[ch] * (*inv_std)[ch];
        const double mg = sum_g / double(n);
        const double mgh = sum_gh / double(n);
        for (std::int64_t i = 0; i < n; ++i)
          gi[i] += scale * (gc[i] - mg - hc[i] * mgh);
      }
    }
  };

  return finish_op({c, h, w}, std::move(out), {input, gamma, beta},
                   std::move(backward), "batchnorm2d");
}

Tensor relu(const Tensor& input) {
  const auto& x = input.values();
  std::vector<double> out(x.size());
  for (size_t i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;

  auto backward = [](Node& node) {
    auto& in_node = *node.parents[0];
    if (!in_node.needs_grad) return;
    in_node.ensure_grad();
    for (size_t i = 0; i < node.grad.size(); ++i)
      if (in_node.values[i] > 0.0) in_node.grad[i] += node.grad[i];
  };

  return finish_op(input.shape(), std::move(out), {input}, std::move(backward), "relu");
}

Tensor sigmoid(const Tensor& input) {
  const auto& x = input.values();
  std::vector<double> out(x.size());
  for (size_t i = 0; i < x.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-x[i]));

  auto backward = [](Node& node) {
    auto& in_node = *node.parents[0];
    if (!in_node.needs_grad) return;
    in_node.ensure_grad();
    for (size_t i = 0; i < node.grad.size(); ++i) {
      const double y = node.values[i];
      in_node.grad[i] += node.grad[i] * y * (1.0 - y);
    }
  };

  return finish_op(input.shape(), std::move(out), {input}, std::move(backward),
                   "sigmoid");
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape())
    throw DimensionError("add: shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
  const auto& av = a.values();
  const auto& bv = b.values();
  std::vector<double> out(av.size());
  for (size_t i = 0; i < av.size(); ++i) out[i] = av[i] + bv[i];

  auto backward = [](Node& node) {
    for (int p = 0; p < 2; ++p) {
      auto& pn = *node.parents[p];
      if (!pn.needs_grad) continue;
      pn.ensure_grad();
      for (size_t i = 0; i < node.grad.size(); ++i) pn.grad[i] += node.grad[i];
    }
  };

  return finish_op(a.shape(), std::move(out), {a, b}, std::move(backward), "add");
}

Tensor mul_scalar(const Tensor& input, double s) {
  if (!std::isfinite(s)) throw NumericError("mul_scalar: non-finite scalar");
  const auto& x = input.values();
  std::vector<double> out(x.size());
  for (size_t i = 0; i < x.size(); ++i) out[i] = x[i] * s;

  auto backward = [s](Node& node) {
    auto& in_node = *node.parents[0];
    if (!in_node.needs_grad) return;
    in_node.ensure_grad();
    for (size_t i = 0; i < node.grad.size(); ++i) in_node.grad[i] += node.grad[i] * s;
  };

  return finish_op(input.shape(), std::move(out), {input}, std::move(backward),
                   "mul_scalar");
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  expect_rank3(a, "concat_channels");
  expect_rank3(b, "concat_channels");
  if (a.dim(1) != b.dim(1) || a.dim(2) != b.dim(2))
    throw DimensionError("concat_channels: spatial dims differ");
  const int ca = a.dim(0), cb = b.dim(0), h = a.dim(1), w = a.dim(2);
  const auto& av = a.values();
  const auto& bv = b.values();
  std::vector<double> out;
  out.reserve(av.size() + bv.size());
  out.insert(out.end(), av.begin(), av.end());
  out.insert(out.end(), bv.begin(), bv.end());

  const size_t na = av.size();
  auto backward = [na](Node& node) {
    auto& an = *node.parents[0];
    auto& bn = *node.parents[1];
    if (an.needs_grad) {
      an.ensure_grad();
      for (size_t i = 0; i < na; ++i) an.grad[i] += node.grad[i];
    }
    if (bn.needs_grad) {
      bn.ensure_grad();
      for (size_t i = na; i < node.grad.size(); ++i) bn.grad[i - na] += node.grad[i];
    }
  };

  return finish_op({ca + cb, h, w}, std::move(out), {a, b}, std::move(backward),
                   "concat_channels");
}

Tensor upsample_nearest(const Tensor& input, int factor) {
  expect_rank3(input, "upsample_nearest");
  if (factor < 1) throw ConfigError("upsample_nearest: factor must be >= 1");
  const int c = input.dim(0), h = input.dim(1), w = input.dim(2);
  const int ho = h * factor, wo = w * factor;
  const double* x = input.values().data();
  std::vector<double> out(size_t(c) * ho * wo);
  for (int ch = 0; ch < c; ++ch)
    for (int y = 0; y < ho; ++y)
      for (int xo = 0; xo < wo; ++xo)
        out[(size_t(ch) * ho + y) * wo + xo] =
            x[(size_t(ch) * h + y / factor) * w + xo / factor];

  auto backward = [=](Node& node) {
    auto& in_node = *node.parents[0];
    if (!in_node.needs_grad) return;
    in_node.ensure_grad();
    for (int ch = 0; ch < c; ++ch)
      for (int y = 0; y < ho; ++y)
        for (int xo = 0; xo < wo; ++xo)
          in_node.grad[(size_t(ch) * h + y / factor) * w + xo / factor] +=
              node.grad[(size_t(ch) * ho + y) * wo + xo];
  };

  return finish_op({c, ho, wo}, std::move(out), {input}, std::move(backward),
                   "upsample_nearest");
}

Tensor mse_loss(const Tensor& pred, const Tensor& target) {
  if (pred.shape() != target.shape())
    throw DimensionError("mse_loss: shape mismatch " + shape_str(pred.shape()) +
                         " vs " + shape_str(target.shape()));
  const auto& p = pred.values();
  const auto& t = target.values();
  const double n = double(p.size());
  double acc = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    const double d = p[i] - t[i];
    acc += d * d;
  }

  auto backward = [n](Node& node) {
    auto& pn = *node.parents[0];
    auto& tn = *node.parents[1];
    const double g0 = node.grad[0];
    const double scale = 2.0 * g0 / n;
    if (pn.needs_grad) {
      pn.ensure_grad();
      for (size_t i = 0; i < pn.values.size(); ++i)
        pn.grad[i] += scale * (pn.values[i] - tn.values[i]);
    }
    if (tn.needs_grad) {
      tn.ensure_grad();
      for (size_t i = 0; i < tn.values.size(); ++i)
        tn.grad[i] -= scale * (pn.values[i] - tn.values[i]);
    }
  };

  return finish_op({1}, {acc / n}, {pred, target}, std::move(backward), "mse_loss");
}

Tensor sum(const Tensor& input) {
  const auto& x = input.values();
  double acc = 0.0;
  for (double v : x) acc += v;

  auto backward = [](Node& node) {
    auto& in_node = *node.parents[0];
    if (!in_node.needs_grad) return;
    in_node.ensure_grad();
    const double g0 = node.grad[0];
    for (size_t i = 0; i < in_node.grad.size(); ++i) in_node.grad[i] += g0;
  };

  return finish_op({1}, {acc}, {input}, std::move(backward), "sum");
}

Tensor custom_unary(const Tensor& input, Shape out_shape,
                    std::vector<double> out_values,
                    std::function<std::vector<double>(const std::vector<double>&)> grad_fn,
                    const char* name) {
  auto backward = [grad_fn = std::move(grad_fn)](Node& node) {
    auto& in_node = *node.parents[0];
    if (!in_node.needs_grad) return;
    std::vector<double> gi = grad_fn(node.grad);
    if (gi.size() != in_node.values.size())
      throw DimensionError("custom_unary: gradient size mismatch");
    in_node.ensure_grad();
    for (size_t i = 0; i < gi.size(); ++i) in_node.grad[i] += gi[i];
  };

  return finish_op(std::move(out_shape), std::move(out_values), {input},
                   std::move(backward), name);
}

}  // namespace phaseret::ad
