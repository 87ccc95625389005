#include "phaseret/optics/fft.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include "phaseret/errors.hpp"
#include "phaseret/parallel.hpp"

namespace phaseret::optics {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

int next_pow2(int n) {
  int m = 1;
  while (m < n) m <<= 1;
  return m;
}

// Power-of-two plan: bit-reversal permutation plus twiddle table.
struct Radix2Plan {
  int n = 0;
  std::vector<int> rev;
  std::vector<cplx> tw;  // tw[j] = exp(-2*pi*i*j/n), j < n/2

  explicit Radix2Plan(int size) : n(size), rev(size) {
    int logn = 0;
    while ((1 << logn) < n) ++logn;
    for (int i = 0; i < n; ++i) {
      int r = 0;
      for (int b = 0; b < logn; ++b)
        if (i & (1 << b)) r |= 1 << (logn - 1 - b);
      rev[i] = r;
    }
    tw.resize(n / 2);
    for (int j = 0; j < n / 2; ++j) {
      double a = -kTwoPi * double(j) / double(n);
      tw[j] = {std::cos(a), std::sin(a)};
    }
  }

  void forward(cplx* x) const {
    for (int i = 0; i < n; ++i)
      if (rev[i] > i) std::swap(x[i], x[rev[i]]);
    for (int len = 2; len <= n; len <<= 1) {
      int half = len >> 1;
      int step = n / len;
      for (int base = 0; base < n; base += len) {
        for (int j = 0; j < half; ++j) {
          cplx w = tw[j * step];
          cplx u = x[base + j];
          cplx t = w * x[base + j + half];
          x[base + j] = u + t;
          x[base + j + half] = u - t;
        }
      }
    }
  }
};

// Bluestein plan for arbitrary n: DFT as a chirp-modulated circular
// convolution carried out at a padded power-of-two size.
struct BluesteinPlan {
  int n = 0;
  int m = 0;  // pow2 >= 2n-1
  std::shared_ptr<const Radix2Plan> inner;
  std::vector<cplx> chirp;     // chirp[k] = exp(-i*pi*k^2/n)
  std::vector<cplx> kern_fft;  // FFT_m of wrapped conj chirp

  BluesteinPlan(int size, std::shared_ptr<const Radix2Plan> pad_plan)
      : n(size), m(pad_plan->n), inner(std::move(pad_plan)) {
    chirp.resize(n);
    for (int k = 0; k < n; ++k) {
      // reduce k^2 mod 2n first so the angle stays small and accurate
      long long q = (static_cast<long long>(k) * k) % (2LL * n);
      double a = -3.1415926535897932384626433832795 * double(q) / double(n);
      chirp[k] = {std::cos(a), std::sin(a)};
    }
    std::vector<cplx> b(m, cplx{0.0, 0.0});
    for (int k = 0; k < n; ++k) {
      cplx c = std::conj(chirp[k]);
      b[k] = c;
      if (k != 0) b[m - k] = c;
    }
    inner->forward(b.data());
    kern_fft = std::move(b);
  }

  void forward(cplx* x) const {
    std::vector<cplx> a(m, cplx{0.0, 0.0});
    for (int k = 0; k < n; ++k) a[k] = x[k] * chirp[k];
    inner->forward(a.data());
    for (int k = 0; k < m; ++k) a[k] *= kern_fft[k];
    // inverse FFT of length m via conjugation
    for (auto& z : a) z = std::conj(z);
    inner->forward(a.data());
    double inv_m = 1.0 / double(m);
    for (int k = 0; k < n; ++k) x[k] = std::conj(a[k]) * inv_m * chirp[k];
  }
};

struct Plan {
  std::shared_ptr<const Radix2Plan> radix2;     // set when n is a power of two
  std::shared_ptr<const BluesteinPlan> blue;    // otherwise

  void forward(cplx* x) const {
    if (radix2)
      radix2->forward(x);
    else
      blue->forward(x);
  }
};

std::shared_ptr<const Plan> get_plan(int n) {
  static std::mutex mu;
  static std::map<int, std::shared_ptr<const Plan>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  auto plan = std::make_shared<Plan>();
  if (is_pow2(n)) {
    plan->radix2 = std::make_shared<Radix2Plan>(n);
  } else {
    int m = next_pow2(2 * n - 1);
    std::shared_ptr<const Radix2Plan> pad;
    auto pit = cache.find(m);
    if (pit != cache.end() && pit->second->radix2) {
      pad = pit->second->radix2;
    } else {
      pad = std::make_shared<Radix2Plan>(m);
      auto pad_plan = std::make_shared<Plan>();
      pad_plan->radix2 = pad;
      cache.emplace(m, pad_plan);
    }
    plan->blue = std::make_shared<BluesteinPlan>(n, pad);
  }
  cache.emplace(n, plan);
  return plan;
}

}  // namespace

void fft_1d(cplx* data, int n) {
  if (n <= 0) throw DimensionError("fft_1d: size must be positive");
  if (n == 1) return;
  get_plan(n)->forward(data);
}

void ifft_1d(cplx* data, int n) {
  if (n <= 0) throw DimensionError("ifft_1d: size must be positive");
  for (int i = 0; i < n; ++i) data[i] = std::conj(data[i]);
  fft_1d(data, n);
  double inv = 1.0 / double(n);
  for (int i = 0; i < n; ++i) data[i] = std::conj(data[i]) * inv;
}

namespace {

enum class Dir { forward, inverse };

ComplexField2D transform2(const ComplexField2D& in, Dir dir) {
  if (in.height <= 0 || in.width <= 0)
    throw DimensionError("fft2: empty field");
  const int h = in.height, w = in.width;
  ComplexField2D out = in;

  auto plan_w = get_plan(w);
  auto plan_h = get_plan(h);

  if (dir == Dir::inverse)
    for (auto& z : out.v) z = std::conj(z);

  parallel_for(h, [&](std::int64_t r0, std::int64_t r1) {
    for (std::int64_t r = r0; r < r1; ++r)
      if (w > 1) plan_w->forward(out.v.data() + r * w);
  });

  parallel_for(w, [&](std::int64_t c0, std::int64_t c1) {
    std::vector<cplx> col(h);
    for (std::int64_t c = c0; c < c1; ++c) {
      for (int r = 0; r < h; ++r) col[r] = out.v[size_t(r) * w + c];
      if (h > 1) plan_h->forward(col.data());
      for (int r = 0; r < h; ++r) out.v[size_t(r) * w + c] = col[r];
    }
  });

  if (dir == Dir::inverse) {
    double inv = 1.0 / (double(h) * double(w));
    for (auto& z : out.v) z = std::conj(z) * inv;
  }
  return out;
}

}  // namespace

ComplexField2D fft2(const ComplexField2D& field) {
  return transform2(field, Dir::forward);
}

ComplexField2D ifft2(const ComplexField2D& field) {
  return transform2(field, Dir::inverse);
}

}  // namespace phaseret::optics
