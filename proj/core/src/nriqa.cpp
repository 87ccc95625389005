#include "phaseret/metrics/nriqa.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <mutex>
#include <ostream>

#include "phaseret/metrics/linalg.hpp"
#include "phaseret/phantom.hpp"

namespace phaseret::metrics {

namespace {

constexpr int kDim = 36;
constexpr double kFallbackScore = 100.0;

// ---- local Gaussian moments -------------------------------------------------

std::vector<double> gaussian_kernel7() {
  std::vector<double> k(7);
  const double sigma = 7.0 / 6.0;
  double sum = 0.0;
  for (int i = 0; i < 7; ++i) {
    const double x = double(i - 3);
    k[i] = std::exp(-x * x / (2.0 * sigma * sigma));
    sum += k[i];
  }
  for (double& x : k) x /= sum;
  return k;
}

// separable 7x7 blur with replicate border
Image2D gauss7(const Image2D& img) {
  static const std::vector<double> k = gaussian_kernel7();
  const int h = img.height, w = img.width;
  Image2D tmp(h, w), out(h, w);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      double acc = 0.0;
      for (int t = -3; t <= 3; ++t) {
        const int jj = std::clamp(j + t, 0, w - 1);
        acc += k[t + 3] * img.at(i, jj);
      }
      tmp.at(i, j) = acc;
    }
  }
  for (int j = 0; j < w; ++j) {
    for (int i = 0; i < h; ++i) {
      double acc = 0.0;
      for (int t = -3; t <= 3; ++t) {
        const int ii = std::clamp(i + t, 0, h - 1);
        acc += k[t + 3] * tmp.at(ii, j);
      }
      out.at(i, j) = acc;
    }
  }
  return out;
}

Image2D local_sigma(const Image2D& img, const Image2D& mu) {
  Image2D sq(img.height, img.width);
  for (size_t i = 0; i < img.v.size(); ++i) sq.v[i] = img.v[i] * img.v[i];
  Image2D musq = gauss7(sq);
  Image2D sig(img.height, img.width);
  for (size_t i = 0; i < sig.v.size(); ++i)
    sig.v[i] = std::sqrt(std::max(0.0, musq.v[i] - mu.v[i] * mu.v[i]));
  return sig;
}

Image2D half_scale(const Image2D& img) {
  const int h = img.height / 2, w = img.width / 2;
  Image2D out(h, w);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j)
      out.at(i, j) = 0.25 * (img.at(2 * i, 2 * j) + img.at(2 * i, 2 * j + 1) +
                             img.at(2 * i + 1, 2 * j) + img.at(2 * i + 1, 2 * j + 1));
  return out;
}

// ---- GGD / AGGD moment-matching fits ---------------------------------------

// r_gam(alpha) = Gamma(2/a)^2 / (Gamma(1/a) Gamma(3/a)), tabulated over
// alpha in [0.2, 10] at 1e-3 resolution.
struct GammaTable {
  std::vector<double> alpha;
  std::vector<double> ratio;
  GammaTable() {
    const double lo = 0.2, hi = 10.0, step = 1e-3;
    const int n = int((hi - lo) / step) + 1;
    alpha.resize(n);
    ratio.resize(n);
    for (int i = 0; i < n; ++i) {
      const double a = lo + i * step;
      alpha[i] = a;
      ratio[i] = std::tgamma(2.0 / a) * std::tgamma(2.0 / a) /
                 (std::tgamma(1.0 / a) * std::tgamma(3.0 / a));
    }
  }
  double best_alpha(double target) const {
    int best = 0;
    double bd = std::abs(ratio[0] - target);
    for (int i = 1; i < int(alpha.size()); ++i) {
      const double d = std::abs(ratio[i] - target);
      if (d < bd) {
        bd = d;
        best = i;
      }
    }
    return alpha[best];
  }
};

const GammaTable& gamma_table() {
  static GammaTable tab;
  return tab;
}

// symmetric generalized Gaussian: returns (shape, variance)
std::pair<double, double> ggd_fit(const std::vector<double>& x) {
  double abs_sum = 0.0, sq_sum = 0.0;
  for (double v : x) {
    abs_sum += std::abs(v);
    sq_sum += v * v;
  }
  const double n = double(x.size());
  const double var = sq_sum / n;
  if (var < 1e-24) return {2.0, 0.0};  // degenerate: flat input
  const double rho = (abs_sum / n) * (abs_sum / n) / var;
  return {gamma_table().best_alpha(rho), var};
}

// asymmetric GGD: returns (shape, mean, left variance, right variance)
std::array<double, 4> aggd_fit(const std::vector<double>& x) {
  double neg_sq = 0.0, pos_sq = 0.0, abs_sum = 0.0;
  long long neg_n = 0, pos_n = 0;
  for (double v : x) {
    if (v < 0.0) {
      neg_sq += v * v;
      ++neg_n;
      abs_sum -= v;
    } else if (v > 0.0) {
      pos_sq += v * v;
      ++pos_n;
      abs_sum += v;
    }
  }
  const double n = double(x.size());
  if (neg_n == 0 || pos_n == 0 || (neg_sq + pos_sq) < 1e-24)
    return {2.0, 0.0, 0.0, 0.0};

  const double l_sigma = std::sqrt(neg_sq / double(neg_n));
  const double r_sigma = std::sqrt(pos_sq / double(pos_n));
  const double gamma_hat = l_sigma / r_sigma;
  const double rhat = (abs_sum / n) * (abs_sum / n) / ((neg_sq + pos_sq) / n);
  const double rhat_norm = rhat * (gamma_hat * gamma_hat * gamma_hat + 1.0) *
                           (gamma_hat + 1.0) /
                           ((gamma_hat * gamma_hat + 1.0) * (gamma_hat * gamma_hat + 1.0));
  const double a = gamma_table().best_alpha(rhat_norm);
  const double mean = (r_sigma - l_sigma) * (std::tgamma(2.0 / a) / std::tgamma(1.0 / a)) *
                      std::sqrt(std::tgamma(1.0 / a) / std::tgamma(3.0 / a));
  return {a, mean, l_sigma * l_sigma, r_sigma * r_sigma};
}

// 18 features of one scale: GGD(2) + 4 orientation AGGDs(4 each)
void scale_features(const Image2D& img, double* out, bool* degenerate) {
  Image2D m = mscn(img);
  auto [shape, var] = ggd_fit(m.v);
  if (var == 0.0 && degenerate) *degenerate = true;
  out[0] = shape;
  out[1] = var;

  const int shifts[4][2] = {{0, 1}, {1, 0}, {1, 1}, {-1, 1}};
  for (int s = 0; s < 4; ++s) {
    const int di = shifts[s][0], dj = shifts[s][1];
    std::vector<double> prod;
    prod.reserve(m.v.size());
    for (int i = 0; i < m.height; ++i) {
      const int ii = i + di;
      if (ii < 0 || ii >= m.height) continue;
      for (int j = 0; j < m.width; ++j) {
        const int jj = j + dj;
        if (jj < 0 || jj >= m.width) continue;
        prod.push_back(m.at(i, j) * m.at(ii, jj));
      }
    }
    const auto f = aggd_fit(prod);
    out[2 + 4 * s + 0] = f[0];
    out[2 + 4 * s + 1] = f[1];
    out[2 + 4 * s + 2] = f[2];
    out[2 + 4 * s + 3] = f[3];
  }
}

// ---- patch machinery --------------------------------------------------------

Image2D crop(const Image2D& img, int i0, int j0, int ph, int pw) {
  Image2D out(ph, pw);
  for (int i = 0; i < ph; ++i)
    for (int j = 0; j < pw; ++j) out.at(i, j) = img.at(i0 + i, j0 + j);
  return out;
}

struct PatchSet {
  std::vector<NSSFeatures> features;
  bool degenerate = false;
};

PatchSet selected_patch_features(const Image2D& img, int patch) {
  PatchSet set;
  const int h = img.height, w = img.width;
  const int P = std::max(8, std::min({patch, h, w}));
  const int rows = h / P, cols = w / P;

  Image2D mu = gauss7(img);
  Image2D sig = local_sigma(img, mu);

  std::vector<std::pair<int, int>> cells;
  std::vector<double> sharpness;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (int i = 0; i < P; ++i)
        for (int j = 0; j < P; ++j) acc += sig.at(r * P + i, c * P + j);
      cells.push_back({r, c});
      sharpness.push_back(acc / double(P * P));
    }
  }
  if (cells.empty()) {  // image smaller than one patch: use it whole
    NSSFeatures f = brisque_features(img);
    set.degenerate = f.degenerate;
    set.features.push_back(std::move(f));
    return set;
  }

  const double peak = *std::max_element(sharpness.begin(), sharpness.end());
  const double threshold = 0.75 * peak;
  for (size_t idx = 0; idx < cells.size(); ++idx) {
    if (sharpness[idx] < threshold) continue;
    Image2D p = crop(img, cells[idx].first * P, cells[idx].second * P, P, P);
    NSSFeatures f = brisque_features(p);
    set.degenerate = set.degenerate || f.degenerate;
    set.features.push_back(std::move(f));
  }
  return set;
}

void mean_and_cov(const std::vector<NSSFeatures>& rows, std::vector<double>& mean,
                  std::vector<double>& cov) {
  mean.assign(kDim, 0.0);
  cov.assign(size_t(kDim) * kDim, 0.0);
  if (rows.empty()) return;
  const double n = double(rows.size());
  for (const auto& r : rows)
    for (int i = 0; i < kDim; ++i) mean[i] += r.v[i];
  for (double& x : mean) x /= n;
  for (const auto& r : rows) {
    for (int i = 0; i < kDim; ++i) {
      const double di = r.v[i] - mean[i];
      for (int j = i; j < kDim; ++j)
        cov[size_t(i) * kDim + j] += di * (r.v[j] - mean[j]);
    }
  }
  for (int i = 0; i < kDim; ++i)
    for (int j = i; j < kDim; ++j) {
      const double c = cov[size_t(i) * kDim + j] / n;
      cov[size_t(i) * kDim + j] = c;
      cov[size_t(j) * kDim + i] = c;
    }
}

}  // namespace

Image2D mscn(const Image2D& img) {
  if (img.height < 1 || img.width < 1) throw DimensionError("mscn: empty image");
  require_finite(img, "mscn");
  if (max_value(img) - min_value(img) == 0.0)
    return Image2D(img.height, img.width, 0.0);
  Image2D mu = gauss7(img);
  Image2D sig = local_sigma(img, mu);
  Image2D out(img.height, img.width);
  for (size_t i = 0; i < out.v.size(); ++i)
    out.v[i] = (img.v[i] - mu.v[i]) / (sig.v[i] + 1.0);
  return out;
}

NSSFeatures brisque_features(const Image2D& img) {
  if (img.height < 8 || img.width < 8)
    throw DimensionError("brisque_features: image must be at least 8x8");
  require_finite(img, "brisque_features");
  NSSFeatures f;
  scale_features(img, f.v.data(), &f.degenerate);
  scale_features(half_scale(img), f.v.data() + 18, &f.degenerate);
  return f;
}

double brisque_score(const NSSFeatures& features, const MVGModel& model) {
  if (model.dim != kDim || int(model.mean.size()) != kDim)
    throw DimensionError("brisque_score: model dimension mismatch");
  if (features.degenerate) return kFallbackScore;
  // relative Tikhonov floor keeps the inverse stable for small corpora
  double trace = 0.0;
  for (int i = 0; i < kDim; ++i) trace += model.cov[size_t(i) * kDim + i];
  const double lambda = 1e-3 * (trace > 0.0 ? trace / kDim : 1.0);
  std::vector<double> reg = model.cov;
  for (int i = 0; i < kDim; ++i) reg[size_t(i) * kDim + i] += lambda;
  std::vector<double> inv = pinv_symmetric(reg, kDim, 1e-12);
  std::vector<double> d(kDim);
  for (int i = 0; i < kDim; ++i) d[i] = features.v[i] - model.mean[i];
  const double q = quad_form(inv, d, kDim);
  return std::sqrt(std::max(0.0, q));
}

double brisque_score(const Image2D& img, const MVGModel& model, bool* degenerate) {
  NSSFeatures f = brisque_features(img);
  if (degenerate) *degenerate = f.degenerate;
  return brisque_score(f, model);
}

double niqe_score(const Image2D& img, const MVGModel& model, int patch,
                  bool* degenerate) {
  if (model.dim != kDim) throw DimensionError("niqe_score: model dimension mismatch");
  if (img.height < 8 || img.width < 8)
    throw DimensionError("niqe_score: image must be at least 8x8");
  PatchSet set = selected_patch_features(img, patch);
  if (degenerate) *degenerate = set.degenerate;
  if (set.degenerate || set.features.empty()) return kFallbackScore;

  std::vector<double> mean2, cov2;
  mean_and_cov(set.features, mean2, cov2);

  std::vector<double> avg(size_t(kDim) * kDim);
  for (size_t i = 0; i < avg.size(); ++i) avg[i] = 0.5 * (model.cov[i] + cov2[i]);
  std::vector<double> pinv = pinv_symmetric(avg, kDim, 1e-10);
  std::vector<double> d(kDim);
  for (int i = 0; i < kDim; ++i) d[i] = model.mean[i] - mean2[i];
  const double q = quad_form(pinv, d, kDim);
  return std::sqrt(std::max(0.0, q));
}

MVGModel fit_pristine_model(const std::vector<Image2D>& corpus, int patch) {
  if (corpus.empty()) throw ConfigError("fit_pristine_model: empty corpus");
  std::vector<NSSFeatures> rows;
  for (const auto& img : corpus) {
    PatchSet set = selected_patch_features(img, patch);
    for (auto& f : set.features)
      if (!f.degenerate) rows.push_back(std::move(f));
  }
  if (rows.empty()) throw ConfigError("fit_pristine_model: no usable patches");
  MVGModel model;
  model.dim = kDim;
  mean_and_cov(rows, model.mean, model.cov);
  return model;
}

std::vector<Image2D> builtin_pristine_corpus() {
  std::vector<Image2D> corpus;
  corpus.reserve(24);
  for (int i = 0; i < 24; ++i)
    corpus.push_back(make_texture(128, 128, 1000 + std::uint64_t(i)));
  return corpus;
}

const MVGModel& default_pristine_model() {
  static std::once_flag flag;
  static MVGModel model;
  std::call_once(flag, [] { model = fit_pristine_model(builtin_pristine_corpus(), 32); });
  return model;
}

void save_model(const MVGModel& model, std::ostream& os) {
  os << "PRMVG1 " << model.dim << "\n";
  os.write(reinterpret_cast<const char*>(model.mean.data()),
           std::streamsize(model.mean.size() * sizeof(double)));
  os.write(reinterpret_cast<const char*>(model.cov.data()),
           std::streamsize(model.cov.size() * sizeof(double)));
}

MVGModel load_model(std::istream& is) {
  std::string magic;
  int dim = 0;
  is >> magic >> dim;
  if (magic != "PRMVG1" || dim <= 0) throw ConfigError("load_model: bad header");
  is.ignore(1);  // newline
  MVGModel model;
  model.dim = dim;
  model.mean.resize(dim);
  model.cov.resize(size_t(dim) * dim);
  is.read(reinterpret_cast<char*>(model.mean.data()),
          std::streamsize(model.mean.size() * sizeof(double)));
  is.read(reinterpret_cast<char*>(model.cov.data()),
          std::streamsize(model.cov.size() * sizeof(double)));
  if (!is) throw ConfigError("load_model: truncated file");
  return model;
}

}  // namespace phaseret::metrics
