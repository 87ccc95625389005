#include "phaseret/metrics/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace phaseret::metrics {

void symmetric_eigen(const std::vector<double>& a, int n,
                     std::vector<double>& values, std::vector<double>& vectors) {
  if (int(a.size()) != n * n) throw DimensionError("symmetric_eigen: bad matrix size");
  std::vector<double> m = a;
  std::vector<double> v(size_t(n) * n, 0.0);
  for (int i = 0; i < n; ++i) v[size_t(i) * n + i] = 1.0;

  auto off_norm = [&] {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) s += m[size_t(i) * n + j] * m[size_t(i) * n + j];
    return std::sqrt(2.0 * s);
  };

  const int max_sweeps = 64;
  for (int sweep = 0; sweep < max_sweeps && off_norm() > 1e-13; ++sweep) {
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = m[size_t(p) * n + q];
        if (std::abs(apq) < 1e-300) continue;
        const double app = m[size_t(p) * n + p];
        const double aqq = m[size_t(q) * n + q];
        const double tau = (aqq - app) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double mkp = m[size_t(k) * n + p];
          const double mkq = m[size_t(k) * n + q];
          m[size_t(k) * n + p] = c * mkp - s * mkq;
          m[size_t(k) * n + q] = s * mkp + c * mkq;
        }
        for (int k = 0; k < n; ++k) {
          const double mpk = m[size_t(p) * n + k];
          const double mqk = m[size_t(q) * n + k];
          m[size_t(p) * n + k] = c * mpk - s * mqk;
          m[size_t(q) * n + k] = s * mpk + c * mqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vpk = v[size_t(p) * n + k];
          const double vqk = v[size_t(q) * n + k];
          v[size_t(p) * n + k] = c * vpk - s * vqk;
          v[size_t(q) * n + k] = s * vpk + c * vqk;
        }
      }
    }
  }

  values.resize(n);
  for (int i = 0; i < n; ++i) values[i] = m[size_t(i) * n + i];
  // ascending order, vectors follow
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int x, int y) { return values[x] < values[y]; });
  std::vector<double> sv(n);
  vectors.assign(size_t(n) * n, 0.0);
  for (int r = 0; r < n; ++r) {
    sv[r] = values[idx[r]];
    for (int k = 0; k < n; ++k) vectors[size_t(r) * n + k] = v[size_t(idx[r]) * n + k];
  }
  values = sv;
}

std::vector<double> pinv_symmetric(const std::vector<double>& a, int n, double rel_tol) {
  std::vector<double> vals, vecs;
  symmetric_eigen(a, n, vals, vecs);
  double vmax = 0.0;
  for (double x : vals) vmax = std::max(vmax, std::abs(x));
  const double cut = rel_tol * (vmax > 0.0 ? vmax : 1.0);

  std::vector<double> out(size_t(n) * n, 0.0);
  for (int r = 0; r < n; ++r) {
    if (std::abs(vals[r]) <= cut) continue;
    const double inv = 1.0 / vals[r];
    const double* e = vecs.data() + size_t(r) * n;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out[size_t(i) * n + j] += inv * e[i] * e[j];
  }
  return out;
}

double quad_form(const std::vector<double>& m, const std::vector<double>& x, int n) {
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) row += m[size_t(i) * n + j] * x[j];
    acc += x[i] * row;
  }
  return acc;
}

}  // namespace phaseret::metrics
