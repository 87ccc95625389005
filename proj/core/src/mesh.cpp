#include "phaseret/surface/mesh.hpp"

#include <algorithm>
#include <cmath>

namespace phaseret::surface {

TriangleMesh mesh_from_height(const HeightField& field) {
  const int H = field.u.height, W = field.u.width;
  if (H < 2 || W < 2) throw DimensionError("mesh_from_height: grid must be >= 2x2");
  require_finite(field.u, "mesh_from_height");
  const double h = field.spacing;

  TriangleMesh mesh;
  mesh.vertices.reserve(size_t(H) * W);
  for (int i = 0; i < H; ++i)
    for (int j = 0; j < W; ++j)
      mesh.vertices.push_back({j * h, i * h, field.u.at(i, j)});

  auto vid = [W](int i, int j) { return i * W + j; };
  mesh.triangles.reserve(size_t(2) * (H - 1) * (W - 1));
  for (int i = 0; i + 1 < H; ++i) {
    for (int j = 0; j + 1 < W; ++j) {
      // both triangles share the (i,j+1)-(i+1,j) diagonal
      mesh.triangles.push_back({vid(i, j), vid(i + 1, j), vid(i, j + 1)});
      mesh.triangles.push_back({vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)});
    }
  }
  return mesh;
}

std::array<double, 3> triangle_angles(const TriangleMesh& mesh, int t) {
  const auto& tri = mesh.triangles.at(t);
  std::array<std::array<double, 3>, 3> p;
  for (int k = 0; k < 3; ++k) p[k] = mesh.vertices.at(tri[k]);

  auto edge_len = [&](int a, int b) {
    const double dx = p[a][0] - p[b][0];
    const double dy = p[a][1] - p[b][1];
    const double dz = p[a][2] - p[b][2];
    return std::sqrt(dx * dx + dy * dy + dz * dz);
  };
  const double l01 = edge_len(0, 1), l12 = edge_len(1, 2), l02 = edge_len(0, 2);

  auto angle = [](double opp, double s1, double s2) {
    const double denom = 2.0 * s1 * s2;
    if (denom <= 0.0) return 0.0;
    double c = (s1 * s1 + s2 * s2 - opp * opp) / denom;
    c = std::clamp(c, -1.0, 1.0);
    return std::acos(c);
  };
  return {angle(l12, l01, l02), angle(l02, l01, l12), angle(l01, l12, l02)};
}

double triangle_skewness(const TriangleMesh& mesh, int t) {
  const auto a = triangle_angles(mesh, t);
  const double deg = 180.0 / 3.1415926535897932384626433832795;
  const double amax = deg * std::max({a[0], a[1], a[2]});
  const double amin = deg * std::min({a[0], a[1], a[2]});
  const double skew = std::max((amax - 60.0) / 120.0, (60.0 - amin) / 60.0);
  return std::clamp(skew, 0.0, 1.0);
}

SkewnessStats skewness_stats(const TriangleMesh& mesh) {
  SkewnessStats s;
  if (mesh.triangles.empty()) return s;
  double acc = 0.0;
  for (int t = 0; t < int(mesh.triangles.size()); ++t) {
    const double k = triangle_skewness(mesh, t);
    acc += k;
    s.max = std::max(s.max, k);
  }
  s.mean = acc / double(mesh.triangles.size());
  return s;
}

double mesh_skewness(const TriangleMesh& mesh) { return skewness_stats(mesh).mean; }

}  // namespace phaseret::surface
