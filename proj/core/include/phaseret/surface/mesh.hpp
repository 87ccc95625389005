#pragma once

#include <array>
#include <vector>

#include "phaseret/surface/eikonal.hpp"

namespace phaseret::surface {

/// Triangulated height field: vertex (x, y, z) triples plus 0-based triangle
/// index triples. Full grids carry exactly 2*(H-1)*(W-1) triangles.
struct TriangleMesh {
  std::vector<std::array<double, 3>> vertices;
  std::vector<std::array<int, 3>> triangles;
};

/// Regular-grid triangulation of a height field: vertex (j*h, i*h, u_ij),
/// each cell split into two triangles along the same diagonal.
TriangleMesh mesh_from_height(const HeightField& field);

/// Interior angles of one triangle, radians.
std::array<double, 3> triangle_angles(const TriangleMesh& mesh, int t);

/// Equiangle skew of one triangle: max((a_max-60)/120, (60-a_min)/60) in
/// degrees; 0 for equilateral, -> 1 for degenerate slivers.
double triangle_skewness(const TriangleMesh& mesh, int t);

struct SkewnessStats {
  double mean = 0.0;
  double max = 0.0;
};

SkewnessStats skewness_stats(const TriangleMesh& mesh);

/// Mean per-triangle equiangle skew, in [0, 1].
double mesh_skewness(const TriangleMesh& mesh);

}  // namespace phaseret::surface
