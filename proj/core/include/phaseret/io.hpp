#pragma once

#include <string>

#include "phaseret/image.hpp"
#include "phaseret/surface/mesh.hpp"

namespace phaseret::io {

/// Grayscale image input: PGM (P2/P5, 8/16-bit) and PNG (gray, gray+alpha or
/// RGB via luma; 8/16-bit). Values are mapped to [0,1]. The raw double grid
/// format (.prd) is read verbatim. Dispatch is by file extension.
Image2D read_image(const std::string& path);

/// 16-bit binary PGM. `lo`/`hi` define the value mapping to [0,65535]; with
/// the defaults the image's own range is used (constant images map to 0).
void write_pgm16(const std::string& path, const Image2D& img, double lo = 0.0,
                 double hi = -1.0);

/// 16-bit grayscale PNG with the same mapping rules as write_pgm16.
void write_png16(const std::string& path, const Image2D& img, double lo = 0.0,
                 double hi = -1.0);

/// Raw double grid: one text header line "PRD1 <rows> <cols>" then rows*cols
/// little-endian doubles, row-major. Lossless interchange format.
void write_raw_grid(const std::string& path, const Image2D& img);
Image2D read_raw_grid(const std::string& path);

/// Wavefront-style mesh text: `v x y z` lines then 1-based `f i j k` lines.
void write_mesh_obj(const std::string& path, const surface::TriangleMesh& mesh);

bool ends_with(const std::string& s, const std::string& suffix);

}  // namespace phaseret::io
