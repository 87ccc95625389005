#include "phaseret/io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace phaseret::io {

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

namespace {

[[noreturn]] void io_fail(const std::string& path, const std::string& why) {
  throw ConfigError("i/o error (" + path + "): " + why);
}

int pgm_next_int(std::istream& is, const std::string& path) {
  // skips whitespace and '#' comments
  for (;;) {
    int c = is.peek();
    if (c == EOF) io_fail(path, "unexpected end of PGM header");
    if (c == '#') {
      std::string line;
      std::getline(is, line);
      continue;
    }
    if (std::isspace(c)) {
      is.get();
      continue;
    }
    break;
  }
  int value = 0;
  is >> value;
  if (!is) io_fail(path, "bad PGM header value");
  return value;
}

Image2D read_pgm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) io_fail(path, "cannot open");
  char m0 = 0, m1 = 0;
  is.get(m0);
  is.get(m1);
  if (m0 != 'P' || (m1 != '2' && m1 != '5')) io_fail(path, "not a PGM file");
  const bool binary = m1 == '5';
  const int w = pgm_next_int(is, path);
  const int h = pgm_next_int(is, path);
  const int maxval = pgm_next_int(is, path);
  if (w < 1 || h < 1 || maxval < 1 || maxval > 65535) io_fail(path, "bad PGM dims");

  Image2D img(h, w);
  if (binary) {
    is.get();  // single whitespace after maxval
    const int bytes = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> buf(size_t(w) * h * bytes);
    is.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size()));
    if (!is) io_fail(path, "truncated PGM data");
    for (size_t i = 0; i < img.v.size(); ++i) {
      const unsigned value = bytes == 2
                                 ? (unsigned(buf[2 * i]) << 8) | buf[2 * i + 1]
                                 : buf[i];
      img.v[i] = double(value) / double(maxval);
    }
  } else {
    for (size_t i = 0; i < img.v.size(); ++i) {
      img.v[i] = double(pgm_next_int(is, path)) / double(maxval);
    }
  }
  return img;
}

Image2D read_png(const std::string& path) {
  FILE* fp = std::fopen(path.c_str(), "rb");
  if (!fp) io_fail(path, "cannot open");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    if (png) png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    io_fail(path, "libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    io_fail(path, "libpng decode failed");
  }
  png_init_io(png, fp);
  png_read_info(png, info);

  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int color = png_get_color_type(png, info);
  int depth = png_get_bit_depth(png, info);

  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA ||
      color == PNG_COLOR_TYPE_PALETTE)
    png_set_rgb_to_gray_fixed(png, 1, -1, -1);  // ITU luma
  png_read_update_info(png, info);
  depth = png_get_bit_depth(png, info);

  std::vector<png_byte> row(png_get_rowbytes(png, info));
  Image2D img{int(h), int(w)};
  const double maxval = depth == 16 ? 65535.0 : 255.0;
  for (png_uint_32 y = 0; y < h; ++y) {
    png_read_row(png, row.data(), nullptr);
    for (png_uint_32 x = 0; x < w; ++x) {
      unsigned value = depth == 16 ? (unsigned(row[2 * x]) << 8) | row[2 * x + 1]
                                   : row[x];
      img.at(int(y), int(x)) = double(value) / maxval;
    }
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  std::fclose(fp);
  return img;
}

void value_range(const Image2D& img, double& lo, double& hi) {
  if (hi < lo) {  // auto range
    lo = min_value(img);
    hi = max_value(img);
  }
  if (hi - lo < 1e-300) hi = lo + 1.0;  // constant image maps to 0
}

}  // namespace

Image2D read_image(const std::string& path) {
  if (ends_with(path, ".prd")) return read_raw_grid(path);
  if (ends_with(path, ".png")) return read_png(path);
  if (ends_with(path, ".pgm") || ends_with(path, ".pnm")) return read_pgm(path);
  io_fail(path, "unsupported image format (use .pgm, .png or .prd)");
}

void write_pgm16(const std::string& path, const Image2D& img, double lo, double hi) {
  value_range(img, lo, hi);
  std::ofstream os(path, std::ios::binary);
  if (!os) io_fail(path, "cannot open for writing");
  os << "P5\n" << img.width << " " << img.height << "\n65535\n";
  std::vector<unsigned char> buf(img.v.size() * 2);
  for (size_t i = 0; i < img.v.size(); ++i) {
    const double t = std::clamp((img.v[i] - lo) / (hi - lo), 0.0, 1.0);
    const unsigned value = unsigned(std::lround(t * 65535.0));
    buf[2 * i] = (unsigned char)(value >> 8);
    buf[2 * i + 1] = (unsigned char)(value & 0xff);
  }
  os.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
  if (!os) io_fail(path, "write failed");
}

void write_png16(const std::string& path, const Image2D& img, double lo, double hi) {
  value_range(img, lo, hi);
  FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) io_fail(path, "cannot open for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    if (png) png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    io_fail(path, "libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    io_fail(path, "libpng encode failed");
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, png_uint_32(img.width), png_uint_32(img.height), 16,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_byte> row(size_t(img.width) * 2);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const double t = std::clamp((img.at(y, x) - lo) / (hi - lo), 0.0, 1.0);
      const unsigned value = unsigned(std::lround(t * 65535.0));
      row[2 * x] = png_byte(value >> 8);
      row[2 * x + 1] = png_byte(value & 0xff);
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

void write_raw_grid(const std::string& path, const Image2D& img) {
  std::ofstream os(path, std::ios::binary);
  if (!os) io_fail(path, "cannot open for writing");
  os << "PRD1 " << img.height << " " << img.width << "\n";
  os.write(reinterpret_cast<const char*>(img.v.data()),
           std::streamsize(img.v.size() * sizeof(double)));
  if (!os) io_fail(path, "write failed");
}

Image2D read_raw_grid(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) io_fail(path, "cannot open");
  std::string magic;
  int rows = 0, cols = 0;
  is >> magic >> rows >> cols;
  if (magic != "PRD1" || rows < 1 || cols < 1) io_fail(path, "bad raw grid header");
  is.ignore(1);
  Image2D img(rows, cols);
  is.read(reinterpret_cast<char*>(img.v.data()),
          std::streamsize(img.v.size() * sizeof(double)));
  if (!is) io_fail(path, "truncated raw grid");
  return img;
}

void write_mesh_obj(const std::string& path, const surface::TriangleMesh& mesh) {
  std::ofstream os(path);
  if (!os) io_fail(path, "cannot open for writing");
  os.precision(9);
  for (const auto& v : mesh.vertices)
    os << "v " << v[0] << " " << v[1] << " " << v[2] << "\n";
  for (const auto& t : mesh.triangles)
    os << "f " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
  if (!os) io_fail(path, "write failed");
}

}  // namespace phaseret::io
