#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "phaseret/ad/tensor.hpp"
#include "phaseret/io.hpp"
#include "phaseret/phantom.hpp"

using namespace phaseret;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / "phaseret_io_test";
    fs::create_directories(path);
  }
  ~TempDir() { std::error_code ec; fs::remove_all(path, ec); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("raw grid round trip is lossless") {
  TempDir tmp;
  Image2D img = make_blob(17, 23, 5, 2.5);
  io::write_raw_grid(tmp.file("grid.prd"), img);
  Image2D back = io::read_raw_grid(tmp.file("grid.prd"));
  CHECK(back.height == 17);
  CHECK(back.width == 23);
  CHECK(back.v == img.v);  // bit-exact
}

TEST_CASE("pgm 16-bit round trip within quantization") {
  TempDir tmp;
  Image2D img = make_texture(32, 32, 3);
  io::write_pgm16(tmp.file("img.pgm"), img, 0.0, 1.0);
  Image2D back = io::read_image(tmp.file("img.pgm"));
  REQUIRE(back.same_shape(img));
  for (size_t i = 0; i < img.v.size(); ++i)
    CHECK(std::abs(back.v[i] - img.v[i]) < 1.0 / 65535.0);
}

TEST_CASE("ascii pgm with comments reads too") {
  TempDir tmp;
  {
    std::ofstream os(tmp.file("a.pgm"));
    os << "P2\n# a comment\n3 2\n255\n0 128 255\n64 32 16\n";
  }
  Image2D img = io::read_image(tmp.file("a.pgm"));
  CHECK(img.height == 2);
  CHECK(img.width == 3);
  CHECK(img.at(0, 1) == doctest::Approx(128.0 / 255.0));
  CHECK(img.at(1, 2) == doctest::Approx(16.0 / 255.0));
}

TEST_CASE("png 16-bit gray round trip within quantization") {
  TempDir tmp;
  Image2D img = make_texture(24, 40, 7);
  io::write_png16(tmp.file("img.png"), img, 0.0, 1.0);
  Image2D back = io::read_image(tmp.file("img.png"));
  REQUIRE(back.same_shape(img));
  for (size_t i = 0; i < img.v.size(); ++i)
    CHECK(std::abs(back.v[i] - img.v[i]) < 1.0 / 65535.0);
}

TEST_CASE("unknown extensions are rejected") {
  CHECK_THROWS_AS(io::read_image("something.bmp"), ConfigError);
  CHECK_THROWS_AS(io::read_image("missing.pgm"), ConfigError);
}

TEST_CASE("mesh obj writer emits 1-based faces") {
  TempDir tmp;
  surface::HeightField hf;
  hf.u = Image2D(2, 2, 0.0);
  hf.u.at(1, 1) = 1.0;
  surface::TriangleMesh mesh = surface::mesh_from_height(hf);
  io::write_mesh_obj(tmp.file("m.obj"), mesh);
  std::ifstream is(tmp.file("m.obj"));
  std::string line;
  int v_lines = 0, f_lines = 0;
  while (std::getline(is, line)) {
    if (line.rfind("v ", 0) == 0) ++v_lines;
    if (line.rfind("f ", 0) == 0) {
      ++f_lines;
      std::istringstream ls(line.substr(2));
      int a, b, c;
      ls >> a >> b >> c;
      CHECK(a >= 1);
      CHECK(b <= 4);
      CHECK(c <= 4);
    }
  }
  CHECK(v_lines == 4);
  CHECK(f_lines == 2);
}

TEST_CASE("phantoms are deterministic and in range") {
  Image2D a = make_blob(32, 32, 9, 1.5);
  Image2D b = make_blob(32, 32, 9, 1.5);
  CHECK(a.v == b.v);
  CHECK(min_value(a) >= 0.0);
  CHECK(max_value(a) == doctest::Approx(1.5));

  Image2D s = make_steps(32, 32, 1, 2.0);
  CHECK(max_value(s) <= 2.0);
  Image2D t = make_text_mask(48, 48, 1.0);
  CHECK(max_value(t) == 1.0);
  CHECK(min_value(t) == 0.0);
  CHECK_THROWS_AS(make_phantom("nope", 8, 8, 0, 1.0), ConfigError);
}

TEST_CASE("tensor debug dump carries a text shape header plus raw doubles") {
  ad::Tensor t = ad::Tensor::from_values({2, 3}, {1, 2, 3, 4, 5, 6});
  std::ostringstream os;
  t.dump(os);
  const std::string s = os.str();
  CHECK(s.rfind("PRT1 2 2 3\n", 0) == 0);
  CHECK(s.size() == 11 + 6 * sizeof(double));
  double first = 0.0;
  std::memcpy(&first, s.data() + 11, sizeof(double));
  CHECK(first == 1.0);
}
