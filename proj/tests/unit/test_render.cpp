#include "helpers.hpp"

#include "wavemech/evolve.hpp"
#include "wavemech/render.hpp"

#include <doctest.h>

#include <fstream>

using namespace wavemech;
using testing::line;
using testing::square;

TEST_CASE("constant field renders as a uniform mid-gray image") {
  const GridSpec g = square(0.0, 1.0, 12);
  const Image img = render_heatmap(ComplexField::constant(g, Complex(0.3, 0.4)), RenderOptions{});
  CHECK(img.width == 12);
  CHECK(img.height == 12);
  for (int r = 0; r < img.height; ++r)
    for (int c = 0; c < img.width; ++c) CHECK(img.pixel(c, r) == std::array<std::uint8_t, 3>{128, 128, 128});
}

TEST_CASE("axis orientation: axis 0 to the right, axis 1 upwards") {
  const GridSpec g = square(0.0, 1.0, 5);
  const ComplexField f = ComplexField::generate(g, [](const Vec3& x) { return Complex(x[0] + 2.0 * x[1], 0.0); });
  const Image img = render_heatmap(f, RenderOptions{});
  CHECK(img.pixel(0, 4)[0] == 0);      // (0, 0) bottom left
  CHECK(img.pixel(4, 0)[0] == 255);    // (1, 1) top right
  CHECK(img.pixel(4, 4)[0] == 85);     // x = 1, y = 0: 1/3 of the range
}

TEST_CASE("centred Gaussian renders with mirror symmetry") {
  const GridSpec g = square(-3.0, 3.0, 61);
  const ComplexField psi = gaussian_packet(g, Vec3(), 1.0, Vec3(0.7, 0.0));
  for (auto scale : {ColorScale::linear, ColorScale::log}) {
    RenderOptions o;
    o.scale = scale;
    const Image img = render_heatmap(psi, o);
    for (int r = 0; r < img.height; ++r) {
      for (int c = 0; c < img.width; ++c) {
        CHECK(img.pixel(c, r) == img.pixel(img.width - 1 - c, r));
        CHECK(img.pixel(c, r) == img.pixel(c, img.height - 1 - r));
        CHECK(img.pixel(c, r) == img.pixel(r, c));
      }
    }
    CHECK(img.pixel(30, 30)[0] == 255);
  }
}

TEST_CASE("monopole profile: log gray drops by log10(2)/decades per doubling of r") {
  const GridSpec g = square(-4.0, 4.0, 81);
  std::vector<Complex> v(g.size());
  std::vector<std::uint8_t> mask(g.size(), 0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r = norm(g.position(i));
    if (r < 0.05) {
      v[i] = nan_value<Complex>();
      mask[i] = 1;
    } else {
      v[i] = 1.0 / r;
    }
  }
  RenderOptions o;
  o.scale = ColorScale::log;
  o.decades = 2.0;
  const Image img = render_heatmap(ComplexField(g, v, 0.0, mask), o);
  CHECK(img.pixel(40, 40) == kSentinelColor);
  const double step = 255.0 * std::log10(2.0) / 2.0;
  // Along the row through the origin, r = 0.5, 1, 2 sit at columns 45, 50, 60.
  CHECK(std::abs(img.pixel(45, 40)[0] - img.pixel(50, 40)[0] - step) <= 1.0);
  CHECK(std::abs(img.pixel(50, 40)[0] - img.pixel(60, 40)[0] - step) <= 1.0);
}

TEST_CASE("phase gradient and Q quantities") {
  const GridSpec g = line(-5.0, 5.0, 201);
  const ComplexField pw = plane_wave(g, Vec3(1.5));
  RenderOptions o;
  o.quantity = RenderQuantity::phase_gradient_mag;
  const RealField k = render_values(pw, o);
  CHECK(k[100] == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(std::isnan(k[0]));

  o.quantity = RenderQuantity::Q;
  const RealField q = render_values(oscillator_ground_state(g, 1.0, 1.0), o);
  CHECK(q[100] == doctest::Approx(0.5).epsilon(1e-3));
  const Image strip = render_heatmap(pw, o);
  CHECK(strip.height == 16);
}

TEST_CASE("PPM output is binary P6") {
  const auto dir = testing::scratch_dir("ppm");
  Image img;
  img.width = 3;
  img.height = 2;
  img.rgb.assign(18, 7);
  write_ppm(dir / "a.ppm", img);
  std::ifstream in(dir / "a.ppm", std::ios::binary);
  std::string magic;
  int w = 0, h = 0, maxv = 0;
  in >> magic >> w >> h >> maxv;
  in.get();
  std::vector<char> data(18);
  in.read(data.data(), 18);
  CHECK(magic == "P6");
  CHECK(w == 3);
  CHECK(h == 2);
  CHECK(maxv == 255);
  CHECK(in.gcount() == 18);
  CHECK(data[17] == 7);
  CHECK_THROWS_AS(render_quantity_from_string("energy"), Error);
}
