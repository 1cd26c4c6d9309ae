#include "wavemech/render.hpp"

#include "wavemech/madelung.hpp"
#include "wavemech/stencil.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace wavemech {

std::string to_string(RenderQuantity q) {
  switch (q) {
    case RenderQuantity::amplitude: return "amplitude";
    case RenderQuantity::phase_gradient_mag: return "phase_gradient_mag";
    case RenderQuantity::Q: return "Q";
  }
  return "amplitude";
}

RenderQuantity render_quantity_from_string(const std::string& s) {
  for (auto q : {RenderQuantity::amplitude, RenderQuantity::phase_gradient_mag, RenderQuantity::Q}) {
    if (to_string(q) == s) return q;
  }
  fail(ErrorKind::configuration, "unknown quantity '" + s + "' (amplitude, phase_gradient_mag, Q)");
}

ColorScale color_scale_from_string(const std::string& s) {
  if (s == "linear") return ColorScale::linear;
  if (s == "log") return ColorScale::log;
  fail(ErrorKind::configuration, "unknown color scale '" + s + "' (linear, log)");
}

std::array<std::uint8_t, 3> Image::pixel(int col, int row) const {
  const std::size_t o = 3 * (static_cast<std::size_t>(row) * static_cast<std::size_t>(width) + static_cast<std::size_t>(col));
  return {rgb[o], rgb[o + 1], rgb[o + 2]};
}

RealField render_values(const ComplexField& field, const RenderOptions& opts) {
  const GridSpec& g = field.grid();
  std::vector<double> v(field.size(), kNaN);
  switch (opts.quantity) {
    case RenderQuantity::amplitude:
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (!field.masked(i)) v[i] = std::abs(field[i]);
      }
      break;
    case RenderQuantity::phase_gradient_mag: {
      std::vector<RealField> grad;
      for (int a = 0; a < g.dims(); ++a) grad.push_back(phase_partial(field, a, StencilConfig{}));
      for (std::size_t i = 0; i < v.size(); ++i) {
        double s = 0.0;
        for (const auto& c : grad) s += c[i] * c[i];
        v[i] = field.masked(i) ? kNaN : std::sqrt(s);
      }
      break;
    }
    case RenderQuantity::Q: {
      const PolarFields polar = decompose(field, FourPotential::none());
      const RealField q = quantum_potential(polar, Regime::nonrelativistic, opts.mass);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = q[i];
      break;
    }
  }
  return RealField(g, std::move(v), field.time_label());
}

Image render_heatmap(const ComplexField& field, const RenderOptions& opts) {
  const RealField values = render_values(field, opts);
  const GridSpec& g = field.grid();
  const int d = g.dims();
  Image img;
  img.width = g.points(0);
  img.height = d == 1 ? std::max(1, opts.strip_height) : g.points(1);
  const int k_mid = d == 3 ? g.points(2) / 2 : 0;
  auto node = [&](int col, int row) {
    if (d == 1) return static_cast<std::size_t>(col);
    return g.flatten({col, img.height - 1 - row, k_mid});
  };
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int r = 0; r < (d == 1 ? 1 : img.height); ++r) {
    for (int c = 0; c < img.width; ++c) {
      const double v = values[node(c, r)];
      if (!std::isfinite(v)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  auto gray = [&](double v) {
    double s = 0.5;
    if (opts.scale == ColorScale::linear) {
      if (hi > lo) s = (v - lo) / (hi - lo);
    } else if (v <= 0.0 || hi <= 0.0) {
      s = 0.0;
    } else {
      s = std::clamp(1.0 + std::log10(v / hi) / opts.decades, 0.0, 1.0);
    }
    return static_cast<std::uint8_t>(std::lround(255.0 * s));
  };
  img.rgb.resize(3 * static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height));
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      const double v = values[node(c, r)];
      const std::size_t o = 3 * (static_cast<std::size_t>(r) * static_cast<std::size_t>(img.width) + static_cast<std::size_t>(c));
      if (!std::isfinite(v)) {
        std::copy(kSentinelColor.begin(), kSentinelColor.end(), img.rgb.begin() + static_cast<std::ptrdiff_t>(o));
      } else {
        const std::uint8_t y = gray(v);
        img.rgb[o] = img.rgb[o + 1] = img.rgb[o + 2] = y;
      }
    }
  }
  return img;
}

void write_ppm(const std::filesystem::path& path, const Image& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write '" + path.string() + "'");
  out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.rgb.data()), static_cast<std::streamsize>(img.rgb.size()));
}

}  // namespace wavemech
