#pragma once

#include "wavemech/field.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace wavemech {

enum class RenderQuantity { amplitude, phase_gradient_mag, Q };
enum class ColorScale { linear, log };

std::string to_string(RenderQuantity q);
RenderQuantity render_quantity_from_string(const std::string& s);
ColorScale color_scale_from_string(const std::string& s);

struct RenderOptions {
  RenderQuantity quantity = RenderQuantity::amplitude;
  /// linear: gray = (v - min) / (max - min). log: gray = 1 + log10(v / max)
  /// / decades, clamped to [0, 1]; non-positive values map to black.
  ColorScale scale = ColorScale::linear;
  double decades = 6.0;
  double mass = 1.0;       // Q uses the nonrelativistic -lap a / (2 m a)
  int strip_height = 16;   // rows of a 1D strip
};

/// Binary RGB raster, row 0 at the top.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  std::array<std::uint8_t, 3> pixel(int col, int row) const;
};

/// Masked, undefined or non-finite cells.
inline constexpr std::array<std::uint8_t, 3> kSentinelColor{255, 0, 0};

/// Nodal values of the quantity; undefined nodes are NaN. The phase
/// gradient uses neighbour products.
RealField render_values(const ComplexField& field, const RenderOptions& opts);

/// Axis 0 runs left to right and axis 1 bottom to top. A 1D field becomes a
/// strip; a 3D field shows the plane through the middle node of axis 2.
Image render_heatmap(const ComplexField& field, const RenderOptions& opts);

/// P6 portable pixmap.
void write_ppm(const std::filesystem::path& path, const Image& img);

}  // namespace wavemech
