#pragma once

#include "wavemech/core.hpp"
#include "wavemech/vec.hpp"

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace wavemech {

enum class Boundary { periodic, absorbing_mask, dirichlet_zero };

std::string to_string(Boundary b);
Boundary boundary_from_string(const std::string& s);

struct AxisSpec {
  double min = 0.0;
  double max = 1.0;
  int points = 8;

  friend bool operator==(const AxisSpec&, const AxisSpec&) = default;
};

/// Uniform Cartesian grid in natural units (hbar = c = 1). Nodes sit at
/// min + i*h with h = (max - min)/(points - 1). Storage is row-major with
/// axis 0 slowest. Under periodic boundaries the node after `max` wraps
/// onto `min`, so the period along an axis is points*h.
struct GridSpec {
  std::vector<AxisSpec> axes;
  double dt = 0.0;
  Boundary boundary = Boundary::periodic;

  int dims() const { return static_cast<int>(axes.size()); }
  int points(int axis) const { return axes[static_cast<std::size_t>(axis)].points; }
  double spacing(int axis) const;
  double min_spacing() const;
  double max_spacing() const;
  double cell_volume() const;
  std::size_t size() const;
  std::size_t stride(int axis) const;
  std::array<int, 3> unflatten(std::size_t idx) const;
  std::size_t flatten(const std::array<int, 3>& ijk) const;
  double coord(int axis, int i) const;
  Vec3 position(std::size_t idx) const;
  double period(int axis) const { return points(axis) * spacing(axis); }

  /// Throws dimension/configuration errors for malformed grids.
  void validate() const;
  /// dt < min_i h_i / sqrt(dims).
  bool satisfies_cfl() const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

  /// Periodic box [min, min + length) sampled with n nodes per axis.
  static GridSpec periodic_box(int dims, double min, double length, int n, double dt);
};

}  // namespace wavemech
