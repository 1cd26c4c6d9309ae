#include "wavemech/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wavemech {

std::string to_string(Boundary b) {
  switch (b) {
    case Boundary::periodic: return "periodic";
    case Boundary::absorbing_mask: return "absorbing_mask";
    case Boundary::dirichlet_zero: return "dirichlet_zero";
  }
  return "periodic";
}

Boundary boundary_from_string(const std::string& s) {
  if (s == "periodic") return Boundary::periodic;
  if (s == "absorbing_mask") return Boundary::absorbing_mask;
  if (s == "dirichlet_zero") return Boundary::dirichlet_zero;
  fail(ErrorKind::configuration, "unknown boundary '" + s + "'");
}

double GridSpec::spacing(int axis) const {
  const auto& a = axes[static_cast<std::size_t>(axis)];
  return (a.max - a.min) / (a.points - 1);
}

double GridSpec::min_spacing() const {
  double h = std::numeric_limits<double>::infinity();
  for (int a = 0; a < dims(); ++a) h = std::min(h, spacing(a));
  return h;
}

double GridSpec::max_spacing() const {
  double h = 0.0;
  for (int a = 0; a < dims(); ++a) h = std::max(h, spacing(a));
  return h;
}

double GridSpec::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dims(); ++a) v *= spacing(a);
  return v;
}

std::size_t GridSpec::size() const {
  std::size_t n = 1;
  for (const auto& a : axes) n *= static_cast<std::size_t>(a.points);
  return n;
}

std::size_t GridSpec::stride(int axis) const {
  std::size_t s = 1;
  for (int a = dims() - 1; a > axis; --a) s *= static_cast<std::size_t>(points(a));
  return s;
}

std::array<int, 3> GridSpec::unflatten(std::size_t idx) const {
  std::array<int, 3> ijk{0, 0, 0};
  for (int a = dims() - 1; a >= 0; --a) {
    const auto n = static_cast<std::size_t>(points(a));
    ijk[static_cast<std::size_t>(a)] = static_cast<int>(idx % n);
    idx /= n;
  }
  return ijk;
}

std::size_t GridSpec::flatten(const std::array<int, 3>& ijk) const {
  std::size_t idx = 0;
  for (int a = 0; a < dims(); ++a) idx = idx * static_cast<std::size_t>(points(a)) + static_cast<std::size_t>(ijk[static_cast<std::size_t>(a)]);
  return idx;
}

double GridSpec::coord(int axis, int i) const { return axes[static_cast<std::size_t>(axis)].min + i * spacing(axis); }

Vec3 GridSpec::position(std::size_t idx) const {
  const auto ijk = unflatten(idx);
  Vec3 p;
  for (int a = 0; a < dims(); ++a) p[a] = coord(a, ijk[static_cast<std::size_t>(a)]);
  return p;
}

void GridSpec::validate() const {
  require(dims() >= 1 && dims() <= 3, ErrorKind::dimension, "spatial_dims must be 1, 2 or 3");
  for (int a = 0; a < dims(); ++a) {
    const auto& ax = axes[static_cast<std::size_t>(a)];
    require(ax.points >= 8, ErrorKind::dimension, "points_per_axis must be >= 8");
    require(std::isfinite(ax.min) && std::isfinite(ax.max) && ax.max > ax.min, ErrorKind::configuration,
            "axis extents must satisfy min < max");
  }
  require(std::isfinite(dt) && dt >= 0.0, ErrorKind::configuration, "dt must be finite and non-negative");
}

bool GridSpec::satisfies_cfl() const { return dt < min_spacing() / std::sqrt(static_cast<double>(dims())); }

GridSpec GridSpec::periodic_box(int dims, double min, double length, int n, double dt) {
  GridSpec g;
  g.axes.assign(static_cast<std::size_t>(dims), AxisSpec{min, min + length * (n - 1) / n, n});
  g.dt = dt;
  g.boundary = Boundary::periodic;
  return g;
}

}  // namespace wavemech
