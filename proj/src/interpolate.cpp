#include "wavemech/interpolate.hpp"

#include <cmath>

namespace wavemech {

bool interpolation_domain_contains(const GridSpec& grid, const Vec3& p) {
  if (grid.boundary == Boundary::periodic) return true;
  for (int a = 0; a < grid.dims(); ++a) {
    const double h = grid.spacing(a);
    const auto& ax = grid.axes[static_cast<std::size_t>(a)];
    if (!(p[a] >= ax.min + h && p[a] <= ax.max - h)) return false;
  }
  return true;
}

template <class T>
T sample(const Field<T>& f, const Vec3& p) {
  const GridSpec& g = f.grid();
  if (!interpolation_domain_contains(g, p)) fail(ErrorKind::out_of_bounds, "point outside interpolation domain");
  std::array<int, 3> lo{0, 0, 0};
  std::array<double, 3> w{0.0, 0.0, 0.0};
  const bool periodic = g.boundary == Boundary::periodic;
  for (int a = 0; a < g.dims(); ++a) {
    const double h = g.spacing(a);
    const int n = g.points(a);
    double s = (p[a] - g.axes[static_cast<std::size_t>(a)].min) / h;
    if (periodic) s -= n * std::floor(s / n);
    int i = static_cast<int>(std::floor(s));
    if (!periodic) i = std::min(std::max(i, 0), n - 2);
    w[static_cast<std::size_t>(a)] = s - i;
    lo[static_cast<std::size_t>(a)] = i;
  }
  T acc{};
  const int corners = 1 << g.dims();
  for (int c = 0; c < corners; ++c) {
    std::array<int, 3> ijk{0, 0, 0};
    double weight = 1.0;
    for (int a = 0; a < g.dims(); ++a) {
      const auto ua = static_cast<std::size_t>(a);
      const int bit = (c >> a) & 1;
      int j = lo[ua] + bit;
      if (periodic) j %= g.points(a);
      ijk[ua] = j;
      weight *= bit ? w[ua] : 1.0 - w[ua];
    }
    const std::size_t idx = g.flatten(ijk);
    if (f.masked(idx)) return nan_value<T>();
    if (weight != 0.0) acc += weight * f[idx];
  }
  return acc;
}

template <class T>
Interpolator<T>::Interpolator(Field<T> field, const StencilConfig& cfg)
    : field_(std::move(field)), gradient_(gradient(field_, cfg)) {}

template <class T>
InterpolatedValue<T> Interpolator<T>::operator()(const Vec3& p) const {
  InterpolatedValue<T> out;
  out.value = sample(field_, p);
  for (std::size_t a = 0; a < gradient_.size(); ++a) out.gradient[a] = sample(gradient_[a], p);
  return out;
}

template double sample(const Field<double>&, const Vec3&);
template Complex sample(const Field<Complex>&, const Vec3&);
template class Interpolator<double>;
template class Interpolator<Complex>;

}  // namespace wavemech
