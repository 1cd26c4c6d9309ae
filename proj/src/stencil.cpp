#include "wavemech/stencil.hpp"
#include "wavemech/parallel.hpp"

#include <cmath>

namespace wavemech {

void StencilConfig::validate(const GridSpec& grid, bool singular_mask_active) const {
  require(order == 2 || order == 4, ErrorKind::configuration, "stencil order must be 2 or 4");
  require(exclusion_radius >= 0.0, ErrorKind::configuration, "exclusion radius must be non-negative");
  if (singular_mask_active) {
    require(exclusion_radius >= 2.0 * grid.max_spacing(), ErrorKind::configuration,
            "exclusion radius must be at least two cells when a singular mask is active");
  }
  for (int a = 0; a < grid.dims(); ++a) {
    require(grid.points(a) >= 2 * half_width() + 1, ErrorKind::dimension, "grid too small for stencil");
  }
}

namespace {

/// Neighbour lookup along one axis with boundary handling.
struct AxisWalker {
  const GridSpec& grid;
  int axis;
  std::size_t stride;
  int n;
  bool periodic;

  AxisWalker(const GridSpec& g, int a)
      : grid(g), axis(a), stride(g.stride(a)), n(g.points(a)), periodic(g.boundary == Boundary::periodic) {}

  /// Returns false when the neighbour is off-grid on a non-periodic axis.
  bool neighbour(std::size_t idx, int i, int offset, std::size_t& out) const {
    int j = i + offset;
    if (j < 0 || j >= n) {
      if (!periodic) return false;
      j = ((j % n) + n) % n;
    }
    out = idx + static_cast<std::size_t>(static_cast<long>(j - i) * static_cast<long>(stride));
    return true;
  }
};

template <class T>
struct Taps {
  T v[5];
  bool masked = false;
  bool off_grid = false;
};

template <class T>
Taps<T> gather(const Field<T>& f, const AxisWalker& w, std::size_t idx, int i, int hw) {
  Taps<T> t;
  for (int o = -hw; o <= hw; ++o) {
    std::size_t j = 0;
    auto& slot = t.v[o + 2];
    if (w.neighbour(idx, i, o, j)) {
      slot = f[j];
      if (f.masked(j)) t.masked = true;
    } else {
      slot = T{};
      t.off_grid = true;
    }
  }
  return t;
}

template <class T>
T first_derivative(const Taps<T>& t, int order, double h) {
  if (order == 2) return (t.v[3] - t.v[1]) / (2.0 * h);
  return (-t.v[4] + 8.0 * t.v[3] - 8.0 * t.v[1] + t.v[0]) / (12.0 * h);
}

template <class T>
T second_derivative(const Taps<T>& t, int order, double h) {
  if (order == 2) return (t.v[3] - 2.0 * t.v[2] + t.v[1]) / (h * h);
  return (-t.v[4] + 16.0 * t.v[3] - 30.0 * t.v[2] + 16.0 * t.v[1] - t.v[0]) / (12.0 * h * h);
}

template <class T, class Kernel>
Field<T> apply_axiswise(const Field<T>& f, const StencilConfig& cfg, const std::vector<int>& axes, Kernel kernel) {
  const GridSpec& g = f.grid();
  cfg.validate(g);
  std::vector<AxisWalker> walkers;
  for (int a : axes) walkers.emplace_back(g, a);
  std::vector<T> out(g.size());
  std::vector<std::uint8_t> mask;
  bool any_mask = f.has_mask();
  if (any_mask) mask.assign(g.size(), 0);
  const int hw = cfg.half_width();
  parallel_for(g.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t idx = b; idx < e; ++idx) {
      const auto ijk = g.unflatten(idx);
      T acc{};
      bool bad = false;
      for (std::size_t k = 0; k < walkers.size(); ++k) {
        const auto& w = walkers[k];
        const auto taps = gather(f, w, idx, ijk[static_cast<std::size_t>(w.axis)], hw);
        bad = bad || taps.masked;
        acc += kernel(taps, g.spacing(w.axis));
      }
      if (bad) {
        out[idx] = nan_value<T>();
        mask[idx] = 1;
      } else {
        out[idx] = acc;
      }
    }
  });
  return Field<T>(g, std::move(out), f.time_label(), std::move(mask));
}

}  // namespace

template <class T>
Field<T> partial(const Field<T>& f, int axis, const StencilConfig& cfg) {
  require(axis >= 0 && axis < f.grid().dims(), ErrorKind::dimension, "axis out of range");
  return apply_axiswise(f, cfg, {axis}, [&](const Taps<T>& t, double h) { return first_derivative(t, cfg.order, h); });
}

template <class T>
VectorField<T> gradient(const Field<T>& f, const StencilConfig& cfg) {
  VectorField<T> out;
  for (int a = 0; a < f.grid().dims(); ++a) out.push_back(partial(f, a, cfg));
  return out;
}

template <class T>
Field<T> laplacian(const Field<T>& f, const StencilConfig& cfg) {
  std::vector<int> axes;
  for (int a = 0; a < f.grid().dims(); ++a) axes.push_back(a);
  return apply_axiswise(f, cfg, axes, [&](const Taps<T>& t, double h) { return second_derivative(t, cfg.order, h); });
}

template <class T>
Field<T> dalembertian(const Field<T>& previous, const Field<T>& current, const Field<T>& next, double dt,
                      const StencilConfig& cfg) {
  require(previous.grid() == current.grid() && next.grid() == current.grid(), ErrorKind::shape,
          "time slices must share a GridSpec");
  require(dt > 0.0, ErrorKind::precondition, "dalembertian needs a positive dt");
  const Field<T> lap = laplacian(current, cfg);
  const GridSpec& g = current.grid();
  std::vector<T> out(g.size());
  std::vector<std::uint8_t> mask;
  const bool any_mask = lap.has_mask() || previous.has_mask() || next.has_mask();
  if (any_mask) mask.assign(g.size(), 0);
  parallel_for(g.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      if (lap.masked(i) || previous.masked(i) || next.masked(i)) {
        out[i] = nan_value<T>();
        mask[i] = 1;
        continue;
      }
      out[i] = (next[i] - 2.0 * current[i] + previous[i]) / (dt * dt) - lap[i];
    }
  });
  return Field<T>(g, std::move(out), current.time_label(), std::move(mask));
}

ComplexField dalembertian(const FieldStack& stack, const StencilConfig& cfg) {
  stack.validate();
  return dalembertian(stack.previous, stack.current, stack.next, stack.dt, cfg);
}

RealField phase_partial(const ComplexField& f, int axis, const StencilConfig& cfg) {
  const GridSpec& g = f.grid();
  cfg.validate(g);
  require(axis >= 0 && axis < g.dims(), ErrorKind::dimension, "axis out of range");
  const AxisWalker w(g, axis);
  const double h = g.spacing(axis);
  const int hw = cfg.half_width();
  std::vector<double> out(g.size());
  std::vector<std::uint8_t> mask(g.size(), 0);
  bool any = false;
  parallel_for(g.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t idx = b; idx < e; ++idx) {
      const auto ijk = g.unflatten(idx);
      const auto t = gather(f, w, idx, ijk[static_cast<std::size_t>(axis)], hw);
      bool bad = t.masked || t.off_grid;
      for (int o = -hw; o <= hw && !bad; ++o) {
        if (o != 0 && std::abs(t.v[o + 2]) == 0.0) bad = true;
      }
      if (bad) {
        out[idx] = kNaN;
        mask[idx] = 1;
        continue;
      }
      const double d1 = std::arg(t.v[3] * std::conj(t.v[1]));
      if (cfg.order == 2) {
        out[idx] = d1 / (2.0 * h);
      } else {
        const double d2 = std::arg(t.v[4] * std::conj(t.v[0]));
        out[idx] = (8.0 * d1 - d2) / (12.0 * h);
      }
    }
  });
  for (auto m : mask) any = any || m;
  if (!any) mask.clear();
  return RealField(g, std::move(out), f.time_label(), std::move(mask));
}

RealField phase_time_derivative(const FieldStack& stack) {
  stack.validate();
  const GridSpec& g = stack.current.grid();
  std::vector<double> out(g.size());
  std::vector<std::uint8_t> mask(g.size(), 0);
  bool any = false;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Complex p = stack.next[i] * std::conj(stack.previous[i]);
    if (stack.previous.masked(i) || stack.next.masked(i) || !is_finite(p) || p == Complex{}) {
      out[i] = kNaN;
      mask[i] = 1;
      any = true;
      continue;
    }
    out[i] = std::arg(p) / (2.0 * stack.dt);
  }
  if (!any) mask.clear();
  return RealField(g, std::move(out), stack.current.time_label(), std::move(mask));
}

template Field<double> partial(const Field<double>&, int, const StencilConfig&);
template Field<Complex> partial(const Field<Complex>&, int, const StencilConfig&);
template VectorField<double> gradient(const Field<double>&, const StencilConfig&);
template VectorField<Complex> gradient(const Field<Complex>&, const StencilConfig&);
template Field<double> laplacian(const Field<double>&, const StencilConfig&);
template Field<Complex> laplacian(const Field<Complex>&, const StencilConfig&);
template Field<double> dalembertian(const Field<double>&, const Field<double>&, const Field<double>&, double,
                                    const StencilConfig&);
template Field<Complex> dalembertian(const Field<Complex>&, const Field<Complex>&, const Field<Complex>&, double,
                                     const StencilConfig&);

}  // namespace wavemech
