#pragma once

#include "wavemech/stencil.hpp"

#include <array>

namespace wavemech {

/// True when p lies at least one cell inside every non-periodic axis.
bool interpolation_domain_contains(const GridSpec& grid, const Vec3& p);

/// Multilinear interpolation of nodal values. Periodic axes wrap; other
/// axes require interpolation_domain_contains (out_of_bounds otherwise).
/// Returns NaN when the enclosing cell touches a masked node.
template <class T>
T sample(const Field<T>& f, const Vec3& p);

template <class T>
struct InterpolatedValue {
  T value{};
  std::array<T, 3> gradient{};
};

/// Interpolates a field together with its precomputed stencil gradient.
template <class T>
class Interpolator {
 public:
  Interpolator(Field<T> field, const StencilConfig& cfg);

  InterpolatedValue<T> operator()(const Vec3& p) const;
  const Field<T>& field() const { return field_; }

 private:
  Field<T> field_;
  VectorField<T> gradient_;
};

template <class T>
InterpolatedValue<T> interpolate(const Field<T>& field, const Vec3& p, const StencilConfig& cfg) {
  return Interpolator<T>(field, cfg)(p);
}

}  // namespace wavemech
