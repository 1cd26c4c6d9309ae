#pragma once

#include "wavemech/grid.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

namespace wavemech {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <class T>
inline T nan_value() {
  if constexpr (std::is_same_v<T, Complex>) {
    return Complex(kNaN, kNaN);
  } else {
    return kNaN;
  }
}

inline bool is_finite(double v) { return std::isfinite(v); }
inline bool is_finite(const Complex& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }

/// A scalar sampled on every node of a grid at one time. Immutable once
/// built. The optional mask flags excluded nodes (singular cells, stencils
/// touching them); masked values are NaN.
template <class T>
class Field {
 public:
  Field() = default;
  Field(GridSpec grid, std::vector<T> values, double time_label = 0.0, std::vector<std::uint8_t> mask = {})
      : grid_(std::move(grid)), values_(std::move(values)), time_(time_label), mask_(std::move(mask)) {
    require(values_.size() == grid_.size(), ErrorKind::shape, "field value count does not match grid");
    require(mask_.empty() || mask_.size() == grid_.size(), ErrorKind::shape, "mask size does not match grid");
  }

  static Field constant(const GridSpec& grid, T value, double time_label = 0.0) {
    return Field(grid, std::vector<T>(grid.size(), value), time_label);
  }

  /// Samples fn(position) on every node.
  template <class Fn>
  static Field generate(const GridSpec& grid, Fn&& fn, double time_label = 0.0) {
    std::vector<T> v(grid.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(grid.position(i));
    return Field(grid, std::move(v), time_label);
  }

  const GridSpec& grid() const { return grid_; }
  std::span<const T> values() const { return values_; }
  const T& operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }
  double time_label() const { return time_; }

  bool has_mask() const { return !mask_.empty(); }
  bool masked(std::size_t i) const { return !mask_.empty() && mask_[i] != 0; }
  const std::vector<std::uint8_t>& mask() const { return mask_; }

  Field with_time(double t) const { return Field(grid_, values_, t, mask_); }

 private:
  GridSpec grid_;
  std::vector<T> values_;
  double time_ = 0.0;
  std::vector<std::uint8_t> mask_;
};

using ComplexField = Field<Complex>;
using ScalarComplexField = ComplexField;
using RealField = Field<double>;

/// One component per spatial axis.
template <class T>
using VectorField = std::vector<Field<T>>;

/// Three consecutive time slices sharing a grid, spaced by a uniform dt.
struct FieldStack {
  ComplexField previous;
  ComplexField current;
  ComplexField next;
  double dt = 0.0;

  /// Throws shape/precondition errors when the slices disagree.
  void validate() const;
};

inline void FieldStack::validate() const {
  require(previous.grid() == current.grid() && next.grid() == current.grid(), ErrorKind::shape,
          "time slices must share a GridSpec");
  require(dt > 0.0, ErrorKind::precondition, "time stack needs a positive uniform dt");
}

}  // namespace wavemech
