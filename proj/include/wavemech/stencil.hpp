#pragma once

#include "wavemech/field.hpp"

namespace wavemech {

/// Central-difference accuracy and the exclusion radius around declared
/// singular points.
struct StencilConfig {
  int order = 2;                   // 2 or 4
  double exclusion_radius = 0.0;   // epsilon, length units

  int half_width() const { return order / 2; }
  /// order in {2,4}; epsilon >= 2 max h whenever a singular mask is active.
  void validate(const GridSpec& grid, bool singular_mask_active = false) const;
};

/// First derivative along one axis. Off-grid neighbours wrap under periodic
/// boundaries and read as zero otherwise.
template <class T>
Field<T> partial(const Field<T>& f, int axis, const StencilConfig& cfg);

template <class T>
VectorField<T> gradient(const Field<T>& f, const StencilConfig& cfg);

template <class T>
Field<T> laplacian(const Field<T>& f, const StencilConfig& cfg);

/// Second-order central time difference minus the spatial Laplacian,
/// evaluated on the middle slice.
template <class T>
Field<T> dalembertian(const Field<T>& previous, const Field<T>& current, const Field<T>& next, double dt,
                      const StencilConfig& cfg);

ComplexField dalembertian(const FieldStack& stack, const StencilConfig& cfg);

/// Phase derivative from neighbour products, arg(psi[i+1] conj(psi[i-1]))/2h
/// (and the matching five-point form at order 4). Amplitudes cancel exactly,
/// so the result stays accurate next to amplitude singularities. Nodes whose
/// stencil leaves a non-periodic grid, or touches a zero, are masked.
RealField phase_partial(const ComplexField& f, int axis, const StencilConfig& cfg);

/// Same construction across a time stack: d(phase)/dt on the middle slice.
RealField phase_time_derivative(const FieldStack& stack);

}  // namespace wavemech
