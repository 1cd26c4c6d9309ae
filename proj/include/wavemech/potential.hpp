#pragma once

#include "wavemech/field.hpp"

#include <optional>

namespace wavemech {

/// External electromagnetic four-potential A^mu = (V, A) plus the scalar
/// potential chi, static on the grid. Absent components are zero.
struct FourPotential {
  std::optional<RealField> V;
  std::vector<RealField> A;  // empty, or one component per axis
  std::optional<RealField> chi;
  double charge = 0.0;

  static FourPotential none() { return {}; }

  double v_at(std::size_t i) const { return V ? (*V)[i] : 0.0; }
  double chi_at(std::size_t i) const { return chi ? (*chi)[i] : 0.0; }
  double a_at(int axis, std::size_t i) const {
    return A.empty() ? 0.0 : A[static_cast<std::size_t>(axis)][i];
  }
  bool has_vector_potential() const { return !A.empty() && charge != 0.0; }
  bool has_electric_potential() const { return V.has_value() && charge != 0.0; }

  /// Checks grid agreement and finiteness of every component.
  void validate(const GridSpec& grid) const;
};

}  // namespace wavemech
