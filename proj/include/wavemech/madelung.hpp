#pragma once

#include "wavemech/potential.hpp"
#include "wavemech/stencil.hpp"

#include <array>
#include <memory>
#include <optional>

namespace wavemech {

enum class Regime { relativistic, nonrelativistic };

std::string to_string(Regime r);
Regime regime_from_string(const std::string& s);

/// How phase derivatives are taken. `bilinear` is Im(psi* d psi)/|psi|^2;
/// `link` differences the phase through neighbour products (exact on linear
/// phases and blind to the amplitude, which is what singular u-waves need).
enum class PhaseGradientMethod { bilinear, link };

struct DecomposeOptions {
  StencilConfig stencil;
  /// Points with a < floor_fraction * max(a) are undefined.
  double floor_fraction = 1e-8;
  PhaseGradientMethod method = PhaseGradientMethod::bilinear;
};

/// Amplitude and phase-gradient content of a complex field, Psi = a e^{iS}.
struct PolarFields {
  RealField amplitude;
  std::optional<RealField> amplitude_previous;
  std::optional<RealField> amplitude_next;
  std::optional<RealField> phase_dt;          // d_t S, only when built from a time stack
  std::vector<RealField> phase_gradient;      // grad S, one per axis
  std::vector<std::uint8_t> defined;          // 1 where a > floor and all derivatives are finite
  double floor = 0.0;
  double dt = 0.0;
  std::shared_ptr<const ComplexField> source;
  std::shared_ptr<const FieldStack> source_stack;

  bool has_time() const { return phase_dt.has_value(); }
  bool is_defined(std::size_t i) const { return defined[i] != 0; }
  const GridSpec& grid() const { return amplitude.grid(); }
};

PolarFields decompose(const ComplexField& field, const FourPotential& pot, const DecomposeOptions& opts = {});
PolarFields decompose(const FieldStack& stack, const FourPotential& pot, const DecomposeOptions& opts = {});

/// Kinetic four-momentum at a node: pi_0 = d_t S + eV, pi = grad S - eA.
struct KineticMomentum {
  double time = 0.0;
  Vec3 space;
};
KineticMomentum kinetic_momentum(const PolarFields& polar, const FourPotential& pot, std::size_t i);

/// Relativistic: box a / a (needs a time stack). Nonrelativistic:
/// -lap a / (2 m a) with m = omega0. Undefined points are masked (NaN).
RealField quantum_potential(const PolarFields& polar, Regime regime, double omega0, const StencilConfig& cfg = {});

struct FlowFields {
  std::array<std::optional<RealField>, 4> v4;  // unit 4-velocity (t, x, y, z)
  std::vector<RealField> v3;                   // 3-velocity per axis
  std::array<std::optional<RealField>, 4> J;   // contravariant current
  std::optional<RealField> Q;
  std::vector<std::uint8_t> timelike_mask;     // 1 where (dS + eA)^2 >= 0 and defined
  double time = 0.0;

  const GridSpec& grid() const { return v3.front().grid(); }
};

/// Relativistic: v4 = -(dS + eA)/sqrt[(dS + eA)^2], v3 = -(grad S - eA)/(d_t S + eV),
/// J = -(a^2/omega0)(dS + eA). Nonrelativistic: v3 = (grad S - eA)/m, J = (a^2, a^2 v3).
/// Spacelike or undefined points are excluded through timelike_mask.
FlowFields velocity_fields(const PolarFields& polar, const FourPotential& pot, Regime regime, double omega0,
                           const StencilConfig& cfg = {});

/// (dS + eA)^2 - omega0^2 - box a / a - chi.
RealField hj_residual(const PolarFields& polar, const FourPotential& pot, double omega0, const StencilConfig& cfg = {});

/// Relativistic: d_mu[a^2 (d^mu S + eA^mu)], assembled on the time stack as
/// Im(psi* box psi) + eV d_t a^2 + e div(a^2 A). Nonrelativistic:
/// d_t a^2 + div[a^2 (grad S - eA)/m]. Needs a polar built from a stack.
RealField continuity_residual(const PolarFields& polar, const FourPotential& pot, Regime regime, double omega0,
                              const StencilConfig& cfg = {});

/// J^mu from the bilinear (i/2 omega0) psi* D<-> psi with D = d + ieA,
/// contravariant components (t, x, y, z).
std::array<std::optional<RealField>, 4> current_bilinear(const FieldStack& stack, const FourPotential& pot,
                                                          double omega0, const StencilConfig& cfg = {});

/// Comoving density rho0 = a^2 sqrt(1 + (Q + chi)/omega0^2).
RealField rest_density(const PolarFields& polar, const RealField& Q, const FourPotential& pot, double omega0);

/// Closed polyline of grid nodes; the last node connects back to the first.
using GridLoop = std::vector<std::array<int, 3>>;

/// Axis-aligned square loop (2D) of half-width `half` nodes around `center`.
GridLoop square_loop(const GridSpec& grid, const std::array<int, 3>& center, int half);

/// Line integral of grad S around the loop. Steps between neighbouring
/// nodes use the principal phase difference of the source field, so a
/// loop around a winding-w vortex gives exactly 2 pi w; longer segments
/// integrate the interpolated gradient. Throws precondition if the loop
/// touches an undefined point.
double circulation(const PolarFields& polar, const GridLoop& loop);

}  // namespace wavemech
