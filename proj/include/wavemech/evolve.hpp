#pragma once

#include "wavemech/potential.hpp"

#include <optional>
#include <string>

namespace wavemech {

enum class EvolutionRegime { schrodinger, klein_gordon };

std::string to_string(EvolutionRegime r);

/// Snapshot of a propagation. `previous` is used by the Klein-Gordon scheme
/// only and sits at time t - previous_offset.
struct EvolutionState {
  EvolutionRegime regime = EvolutionRegime::schrodinger;
  ComplexField current;
  std::optional<ComplexField> previous;
  double previous_offset = 0.0;
  double t = 0.0;
  /// Klein-Gordon only: the field holds w = r u on a radial grid r >= 0.
  bool radial = false;

  const GridSpec& grid() const { return current.grid(); }
};

/// i d_t psi = -lap psi / (2m) + (eV + chi/(2m)) psi.
struct SchrodingerConfig {
  double mass = 1.0;
  /// Laplacian accuracy; 4 is available in one dimension.
  int order = 2;
};

/// One Crank-Nicolson step (Strang-split X(dt/2) Y(dt) X(dt/2) in 2D). Every
/// factor is a Cayley transform, so the discrete norm is conserved and a step
/// of -dt undoes a step of dt. Absorbing boundaries multiply by a mask after
/// the step. Throws `diverged` on non-finite output.
EvolutionState schrodinger_step(const EvolutionState& state, const FourPotential& pot, double dt,
                                const SchrodingerConfig& cfg = {});

struct KleinGordonConfig {
  double Omega = 1.0;
  int order = 2;
};

/// Leapfrog for (d + ieA)(d + ieA)u = -(chi + Omega^2)u with static
/// potentials. The eV d_t u term is centred, so the update is a pointwise
/// division. When the previous slice lies at t + dt the step is the exact
/// reversal of the preceding one. Throws `configuration` when
/// dt >= h_min / sqrt(dims).
EvolutionState klein_gordon_step(const EvolutionState& state, const FourPotential& pot, double dt,
                                 const KleinGordonConfig& cfg = {});

/// Two-slice start from u(0) and d_t u(0) through a second-order Taylor
/// expansion of the equation of motion.
EvolutionState klein_gordon_start(const ComplexField& u0, const ComplexField& ut0, const FourPotential& pot, double dt,
                                  const KleinGordonConfig& cfg = {}, bool radial = false);

/// Right-hand side of the Klein-Gordon update (everything except the eV d_t u
/// term). Exposed for energy bookkeeping and tests.
ComplexField klein_gordon_operator(const ComplexField& u, const FourPotential& pot, const KleinGordonConfig& cfg,
                                   bool radial);

struct Diagnostics {
  double norm = 0.0;      // integral of |psi|^2
  double energy = kNaN;   // Klein-Gordon discrete energy (free part)
  double max_amplitude = 0.0;
  Vec3 center_of_mass;
};

/// The Klein-Gordon energy uses the slices at t and t - previous_offset and
/// is exactly conserved by the leapfrog scheme when A = V = 0.
Diagnostics diagnostics(const EvolutionState& state, const KleinGordonConfig& cfg = {});

/// cos^(1/8) ramp over the outer 10% of each non-periodic axis, 1 inside.
std::vector<double> absorbing_mask(const GridSpec& grid);

// Initial conditions.

/// (2 pi sigma^2)^(-d/4) exp(-|x - c|^2 / (4 sigma^2) + i k.x), so |psi|^2 has
/// standard deviation sigma per axis.
ComplexField gaussian_packet(const GridSpec& grid, const Vec3& center, double sigma, const Vec3& k);

/// Exact free evolution of `gaussian_packet` at time t for mass m.
Complex free_gaussian_exact(const Vec3& x, double t, int dims, const Vec3& center, double sigma, const Vec3& k,
                            double mass);

/// sigma(t) = sigma0 sqrt(1 + t^2 / (4 m^2 sigma0^4)).
double free_gaussian_width(double sigma0, double t, double mass);

/// Equal-phase superposition of two packets, normalised on the grid.
ComplexField double_gaussian(const GridSpec& grid, const Vec3& c1, const Vec3& c2, double sigma, const Vec3& k);

ComplexField plane_wave(const GridSpec& grid, const Vec3& k, Complex amplitude = 1.0);

/// prod_i (m w / pi)^(1/4) exp(-m w x_i^2 / 2).
ComplexField oscillator_ground_state(const GridSpec& grid, double mass, double omega);

/// V = m w^2 |x|^2 / 2 with charge 1.
FourPotential oscillator_potential(const GridSpec& grid, double mass, double omega);

}  // namespace wavemech
