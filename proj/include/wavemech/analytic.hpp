#pragma once

#include "wavemech/core.hpp"
#include "wavemech/vec.hpp"

#include <json.hpp>

#include <functional>
#include <string>
#include <vector>

namespace wavemech {

/// Lab-frame spacetime event x^mu = (t, x).
struct Event {
  double t = 0.0;
  Vec3 x;
};

double lorentz_factor(const Vec3& v);

/// Coordinates of `e` in the frame moving with velocity v (standard boost,
/// shared origin). Throws superluminal for |v| >= 1.
Event lorentz_boost(const Event& e, const Vec3& v);

struct RestFrameCoordinates {
  double t0 = 0.0;
  double r0 = 0.0;
  Vec3 x0;
};

/// Rest-frame time and radius of a lab event relative to a point moving
/// with velocity v through `origin` at t = 0.
RestFrameCoordinates boost_event(const Event& lab, const Vec3& v, const Vec3& origin = {});

enum class MonopoleKind { dalembert_timesym, kg_simple, kg_constrained_oscillatory, kg_constrained_evanescent };

std::string to_string(MonopoleKind k);
MonopoleKind monopole_kind_from_string(const std::string& s);

struct MonopoleSpec {
  MonopoleKind kind = MonopoleKind::kg_simple;
  double omega0 = 1.0;   // rest (Compton) pulsation
  double omega = 1.0;    // clock pulsation, constrained kinds only
  Vec3 velocity;         // uniform velocity of the singularity, |v| < 1
  Vec3 origin;           // singularity position at t = 0

  void validate() const;
  /// Pulsation the field satisfies: omega0 for kg kinds, 0 for d'Alembert.
  double wave_mass() const;
};

/// Closed-form monopole evaluated at a lab event. The d'Alembert solution
/// is assembled as the half-retarded, half-advanced pair.
Complex eval_monopole(const MonopoleSpec& spec, const Event& x);

/// Phase wave e^{i phi}, phi = -omega t + k.x.
struct PlanePhaseWave {
  double omega = 1.0;
  Vec3 k;
  double omega0 = 1.0;

  /// omega = gamma omega0, k = omega v.
  static PlanePhaseWave from_boost(double omega0, const Vec3& v);

  double phase(const Event& x) const;
  Complex value(const Event& x) const;
  double dispersion_residual() const;  // omega^2 - |k|^2 - omega0^2
  Vec3 group_velocity() const;         // k / omega
  /// Pulsation of the phase read at the moving particle, omega0 / gamma.
  double clock_pulsation() const;
};

double boost_phase(const PlanePhaseWave& wave, const Event& x);

/// Radial Helmholtz solution of grad'^2 H + (B - A^2) H = 0 with
/// lim r' H = C, and G' = H exp(-A.x').
struct HelmholtzValue {
  Complex H;
  Complex G;
};

HelmholtzValue helmholtz_multipole(double B, const Vec3& A, const Vec3& x_prime, double C = 1.0);

// ---------------------------------------------------------------------------
// Residual oracle

enum class WaveOperator { dalembert, klein_gordon, klein_gordon_with_potentials };

std::string to_string(WaveOperator op);

using SpacetimeFunction = std::function<Complex(const Event&)>;

struct PotentialFunctions {
  std::function<double(const Event&)> V;
  std::function<Vec3(const Event&)> A;
  std::function<double(const Event&)> chi;
  double charge = 0.0;
};

/// Applies the chosen operator with second-order central differences of
/// step h in space and time_ratio*h in time:
///   dalembert:  box u
///   klein_gordon: box u + Omega^2 u
///   with potentials: (d + ieA)(d + ieA) u + (chi + Omega^2) u
Complex apply_wave_operator(const SpacetimeFunction& u, WaveOperator op, double Omega, const PotentialFunctions& pot,
                            const Event& at, int spatial_dims, double h, double time_ratio = 1.0);

struct ResidualRegion {
  std::vector<Event> samples;
  /// Singular world-line, if any; samples must stay clear of it by at least
  /// `exclusion` plus the stencil reach.
  std::function<Vec3(double)> singular_path;
  double exclusion = 0.0;
};

/// Deterministic samples in the shell r_in <= |x - center| <= r_out at time t.
ResidualRegion annulus_region(const Vec3& center, double r_in, double r_out, int count, int spatial_dims, double t);

struct ConvergenceReport {
  std::string op;
  std::vector<double> h_values;
  std::vector<double> residuals;  // max |residual| over the region per h
  double fitted_order = 0.0;      // least-squares slope of log residual vs log h

  nlohmann::json to_json() const;
};

ConvergenceReport residual_oracle(const SpacetimeFunction& solution, WaveOperator op, double Omega,
                                  const PotentialFunctions& pot, const ResidualRegion& region,
                                  const std::vector<double>& h_values, int spatial_dims, double time_ratio = 1.0);

}  // namespace wavemech
