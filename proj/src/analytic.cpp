#include "wavemech/analytic.hpp"
#include "wavemech/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace wavemech {

double lorentz_factor(const Vec3& v) {
  const double v2 = dot(v, v);
  require(v2 < 1.0, ErrorKind::superluminal, "superluminal boost: |v| must be < 1");
  return 1.0 / std::sqrt(1.0 - v2);
}

Event lorentz_boost(const Event& e, const Vec3& v) {
  const double gamma = lorentz_factor(v);
  const double v2 = dot(v, v);
  if (v2 == 0.0) return e;
  const double vx = dot(v, e.x);
  Event out;
  out.t = gamma * (e.t - vx);
  out.x = e.x + v * ((gamma - 1.0) * vx / v2 - gamma * e.t);
  return out;
}

RestFrameCoordinates boost_event(const Event& lab, const Vec3& v, const Vec3& origin) {
  const Event rest = lorentz_boost(Event{lab.t, lab.x - origin}, v);
  return RestFrameCoordinates{rest.t, norm(rest.x), rest.x};
}

std::string to_string(MonopoleKind k) {
  switch (k) {
    case MonopoleKind::dalembert_timesym: return "dalembert_timesym";
    case MonopoleKind::kg_simple: return "kg_simple";
    case MonopoleKind::kg_constrained_oscillatory: return "kg_constrained_oscillatory";
    case MonopoleKind::kg_constrained_evanescent: return "kg_constrained_evanescent";
  }
  return "kg_simple";
}

MonopoleKind monopole_kind_from_string(const std::string& s) {
  for (auto k : {MonopoleKind::dalembert_timesym, MonopoleKind::kg_simple, MonopoleKind::kg_constrained_oscillatory,
                 MonopoleKind::kg_constrained_evanescent}) {
    if (to_string(k) == s) return k;
  }
  fail(ErrorKind::configuration, "unknown monopole kind '" + s + "'");
}

void MonopoleSpec::validate() const {
  require(omega0 > 0.0, ErrorKind::configuration, "omega0 must be positive");
  lorentz_factor(velocity);
  if (kind == MonopoleKind::kg_constrained_oscillatory) {
    require(omega > 0.0 && omega >= omega0, ErrorKind::configuration, "oscillatory monopole needs omega >= omega0");
  }
  if (kind == MonopoleKind::kg_constrained_evanescent) {
    require(omega > 0.0 && omega <= omega0, ErrorKind::configuration, "evanescent monopole needs omega <= omega0");
  }
}

double MonopoleSpec::wave_mass() const { return kind == MonopoleKind::dalembert_timesym ? 0.0 : omega0; }

Complex eval_monopole(const MonopoleSpec& spec, const Event& x) {
  spec.validate();
  const auto rest = boost_event(x, spec.velocity, spec.origin);
  require(rest.r0 > 0.0, ErrorKind::singularity, "event lies on the singular world-line");
  const double r0 = rest.r0;
  const double norm4pi = 1.0 / (4.0 * kPi * r0);
  const Complex i(0.0, 1.0);
  switch (spec.kind) {
    case MonopoleKind::dalembert_timesym: {
      const Complex retarded = std::exp(i * spec.omega0 * r0) * norm4pi;
      const Complex advanced = std::exp(-i * spec.omega0 * r0) * norm4pi;
      return std::exp(-i * spec.omega0 * rest.t0) * 0.5 * (retarded + advanced);
    }
    case MonopoleKind::kg_simple:
      return std::exp(-i * spec.omega0 * rest.t0) * norm4pi;
    case MonopoleKind::kg_constrained_oscillatory: {
      const double kappa = std::sqrt(spec.omega * spec.omega - spec.omega0 * spec.omega0);
      return std::exp(-i * spec.omega * rest.t0) * std::cos(kappa * r0) * norm4pi;
    }
    case MonopoleKind::kg_constrained_evanescent: {
      const double kappa = std::sqrt(spec.omega0 * spec.omega0 - spec.omega * spec.omega);
      return std::exp(-i * spec.omega * rest.t0) * std::exp(-kappa * r0) * norm4pi;
    }
  }
  return {};
}

PlanePhaseWave PlanePhaseWave::from_boost(double omega0, const Vec3& v) {
  require(omega0 > 0.0, ErrorKind::configuration, "omega0 must be positive");
  const double gamma = lorentz_factor(v);
  PlanePhaseWave w;
  w.omega0 = omega0;
  w.omega = gamma * omega0;
  w.k = v * w.omega;
  return w;
}

double PlanePhaseWave::phase(const Event& x) const { return -omega * x.t + dot(k, x.x); }

Complex PlanePhaseWave::value(const Event& x) const { return std::polar(1.0, phase(x)); }

double PlanePhaseWave::dispersion_residual() const { return omega * omega - dot(k, k) - omega0 * omega0; }

Vec3 PlanePhaseWave::group_velocity() const { return k * (1.0 / omega); }

double PlanePhaseWave::clock_pulsation() const { return omega0 / lorentz_factor(group_velocity()); }

double boost_phase(const PlanePhaseWave& wave, const Event& x) { return wave.phase(x); }

HelmholtzValue helmholtz_multipole(double B, const Vec3& A, const Vec3& x_prime, double C) {
  const double r = norm(x_prime);
  require(r > 0.0, ErrorKind::singularity, "helmholtz multipole is singular at r' = 0");
  const double d = B - dot(A, A);
  double h = 0.0;
  if (d >= 0.0) {
    h = C * std::cos(std::sqrt(d) * r) / r;
  } else {
    h = C * std::exp(-std::sqrt(-d) * r) / r;
  }
  const double g = h * std::exp(-dot(A, x_prime));
  return HelmholtzValue{Complex(h, 0.0), Complex(g, 0.0)};
}

std::string to_string(WaveOperator op) {
  switch (op) {
    case WaveOperator::dalembert: return "dalembert";
    case WaveOperator::klein_gordon: return "klein_gordon";
    case WaveOperator::klein_gordon_with_potentials: return "klein_gordon_with_potentials";
  }
  return "dalembert";
}

Complex apply_wave_operator(const SpacetimeFunction& u, WaveOperator op, double Omega, const PotentialFunctions& pot,
                            const Event& at, int spatial_dims, double h, double time_ratio) {
  const double dt = time_ratio * h;
  const Complex u0 = u(at);
  const Complex up = u(Event{at.t + dt, at.x});
  const Complex um = u(Event{at.t - dt, at.x});
  const Complex utt = (up - 2.0 * u0 + um) / (dt * dt);
  const Complex ut = (up - um) / (2.0 * dt);
  Complex lap{};
  std::array<Complex, 3> grad{};
  for (int a = 0; a < spatial_dims; ++a) {
    Event ep = at, em = at;
    ep.x[a] += h;
    em.x[a] -= h;
    const Complex fp = u(ep), fm = u(em);
    lap += (fp - 2.0 * u0 + fm) / (h * h);
    grad[static_cast<std::size_t>(a)] = (fp - fm) / (2.0 * h);
  }
  Complex box = utt - lap;
  if (op == WaveOperator::dalembert) return box;
  if (op == WaveOperator::klein_gordon) return box + Omega * Omega * u0;

  const Complex i(0.0, 1.0);
  const double e = pot.charge;
  const double V = pot.V ? pot.V(at) : 0.0;
  const double chi = pot.chi ? pot.chi(at) : 0.0;
  const Vec3 A = pot.A ? pot.A(at) : Vec3{};
  double dVdt = 0.0, divA = 0.0;
  if (pot.V) dVdt = (pot.V(Event{at.t + dt, at.x}) - pot.V(Event{at.t - dt, at.x})) / (2.0 * dt);
  if (pot.A) {
    for (int a = 0; a < spatial_dims; ++a) {
      Event ep = at, em = at;
      ep.x[a] += h;
      em.x[a] -= h;
      divA += (pot.A(ep)[a] - pot.A(em)[a]) / (2.0 * h);
    }
  }
  // (d_t + ieV)^2 u - (grad - ieA)^2 u
  Complex temporal = utt + 2.0 * i * e * V * ut + i * e * dVdt * u0 - e * e * V * V * u0;
  Complex a_dot_grad{};
  for (int a = 0; a < spatial_dims; ++a) a_dot_grad += A[a] * grad[static_cast<std::size_t>(a)];
  Complex spatial = lap - 2.0 * i * e * a_dot_grad - i * e * divA * u0 - e * e * dot(A, A) * u0;
  return temporal - spatial + (chi + Omega * Omega) * u0;
}

ResidualRegion annulus_region(const Vec3& center, double r_in, double r_out, int count, int spatial_dims, double t) {
  require(r_out > r_in && r_in >= 0.0, ErrorKind::precondition, "annulus needs r_out > r_in >= 0");
  ResidualRegion region;
  const auto dirs = shell_directions(spatial_dims, std::max(count, 2));
  const int shells = 5;
  for (int s = 0; s < shells; ++s) {
    const double r = r_in + (r_out - r_in) * s / (shells - 1);
    for (std::size_t k = 0; k < dirs.size(); ++k) {
      // Rotate successive shells so samples do not line up radially.
      const Vec3& d = dirs[(k + static_cast<std::size_t>(s) * 7) % dirs.size()];
      region.samples.push_back(Event{t, center + d * r});
    }
  }
  return region;
}

nlohmann::json ConvergenceReport::to_json() const {
  return nlohmann::json{{"operator", op}, {"h_values", h_values}, {"residuals", residuals}, {"fitted_order", fitted_order}};
}

ConvergenceReport residual_oracle(const SpacetimeFunction& solution, WaveOperator op, double Omega,
                                  const PotentialFunctions& pot, const ResidualRegion& region,
                                  const std::vector<double>& h_values, int spatial_dims, double time_ratio) {
  require(!h_values.empty(), ErrorKind::precondition, "residual oracle needs at least one h");
  require(!region.samples.empty(), ErrorKind::precondition, "residual region is empty");
  const double hmax = *std::max_element(h_values.begin(), h_values.end());
  if (region.singular_path) {
    const double reach = hmax * std::sqrt(static_cast<double>(spatial_dims)) + hmax * time_ratio;
    for (const auto& ev : region.samples) {
      // The time stencil moves the singularity too.
      for (double s : {-1.0, 0.0, 1.0}) {
        const double t = ev.t + s * time_ratio * hmax;
        const double d = norm(ev.x - region.singular_path(t));
        require(d >= region.exclusion && d > reach, ErrorKind::precondition,
                "residual region intersects the singular exclusion zone");
      }
    }
  }
  ConvergenceReport rep;
  rep.op = to_string(op);
  rep.h_values = h_values;
  for (double h : h_values) {
    double worst = 0.0;
    for (const auto& ev : region.samples) {
      worst = std::max(worst, std::abs(apply_wave_operator(solution, op, Omega, pot, ev, spatial_dims, h, time_ratio)));
    }
    rep.residuals.push_back(worst);
  }
  rep.fitted_order = h_values.size() >= 2 ? loglog_slope(rep.h_values, rep.residuals) : 0.0;
  return rep;
}

}  // namespace wavemech
