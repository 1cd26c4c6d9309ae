#include "wavemech/madelung.hpp"
#include "wavemech/interpolate.hpp"
#include "wavemech/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace wavemech {

std::string to_string(Regime r) { return r == Regime::relativistic ? "relativistic" : "nonrelativistic"; }

Regime regime_from_string(const std::string& s) {
  if (s == "relativistic" || s == "klein_gordon") return Regime::relativistic;
  if (s == "nonrelativistic" || s == "schrodinger") return Regime::nonrelativistic;
  fail(ErrorKind::configuration, "unknown regime '" + s + "'");
}

namespace {

RealField modulus(const ComplexField& f) {
  std::vector<double> a(f.size());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = f.masked(i) ? kNaN : std::abs(f[i]);
  return RealField(f.grid(), std::move(a), f.time_label(), f.mask());
}

RealField with_nan_outside(const RealField& f, const std::vector<std::uint8_t>& defined) {
  std::vector<double> v(f.values().begin(), f.values().end());
  std::vector<std::uint8_t> mask(v.size(), 0);
  bool any = false;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!defined[i]) {
      v[i] = kNaN;
      mask[i] = 1;
      any = true;
    }
  }
  if (!any) mask.clear();
  return RealField(f.grid(), std::move(v), f.time_label(), std::move(mask));
}

void build_spatial(PolarFields& polar, const ComplexField& field, const DecomposeOptions& opts) {
  const GridSpec& g = field.grid();
  opts.stencil.validate(g);
  polar.amplitude = modulus(field);
  double amax = 0.0;
  for (double a : polar.amplitude.values())
    if (std::isfinite(a)) amax = std::max(amax, a);
  polar.floor = opts.floor_fraction * amax;
  polar.defined.assign(g.size(), 0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double a = polar.amplitude[i];
    polar.defined[i] = std::isfinite(a) && a > polar.floor && !field.masked(i);
  }
  polar.phase_gradient.clear();
  for (int ax = 0; ax < g.dims(); ++ax) {
    RealField dS;
    if (opts.method == PhaseGradientMethod::link) {
      dS = phase_partial(field, ax, opts.stencil);
    } else {
      const ComplexField d = partial(field, ax, opts.stencil);
      std::vector<double> v(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double a2 = std::norm(field[i]);
        v[i] = a2 > 0.0 ? std::imag(std::conj(field[i]) * d[i]) / a2 : kNaN;
      }
      dS = RealField(g, std::move(v), field.time_label(), d.mask());
    }
    for (std::size_t i = 0; i < g.size(); ++i)
      if (!std::isfinite(dS[i])) polar.defined[i] = 0;
    polar.phase_gradient.push_back(std::move(dS));
  }
}

void finalize(PolarFields& polar) {
  for (auto& c : polar.phase_gradient) c = with_nan_outside(c, polar.defined);
  if (polar.phase_dt) polar.phase_dt = with_nan_outside(*polar.phase_dt, polar.defined);
}

}  // namespace

PolarFields decompose(const ComplexField& field, const FourPotential& pot, const DecomposeOptions& opts) {
  pot.validate(field.grid());
  PolarFields polar;
  build_spatial(polar, field, opts);
  polar.source = std::make_shared<const ComplexField>(field);
  finalize(polar);
  return polar;
}

PolarFields decompose(const FieldStack& stack, const FourPotential& pot, const DecomposeOptions& opts) {
  stack.validate();
  pot.validate(stack.current.grid());
  PolarFields polar;
  build_spatial(polar, stack.current, opts);
  polar.dt = stack.dt;
  polar.amplitude_previous = modulus(stack.previous);
  polar.amplitude_next = modulus(stack.next);
  const GridSpec& g = stack.current.grid();
  if (opts.method == PhaseGradientMethod::link) {
    polar.phase_dt = phase_time_derivative(stack);
  } else {
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Complex dpsi = (stack.next[i] - stack.previous[i]) / (2.0 * stack.dt);
      const double a2 = std::norm(stack.current[i]);
      v[i] = a2 > 0.0 ? std::imag(std::conj(stack.current[i]) * dpsi) / a2 : kNaN;
    }
    polar.phase_dt = RealField(g, std::move(v), stack.current.time_label());
  }
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!std::isfinite((*polar.phase_dt)[i]) || stack.previous.masked(i) || stack.next.masked(i)) polar.defined[i] = 0;
  }
  polar.source = std::make_shared<const ComplexField>(stack.current);
  polar.source_stack = std::make_shared<const FieldStack>(stack);
  finalize(polar);
  return polar;
}

KineticMomentum kinetic_momentum(const PolarFields& polar, const FourPotential& pot, std::size_t i) {
  KineticMomentum p;
  const double e = pot.charge;
  p.time = (polar.phase_dt ? (*polar.phase_dt)[i] : kNaN) + e * pot.v_at(i);
  for (int a = 0; a < polar.grid().dims(); ++a) {
    p.space[a] = polar.phase_gradient[static_cast<std::size_t>(a)][i] - e * pot.a_at(a, i);
  }
  return p;
}

namespace {

RealField box_over_amplitude(const PolarFields& polar, const StencilConfig& cfg) {
  require(polar.amplitude_previous && polar.amplitude_next, ErrorKind::precondition,
          "relativistic quantum potential needs a time stack");
  const RealField box = dalembertian(*polar.amplitude_previous, polar.amplitude, *polar.amplitude_next, polar.dt, cfg);
  std::vector<double> q(box.size());
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = polar.is_defined(i) ? box[i] / polar.amplitude[i] : kNaN;
  return with_nan_outside(RealField(polar.grid(), std::move(q), polar.amplitude.time_label()), [&] {
    std::vector<std::uint8_t> d(polar.defined);
    for (std::size_t i = 0; i < d.size(); ++i)
      if (!std::isfinite(box[i])) d[i] = 0;
    return d;
  }());
}

}  // namespace

RealField quantum_potential(const PolarFields& polar, Regime regime, double omega0, const StencilConfig& cfg) {
  require(omega0 > 0.0, ErrorKind::configuration, "omega0 must be positive");
  if (regime == Regime::relativistic) return box_over_amplitude(polar, cfg);
  const RealField lap = laplacian(polar.amplitude, cfg);
  std::vector<double> q(lap.size());
  std::vector<std::uint8_t> d(polar.defined);
  for (std::size_t i = 0; i < q.size(); ++i) {
    q[i] = -lap[i] / (2.0 * omega0 * polar.amplitude[i]);
    if (!std::isfinite(q[i])) d[i] = 0;
  }
  return with_nan_outside(RealField(polar.grid(), std::move(q), polar.amplitude.time_label()), d);
}

FlowFields velocity_fields(const PolarFields& polar, const FourPotential& pot, Regime regime, double omega0,
                           const StencilConfig& cfg) {
  require(omega0 > 0.0, ErrorKind::configuration, "omega0 must be positive");
  const GridSpec& g = polar.grid();
  const int dims = g.dims();
  const std::size_t n = g.size();
  if (regime == Regime::relativistic) {
    require(polar.has_time(), ErrorKind::precondition, "relativistic velocity needs d_t S (decompose a time stack)");
  }
  std::array<std::vector<double>, 4> v4, J;
  std::vector<std::vector<double>> v3(static_cast<std::size_t>(dims), std::vector<double>(n, kNaN));
  for (int c = 0; c <= dims; ++c) {
    v4[static_cast<std::size_t>(c)].assign(n, kNaN);
    J[static_cast<std::size_t>(c)].assign(n, kNaN);
  }
  FlowFields flow;
  flow.time = polar.amplitude.time_label();
  flow.timelike_mask.assign(n, 0);
  parallel_for(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      if (!polar.is_defined(i)) continue;
      const auto p = kinetic_momentum(polar, pot, i);
      const double a2 = polar.amplitude[i] * polar.amplitude[i];
      if (regime == Regime::relativistic) {
        const double s2 = p.time * p.time - dot(p.space, p.space);
        J[0][i] = -a2 * p.time / omega0;
        for (int a = 0; a < dims; ++a) J[static_cast<std::size_t>(a + 1)][i] = a2 * p.space[a] / omega0;
        // Spacelike points and a vanishing denominator are excluded.
        if (s2 < 0.0 || p.time == 0.0) continue;
        const double norm4 = std::sqrt(s2);
        v4[0][i] = -p.time / norm4;
        for (int a = 0; a < dims; ++a) {
          v4[static_cast<std::size_t>(a + 1)][i] = p.space[a] / norm4;
          v3[static_cast<std::size_t>(a)][i] = -p.space[a] / p.time;
        }
        flow.timelike_mask[i] = 1;
      } else {
        double v2 = 0.0;
        J[0][i] = a2;
        for (int a = 0; a < dims; ++a) {
          const double v = p.space[a] / omega0;
          v3[static_cast<std::size_t>(a)][i] = v;
          J[static_cast<std::size_t>(a + 1)][i] = a2 * v;
          v2 += v * v;
        }
        if (v2 < 1.0) {
          const double gamma = 1.0 / std::sqrt(1.0 - v2);
          v4[0][i] = gamma;
          for (int a = 0; a < dims; ++a) v4[static_cast<std::size_t>(a + 1)][i] = gamma * v3[static_cast<std::size_t>(a)][i];
        }
        flow.timelike_mask[i] = 1;
      }
    }
  });
  const double t = flow.time;
  for (int c = 0; c <= dims; ++c) {
    flow.v4[static_cast<std::size_t>(c)] = RealField(g, std::move(v4[static_cast<std::size_t>(c)]), t);
    flow.J[static_cast<std::size_t>(c)] = RealField(g, std::move(J[static_cast<std::size_t>(c)]), t);
  }
  for (int a = 0; a < dims; ++a) flow.v3.push_back(RealField(g, std::move(v3[static_cast<std::size_t>(a)]), t));
  if (regime == Regime::nonrelativistic || polar.amplitude_previous) {
    flow.Q = quantum_potential(polar, regime, omega0, cfg);
  }
  return flow;
}

RealField hj_residual(const PolarFields& polar, const FourPotential& pot, double omega0, const StencilConfig& cfg) {
  require(polar.has_time(), ErrorKind::precondition, "Hamilton-Jacobi residual needs d_t S");
  const RealField q = box_over_amplitude(polar, cfg);
  std::vector<double> r(q.size(), kNaN);
  std::vector<std::uint8_t> d(polar.defined);
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!d[i] || !std::isfinite(q[i])) {
      d[i] = 0;
      continue;
    }
    const auto p = kinetic_momentum(polar, pot, i);
    r[i] = p.time * p.time - dot(p.space, p.space) - omega0 * omega0 - q[i] - pot.chi_at(i);
  }
  return with_nan_outside(RealField(polar.grid(), std::move(r), polar.amplitude.time_label()), d);
}

namespace {

/// div(a^2 A) with the configured stencil; zero without a vector potential.
std::vector<double> div_a2_A(const ComplexField& psi, const FourPotential& pot, const StencilConfig& cfg) {
  const GridSpec& g = psi.grid();
  std::vector<double> out(g.size(), 0.0);
  if (pot.A.empty()) return out;
  for (int a = 0; a < g.dims(); ++a) {
    std::vector<double> flux(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) flux[i] = std::norm(psi[i]) * pot.a_at(a, i);
    const RealField d = partial(RealField(g, std::move(flux)), a, cfg);
    for (std::size_t i = 0; i < g.size(); ++i) out[i] += d[i];
  }
  return out;
}

}  // namespace

RealField continuity_residual(const PolarFields& polar, const FourPotential& pot, Regime regime, double omega0,
                              const StencilConfig& cfg) {
  require(polar.source_stack != nullptr, ErrorKind::precondition, "continuity residual needs a polar built from a stack");
  const FieldStack& s = *polar.source_stack;
  const GridSpec& g = s.current.grid();
  const double e = pot.charge;
  const auto divA = div_a2_A(s.current, pot, cfg);
  std::vector<double> r(g.size(), kNaN);
  std::vector<std::uint8_t> d(polar.defined);
  if (regime == Regime::relativistic) {
    const ComplexField box = dalembertian(s, cfg);
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double da2 = (std::norm(s.next[i]) - std::norm(s.previous[i])) / (2.0 * s.dt);
      r[i] = std::imag(std::conj(s.current[i]) * box[i]) + e * pot.v_at(i) * da2 + e * divA[i];
    }
  } else {
    const ComplexField lap = laplacian(s.current, cfg);
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double da2 = (std::norm(s.next[i]) - std::norm(s.previous[i])) / (2.0 * s.dt);
      r[i] = da2 + (std::imag(std::conj(s.current[i]) * lap[i]) - e * divA[i]) / omega0;
    }
  }
  // Low-amplitude points still obey the conservation law; only exclude non-finite ones.
  for (std::size_t i = 0; i < r.size(); ++i) d[i] = std::isfinite(r[i]) && !s.current.masked(i);
  return with_nan_outside(RealField(g, std::move(r), s.current.time_label()), d);
}

std::array<std::optional<RealField>, 4> current_bilinear(const FieldStack& stack, const FourPotential& pot,
                                                          double omega0, const StencilConfig& cfg) {
  stack.validate();
  const GridSpec& g = stack.current.grid();
  const Complex I(0.0, 1.0);
  const double e = pot.charge;
  std::array<std::optional<RealField>, 4> out;
  const auto& psi = stack.current;
  // D_mu psi with lower-index A_mu = (V, -A).
  auto bilinear = [&](const std::vector<Complex>& Dpsi) {
    std::vector<double> j(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Complex val = std::conj(psi[i]) * Dpsi[i] - psi[i] * std::conj(Dpsi[i]);
      j[i] = std::real(I / (2.0 * omega0) * val);
    }
    return j;
  };
  std::vector<Complex> D0(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    D0[i] = (stack.next[i] - stack.previous[i]) / (2.0 * stack.dt) + I * e * pot.v_at(i) * psi[i];
  }
  out[0] = RealField(g, bilinear(D0), psi.time_label());
  for (int a = 0; a < g.dims(); ++a) {
    const ComplexField d = partial(psi, a, cfg);
    std::vector<Complex> Di(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) Di[i] = d[i] - I * e * pot.a_at(a, i) * psi[i];
    auto lower = bilinear(Di);
    for (auto& v : lower) v = -v;  // raise the spatial index
    out[static_cast<std::size_t>(a + 1)] = RealField(g, std::move(lower), psi.time_label());
  }
  return out;
}

RealField rest_density(const PolarFields& polar, const RealField& Q, const FourPotential& pot, double omega0) {
  std::vector<double> rho(Q.size(), kNaN);
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (!polar.is_defined(i) || !std::isfinite(Q[i])) continue;
    const double arg = 1.0 + (Q[i] + pot.chi_at(i)) / (omega0 * omega0);
    if (arg >= 0.0) rho[i] = polar.amplitude[i] * polar.amplitude[i] * std::sqrt(arg);
  }
  return RealField(polar.grid(), std::move(rho), polar.amplitude.time_label());
}

GridLoop square_loop(const GridSpec& grid, const std::array<int, 3>& center, int half) {
  require(grid.dims() == 2, ErrorKind::dimension, "square loops are two-dimensional");
  require(half >= 1, ErrorKind::precondition, "loop half-width must be at least one node");
  GridLoop loop;
  const int cx = center[0], cy = center[1];
  for (int i = -half; i < half; ++i) loop.push_back({cx + i, cy - half, 0});
  for (int j = -half; j < half; ++j) loop.push_back({cx + half, cy + j, 0});
  for (int i = half; i > -half; --i) loop.push_back({cx + i, cy + half, 0});
  for (int j = half; j > -half; --j) loop.push_back({cx - half, cy + j, 0});
  for (const auto& p : loop) {
    require(p[0] >= 0 && p[0] < grid.points(0) && p[1] >= 0 && p[1] < grid.points(1), ErrorKind::out_of_bounds,
            "loop leaves the grid");
  }
  return loop;
}

double circulation(const PolarFields& polar, const GridLoop& loop) {
  const GridSpec& g = polar.grid();
  require(loop.size() >= 3, ErrorKind::precondition, "loop needs at least three nodes");
  double total = 0.0;
  const int sub = 4;
  for (std::size_t k = 0; k < loop.size(); ++k) {
    const auto& p0 = loop[k];
    const auto& p1 = loop[(k + 1) % loop.size()];
    for (const auto& p : {p0, p1}) {
      require(polar.is_defined(g.flatten(p)), ErrorKind::precondition, "loop crosses an undefined (masked) region");
    }
    int steps = 0;
    for (int d = 0; d < 3; ++d) steps += std::abs(p1[static_cast<std::size_t>(d)] - p0[static_cast<std::size_t>(d)]);
    if (polar.source && steps == 1) {
      // Neighbouring nodes: the integral of grad S is the principal phase step.
      const ComplexField& psi = *polar.source;
      total += std::arg(psi[g.flatten(p1)] * std::conj(psi[g.flatten(p0)]));
      continue;
    }
    Vec3 a, b;
    for (int d = 0; d < g.dims(); ++d) {
      a[d] = g.coord(d, p0[static_cast<std::size_t>(d)]);
      b[d] = g.coord(d, p1[static_cast<std::size_t>(d)]);
    }
    const Vec3 dx = (b - a) * (1.0 / sub);
    // Composite trapezoid on the interpolated gradient.
    for (int s = 0; s < sub; ++s) {
      const Vec3 x0 = a + dx * s;
      const Vec3 x1 = a + dx * (s + 1);
      for (int d = 0; d < g.dims(); ++d) {
        const double g0 = sample(polar.phase_gradient[static_cast<std::size_t>(d)], x0);
        const double g1 = sample(polar.phase_gradient[static_cast<std::size_t>(d)], x1);
        require(std::isfinite(g0) && std::isfinite(g1), ErrorKind::precondition,
                "loop crosses an undefined (masked) region");
        total += 0.5 * (g0 + g1) * dx[d];
      }
    }
  }
  return total;
}

}  // namespace wavemech
