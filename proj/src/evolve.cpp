#include "wavemech/evolve.hpp"
#include "wavemech/parallel.hpp"
#include "wavemech/stencil.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>

namespace wavemech {

std::string to_string(EvolutionRegime r) { return r == EvolutionRegime::schrodinger ? "schrodinger" : "klein_gordon"; }

namespace {

constexpr Complex I(0.0, 1.0);

void check_finite(const std::vector<Complex>& v, double t) {
  for (const auto& z : v) {
    if (!is_finite(z)) fail(ErrorKind::diverged, "non-finite field value after step ending at t=" + std::to_string(t));
  }
}

std::vector<double> effective_potential(const GridSpec& g, const FourPotential& pot, double mass) {
  std::vector<double> w(g.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = pot.charge * pot.v_at(i) + pot.chi_at(i) / (2.0 * mass);
  return w;
}

/// Solves a tridiagonal system with constant off-diagonal `off`; `diag` and
/// `rhs` are overwritten (rhs holds the solution).
void thomas(Complex off, std::vector<Complex>& diag, std::vector<Complex>& rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    const Complex m = off / diag[i - 1];
    diag[i] -= m * off;
    rhs[i] -= m * rhs[i - 1];
  }
  rhs[n - 1] /= diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - off * rhs[i + 1]) / diag[i];
}

/// Periodic variant through Sherman-Morrison on the corner entries.
void cyclic_thomas(Complex off, const std::vector<Complex>& diag, std::vector<Complex>& rhs) {
  const std::size_t n = diag.size();
  const Complex gamma = -diag[0];
  std::vector<Complex> bb(diag);
  bb[0] -= gamma;
  bb[n - 1] -= off * off / gamma;
  std::vector<Complex> bb2(bb);
  std::vector<Complex> u(n, 0.0);
  u[0] = gamma;
  u[n - 1] = off;
  thomas(off, bb, rhs);
  thomas(off, bb2, u);
  const Complex fact = (rhs[0] + off * rhs[n - 1] / gamma) / (1.0 + u[0] + off * u[n - 1] / gamma);
  for (std::size_t i = 0; i < n; ++i) rhs[i] -= fact * u[i];
}

/// Cayley factor (1 + i tau H/2)^{-1}(1 - i tau H/2) along one line, with
/// H = -d^2/(2m dx^2) + weight * W, in place.
void cayley_line(std::vector<Complex>& line, const std::vector<double>& W, double weight, double tau, double h,
                 double mass, bool periodic) {
  const std::size_t n = line.size();
  const double kin = 1.0 / (2.0 * mass * h * h);
  const Complex off = I * tau * 0.5 * (-kin);
  std::vector<Complex> diag(n), rhs(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double hjj = 2.0 * kin + weight * W[j];
    diag[j] = 1.0 + I * tau * 0.5 * hjj;
    Complex left = j > 0 ? line[j - 1] : (periodic ? line[n - 1] : Complex(0.0));
    Complex right = j + 1 < n ? line[j + 1] : (periodic ? line[0] : Complex(0.0));
    rhs[j] = (1.0 - I * tau * 0.5 * hjj) * line[j] - off * (left + right);
  }
  if (periodic) {
    cyclic_thomas(off, diag, rhs);
  } else {
    thomas(off, diag, rhs);
  }
  line = std::move(rhs);
}

void sweep_axis(std::vector<Complex>& psi, const GridSpec& g, int axis, const std::vector<double>& W, double weight,
                double tau, double mass) {
  const std::size_t n = static_cast<std::size_t>(g.points(axis));
  const std::size_t stride = g.stride(axis);
  const std::size_t lines = g.size() / n;
  const bool periodic = g.boundary == Boundary::periodic;
  const double h = g.spacing(axis);
  parallel_for(lines, [&](std::size_t b, std::size_t e) {
    std::vector<Complex> line(n);
    std::vector<double> wl(n);
    for (std::size_t l = b; l < e; ++l) {
      // Line l enumerates nodes with axis index 0; split it around the stride.
      const std::size_t base = (l / stride) * stride * n + l % stride;
      for (std::size_t j = 0; j < n; ++j) {
        line[j] = psi[base + j * stride];
        wl[j] = W[base + j * stride];
      }
      cayley_line(line, wl, weight, tau, h, mass, periodic);
      for (std::size_t j = 0; j < n; ++j) psi[base + j * stride] = line[j];
    }
  });
}

/// Full Crank-Nicolson in one dimension with a sparse LU factorisation, so
/// order-4 Laplacians and periodic wrap share one code path.
void crank_nicolson_1d(std::vector<Complex>& psi, const GridSpec& g, const std::vector<double>& W, double dt,
                       double mass, int order) {
  const int n = g.points(0);
  const double h = g.spacing(0);
  const bool periodic = g.boundary == Boundary::periodic;
  std::vector<std::pair<int, double>> taps;
  if (order == 2) {
    taps = {{-1, 1.0}, {0, -2.0}, {1, 1.0}};
  } else {
    taps = {{-2, -1.0 / 12}, {-1, 16.0 / 12}, {0, -30.0 / 12}, {1, 16.0 / 12}, {2, -1.0 / 12}};
  }
  using SpMat = Eigen::SparseMatrix<Complex>;
  std::vector<Eigen::Triplet<Complex>> plus, minus;
  for (int j = 0; j < n; ++j) {
    for (const auto& [o, c] : taps) {
      int k = j + o;
      if (k < 0 || k >= n) {
        if (!periodic) continue;
        k = (k + n) % n;
      }
      double hjk = -c / (2.0 * mass * h * h);
      if (o == 0) hjk += W[static_cast<std::size_t>(j)];
      plus.emplace_back(j, k, I * 0.5 * dt * hjk);
      minus.emplace_back(j, k, -I * 0.5 * dt * hjk);
    }
    plus.emplace_back(j, j, 1.0);
    minus.emplace_back(j, j, 1.0);
  }
  SpMat Ap(n, n), Am(n, n);
  Ap.setFromTriplets(plus.begin(), plus.end());
  Am.setFromTriplets(minus.begin(), minus.end());
  Eigen::SparseLU<SpMat> lu;
  lu.compute(Ap);
  require(lu.info() == Eigen::Success, ErrorKind::diverged, "Crank-Nicolson factorisation failed");
  Eigen::Map<Eigen::VectorXcd> v(psi.data(), n);
  const Eigen::VectorXcd rhs = Am * v;
  v = lu.solve(rhs);
}

}  // namespace

std::vector<double> absorbing_mask(const GridSpec& grid) {
  std::vector<double> m(grid.size(), 1.0);
  if (grid.boundary != Boundary::absorbing_mask) return m;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto ijk = grid.unflatten(i);
    for (int a = 0; a < grid.dims(); ++a) {
      const int n = grid.points(a);
      const double width = 0.1 * (n - 1);
      const int j = ijk[static_cast<std::size_t>(a)];
      const double d = std::min(j, n - 1 - j);
      if (d < width) m[i] *= std::pow(std::cos(0.5 * kPi * (width - d) / width), 0.125);
    }
  }
  return m;
}

EvolutionState schrodinger_step(const EvolutionState& state, const FourPotential& pot, double dt,
                                const SchrodingerConfig& cfg) {
  require(state.regime == EvolutionRegime::schrodinger, ErrorKind::precondition, "state is not a Schrodinger state");
  require(!pot.has_vector_potential(), ErrorKind::precondition, "the Schrodinger stepper takes a scalar potential only");
  require(cfg.mass > 0.0, ErrorKind::configuration, "mass must be positive");
  require(cfg.order == 2 || cfg.order == 4, ErrorKind::configuration, "Laplacian order must be 2 or 4");
  require(std::isfinite(dt) && dt != 0.0, ErrorKind::configuration, "dt must be finite and non-zero");
  const GridSpec& g = state.grid();
  pot.validate(g);
  require(cfg.order == 2 || g.dims() == 1, ErrorKind::configuration, "order-4 Schrodinger stepping is one-dimensional");
  const auto W = effective_potential(g, pot, cfg.mass);
  std::vector<Complex> psi(state.current.values().begin(), state.current.values().end());
  if (g.dims() == 1) {
    crank_nicolson_1d(psi, g, W, dt, cfg.mass, cfg.order);
  } else {
    const double weight = 1.0 / g.dims();
    const int last = g.dims() - 1;
    for (int a = 0; a < last; ++a) sweep_axis(psi, g, a, W, weight, 0.5 * dt, cfg.mass);
    sweep_axis(psi, g, last, W, weight, dt, cfg.mass);
    for (int a = last - 1; a >= 0; --a) sweep_axis(psi, g, a, W, weight, 0.5 * dt, cfg.mass);
  }
  if (g.boundary == Boundary::absorbing_mask) {
    const auto m = absorbing_mask(g);
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= m[i];
  }
  check_finite(psi, state.t + dt);
  EvolutionState out;
  out.regime = EvolutionRegime::schrodinger;
  out.t = state.t + dt;
  out.current = ComplexField(g, std::move(psi), out.t);
  return out;
}

ComplexField klein_gordon_operator(const ComplexField& u, const FourPotential& pot, const KleinGordonConfig& cfg,
                                   bool radial) {
  const GridSpec& g = u.grid();
  StencilConfig sc;
  sc.order = cfg.order;
  const ComplexField lap = laplacian(u, sc);
  const double e = pot.charge;
  std::vector<Complex> out(g.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double V = pot.v_at(i);
    out[i] = lap[i] + (e * e * V * V - pot.chi_at(i) - cfg.Omega * cfg.Omega) * u[i];
  }
  if (pot.has_vector_potential()) {
    require(!radial, ErrorKind::precondition, "the radial Klein-Gordon reduction takes no vector potential");
    for (int a = 0; a < g.dims(); ++a) {
      const RealField divA = partial(pot.A[static_cast<std::size_t>(a)], a, sc);
      const ComplexField du = partial(u, a, sc);
      for (std::size_t i = 0; i < out.size(); ++i) {
        const double Aa = pot.a_at(a, i);
        out[i] += -I * e * divA[i] * u[i] - 2.0 * I * e * Aa * du[i] - e * e * Aa * Aa * u[i];
      }
    }
  }
  return ComplexField(g, std::move(out), u.time_label());
}

namespace {

void check_cfl(const GridSpec& g, double dt, bool radial) {
  require(std::isfinite(dt) && dt != 0.0, ErrorKind::configuration, "dt must be finite and non-zero");
  require(!radial || g.dims() == 1, ErrorKind::dimension, "the radial reduction lives on a one-dimensional grid");
  require(!radial || g.axes[0].min == 0.0, ErrorKind::configuration, "radial grids start at r = 0");
  const double limit = g.min_spacing() / std::sqrt(static_cast<double>(g.dims()));
  require(std::abs(dt) < limit, ErrorKind::configuration,
          "CFL violated: |dt|=" + std::to_string(std::abs(dt)) + " must be below " + std::to_string(limit));
}

bool close(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); }

}  // namespace

EvolutionState klein_gordon_step(const EvolutionState& state, const FourPotential& pot, double dt,
                                 const KleinGordonConfig& cfg) {
  require(state.regime == EvolutionRegime::klein_gordon && state.previous, ErrorKind::precondition,
          "state is not a two-slice Klein-Gordon state");
  const GridSpec& g = state.grid();
  check_cfl(g, dt, state.radial);
  pot.validate(g);
  EvolutionState out;
  out.regime = EvolutionRegime::klein_gordon;
  out.radial = state.radial;
  out.t = state.t + dt;
  out.previous_offset = dt;
  if (close(state.previous_offset, -dt)) {
    out.current = state.previous->with_time(out.t);
    out.previous = state.current;
    return out;
  }
  require(close(state.previous_offset, dt), ErrorKind::precondition,
          "previous slice spacing does not match dt; restart with klein_gordon_start");
  const ComplexField L = klein_gordon_operator(state.current, pot, cfg, state.radial);
  const double e = pot.charge;
  const auto& u = state.current;
  const auto& up = *state.previous;
  std::vector<Complex> next(g.size());
  for (std::size_t i = 0; i < next.size(); ++i) {
    const Complex damp = I * e * pot.v_at(i) * dt;
    next[i] = (2.0 * u[i] - up[i] * (1.0 - damp) + dt * dt * L[i]) / (1.0 + damp);
  }
  std::vector<Complex> cur(u.values().begin(), u.values().end());
  if (state.radial) next[0] = 0.0;
  if (g.boundary == Boundary::absorbing_mask) {
    const auto m = absorbing_mask(g);
    for (std::size_t i = 0; i < next.size(); ++i) {
      next[i] *= m[i];
      cur[i] *= m[i];
    }
  }
  check_finite(next, out.t);
  out.current = ComplexField(g, std::move(next), out.t);
  out.previous = ComplexField(g, std::move(cur), state.t);
  return out;
}

EvolutionState klein_gordon_start(const ComplexField& u0, const ComplexField& ut0, const FourPotential& pot, double dt,
                                  const KleinGordonConfig& cfg, bool radial) {
  const GridSpec& g = u0.grid();
  require(ut0.grid() == g, ErrorKind::shape, "u and d_t u must share a grid");
  check_cfl(g, dt, radial);
  pot.validate(g);
  const ComplexField L = klein_gordon_operator(u0, pot, cfg, radial);
  std::vector<Complex> prev(g.size());
  for (std::size_t i = 0; i < prev.size(); ++i) {
    const Complex acc = L[i] - 2.0 * I * pot.charge * pot.v_at(i) * ut0[i];
    prev[i] = u0[i] - dt * ut0[i] + 0.5 * dt * dt * acc;
  }
  if (radial) prev[0] = 0.0;
  EvolutionState s;
  s.regime = EvolutionRegime::klein_gordon;
  s.radial = radial;
  s.t = u0.time_label();
  s.current = u0;
  s.previous = ComplexField(g, std::move(prev), s.t - dt);
  s.previous_offset = dt;
  return s;
}

Diagnostics diagnostics(const EvolutionState& state, const KleinGordonConfig& cfg) {
  const GridSpec& g = state.grid();
  const auto& u = state.current;
  const double vol = g.cell_volume();
  Diagnostics d;
  double w = 0.0;
  Vec3 com;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double p = std::norm(u[i]);
    w += p;
    com += g.position(i) * p;
    d.max_amplitude = std::max(d.max_amplitude, std::abs(u[i]));
  }
  d.norm = w * vol;
  d.center_of_mass = w > 0.0 ? com * (1.0 / w) : Vec3{};
  if (state.regime == EvolutionRegime::klein_gordon && state.previous) {
    StencilConfig sc;
    sc.order = cfg.order;
    const auto& up = *state.previous;
    const ComplexField lap = laplacian(up, sc);
    const double h = state.previous_offset;
    // Written for the slice pair (t - h, t) so it is symmetric in the two.
    double e = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double K = cfg.Omega * cfg.Omega;
      e += std::norm(u[i] - up[i]) / (h * h) - std::real(std::conj(u[i]) * lap[i]) +
           K * std::real(std::conj(u[i]) * up[i]);
    }
    d.energy = e * vol;
  }
  return d;
}

ComplexField gaussian_packet(const GridSpec& grid, const Vec3& center, double sigma, const Vec3& k) {
  require(sigma > 0.0, ErrorKind::configuration, "sigma must be positive");
  const int d = grid.dims();
  const double norm = std::pow(2.0 * kPi * sigma * sigma, -0.25 * d);
  return ComplexField::generate(grid, [&](const Vec3& x) {
    const Vec3 r = x - center;
    return norm * std::exp(Complex(-dot(r, r) / (4.0 * sigma * sigma), dot(k, x)));
  });
}

Complex free_gaussian_exact(const Vec3& x, double t, int dims, const Vec3& center, double sigma, const Vec3& k,
                            double mass) {
  const Complex alpha(1.0, t / (2.0 * mass * sigma * sigma));
  Complex psi = 1.0;
  for (int a = 0; a < dims; ++a) {
    const double s = x[a] - center[a] - k[a] * t / mass;
    psi *= std::pow(2.0 * kPi * sigma * sigma, -0.25) / std::sqrt(alpha) *
           std::exp(-s * s / (4.0 * sigma * sigma * alpha) + I * (k[a] * x[a] - k[a] * k[a] * t / (2.0 * mass)));
  }
  return psi;
}

double free_gaussian_width(double sigma0, double t, double mass) {
  return sigma0 * std::sqrt(1.0 + t * t / (4.0 * mass * mass * std::pow(sigma0, 4)));
}

ComplexField double_gaussian(const GridSpec& grid, const Vec3& c1, const Vec3& c2, double sigma, const Vec3& k) {
  const ComplexField a = gaussian_packet(grid, c1, sigma, k);
  const ComplexField b = gaussian_packet(grid, c2, sigma, k);
  std::vector<Complex> v(grid.size());
  double n = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = a[i] + b[i];
    n += std::norm(v[i]);
  }
  const double s = 1.0 / std::sqrt(n * grid.cell_volume());
  for (auto& z : v) z *= s;
  return ComplexField(grid, std::move(v));
}

ComplexField plane_wave(const GridSpec& grid, const Vec3& k, Complex amplitude) {
  return ComplexField::generate(grid, [&](const Vec3& x) { return amplitude * std::exp(I * dot(k, x)); });
}

ComplexField oscillator_ground_state(const GridSpec& grid, double mass, double omega) {
  require(mass > 0.0 && omega > 0.0, ErrorKind::configuration, "oscillator mass and frequency must be positive");
  const double c = std::pow(mass * omega / kPi, 0.25 * grid.dims());
  return ComplexField::generate(grid, [&](const Vec3& x) { return Complex(c * std::exp(-0.5 * mass * omega * dot(x, x))); });
}

FourPotential oscillator_potential(const GridSpec& grid, double mass, double omega) {
  FourPotential p;
  p.charge = 1.0;
  p.V = RealField::generate(grid, [&](const Vec3& x) { return 0.5 * mass * omega * omega * dot(x, x); });
  return p;
}

}  // namespace wavemech
