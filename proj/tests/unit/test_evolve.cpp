#include "helpers.hpp"

#include "wavemech/evolve.hpp"

#include <doctest.h>

#include <functional>

using namespace wavemech;
using testing::line;
using testing::square;

namespace {

double max_error(const ComplexField& f, const std::function<Complex(const Vec3&)>& exact) {
  double e = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) e = std::max(e, std::abs(f[i] - exact(f.grid().position(i))));
  return e;
}

EvolutionState start(const ComplexField& psi) {
  EvolutionState s;
  s.current = psi;
  return s;
}

}  // namespace

TEST_CASE("Crank-Nicolson conserves the norm and runs backwards") {
  const GridSpec g = line(-20.0, 20.0, 801);
  const ComplexField psi0 = gaussian_packet(g, Vec3(-2.0), 1.0, Vec3(1.5));
  const FourPotential V = oscillator_potential(g, 1.0, 0.3);
  EvolutionState s = start(psi0);
  const double n0 = diagnostics(s).norm;
  CHECK(n0 == doctest::Approx(1.0).epsilon(1e-10));
  for (int k = 0; k < 200; ++k) s = schrodinger_step(s, V, 0.01);
  CHECK(std::abs(diagnostics(s).norm - n0) < 1e-12);
  for (int k = 0; k < 200; ++k) s = schrodinger_step(s, V, -0.01);
  double back = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) back = std::max(back, std::abs(s.current[i] - psi0[i]));
  CHECK(back < 1e-11);
}

TEST_CASE("free Gaussian follows the closed form in 1D and 2D") {
  const double m = 1.0, t = 1.0;
  {
    const GridSpec g = line(-25.0, 25.0, 1001);
    EvolutionState s = start(gaussian_packet(g, Vec3(0.0), 1.0, Vec3(1.0)));
    for (int k = 0; k < 100; ++k) s = schrodinger_step(s, FourPotential::none(), 0.01, SchrodingerConfig{m, 4});
    CHECK(max_error(s.current, [&](const Vec3& x) { return free_gaussian_exact(x, t, 1, Vec3(0.0), 1.0, Vec3(1.0), m); }) < 2e-4);
    CHECK(s.t == doctest::Approx(t));
  }
  {
    const GridSpec g = square(-12.0, 12.0, 241);
    EvolutionState s = start(gaussian_packet(g, Vec3(0.5, -0.5), 1.0, Vec3(0.0, 0.8)));
    for (int k = 0; k < 50; ++k) s = schrodinger_step(s, FourPotential::none(), 0.02);
    CHECK(max_error(s.current, [&](const Vec3& x) {
            return free_gaussian_exact(x, t, 2, Vec3(0.5, -0.5), 1.0, Vec3(0.0, 0.8), m);
          }) < 5e-3);
  }
  CHECK(free_gaussian_width(1.0, 2.0 * std::sqrt(3.0), 1.0) == doctest::Approx(2.0));
}

TEST_CASE("ground state is stationary under the oscillator Hamiltonian") {
  const GridSpec g = line(-8.0, 8.0, 1601);
  const ComplexField psi0 = oscillator_ground_state(g, 1.0, 1.0);
  EvolutionState s = start(psi0);
  for (int k = 0; k < 100; ++k) s = schrodinger_step(s, oscillator_potential(g, 1.0, 1.0), 0.01, SchrodingerConfig{1.0, 4});
  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) worst = std::max(worst, std::abs(std::abs(s.current[i]) - std::abs(psi0[i])));
  CHECK(worst < 1e-6);
  // Phase advances by omega/2 t.
  const std::size_t mid = g.size() / 2;
  CHECK(std::arg(s.current[mid] / psi0[mid]) == doctest::Approx(-0.5).epsilon(1e-4));
}

TEST_CASE("Klein-Gordon leapfrog conserves energy and tracks a plane wave") {
  const double k = 2.0, Omega = 1.0, w = std::sqrt(k * k + Omega * Omega);
  const GridSpec g = GridSpec::periodic_box(1, 0.0, 2.0 * kPi, 256, 0.01);
  auto exact = [&](double t) {
    return ComplexField::generate(g, [&](const Vec3& x) { return std::exp(Complex(0.0, k * x[0] - w * t)); }, t);
  };
  const ComplexField ut = ComplexField::generate(g, [&](const Vec3& x) { return Complex(0.0, -w) * std::exp(Complex(0.0, k * x[0])); });
  KleinGordonConfig c{Omega, 2};
  EvolutionState s = klein_gordon_start(exact(0.0), ut, FourPotential::none(), 0.01, c);
  const double e0 = diagnostics(s, c).energy;
  for (int n = 0; n < 300; ++n) s = klein_gordon_step(s, FourPotential::none(), 0.01, c);
  CHECK(std::abs(diagnostics(s, c).energy / e0 - 1.0) < 1e-12);
  const ComplexField ref = exact(s.t);
  double err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) err = std::max(err, std::abs(s.current[i] - ref[i]));
  CHECK(err < 1e-2);
}

TEST_CASE("radial Klein-Gordon reproduces a spherical standing wave") {
  // Off-grid neighbours read as zero, so the wall sits one spacing past r = R.
  const double R = 10.0, h = R / 400.0, k = 3.0 * kPi / (R + h), Omega = 1.0, w = std::sqrt(k * k + Omega * Omega);
  const GridSpec g = line(0.0, R, 401);
  const ComplexField w0 = ComplexField::generate(g, [&](const Vec3& x) { return Complex(std::sin(k * x[0]), 0.0); });
  const ComplexField wt = ComplexField::generate(g, [&](const Vec3& x) { return Complex(0.0, -w * std::sin(k * x[0])); });
  KleinGordonConfig c{Omega, 2};
  EvolutionState s = klein_gordon_start(w0, wt, FourPotential::none(), 0.01, c, true);
  for (int n = 0; n < 200; ++n) s = klein_gordon_step(s, FourPotential::none(), 0.01, c);
  double err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    err = std::max(err, std::abs(s.current[i] - std::sin(k * g.position(i)[0]) * std::exp(Complex(0.0, -w * s.t))));
  }
  CHECK(err < 5e-3);
}

TEST_CASE("Klein-Gordon refuses a CFL-violating step") {
  const GridSpec g = GridSpec::periodic_box(1, 0.0, 1.0, 100, 0.02);
  const ComplexField u = ComplexField::constant(g, 1.0);
  try {
    klein_gordon_start(u, u, FourPotential::none(), 0.02);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::configuration);
  }
}

TEST_CASE("non-finite states raise diverged") {
  const GridSpec g = line(-1.0, 1.0, 21);
  std::vector<Complex> v(g.size(), 1.0);
  v[10] = Complex(kNaN, 0.0);
  try {
    schrodinger_step(start(ComplexField(g, v)), FourPotential::none(), 0.01);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::diverged);
  }
}

TEST_CASE("absorbing mask is one inside and ramps to zero at the edge") {
  const GridSpec g = line(-1.0, 1.0, 101, Boundary::absorbing_mask);
  const auto m = absorbing_mask(g);
  CHECK(m[50] == 1.0);
  CHECK(m[20] == 1.0);
  CHECK(m[5] < 1.0);
  CHECK(m[0] < 0.02);
  CHECK(m[3] < m[6]);
  const auto none = absorbing_mask(line(-1.0, 1.0, 101));
  CHECK(none[0] == 1.0);
}

TEST_CASE("double Gaussian is normalised and symmetric") {
  const GridSpec g = line(-20.0, 20.0, 801);
  const ComplexField psi = double_gaussian(g, Vec3(-4.0), Vec3(4.0), 1.0, Vec3());
  EvolutionState s = start(psi);
  CHECK(diagnostics(s).norm == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(psi[100] - psi[700]) < 1e-15);
}
