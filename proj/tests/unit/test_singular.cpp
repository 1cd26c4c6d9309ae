#include "helpers.hpp"

#include "wavemech/singular.hpp"

#include <doctest.h>

using namespace wavemech;
using testing::line;
using testing::square;

namespace {

VelocityFn linear_flow(const Vec3& zdot, const Vec3& offset, const Vec3& z) {
  return [=](double, const Vec3& x, Vec3& v) {
    const Vec3 r = x - z;
    v = zdot + offset + Vec3(0.3 * r[0] - 0.2 * r[1], 0.5 * r[0] + 0.1 * r[1]);
    return Lookup::ok;
  };
}

Trajectory sampled_path(double t1, int steps) {
  Trajectory tr;
  for (int k = 0; k <= steps; ++k) {
    TrajectorySample s;
    s.t = t1 * k / steps;
    tr.samples.push_back(s);
  }
  return tr;
}

}  // namespace

TEST_CASE("constant-envelope u falls as C / R^n and is masked at z") {
  const GridSpec g = square(-2.0, 2.0, 41);
  SingularWaveSpec s;
  s.n = 2;
  s.envelope = EnvelopeKind::constant;
  s.carrier = CarrierKind::analytic;
  s.C = 3.0;
  s.phase = [](double t, const Vec3& x) { return -t + x[0]; };
  s.z_path = [](double) { return Vec3(0.0, 0.0); };
  s.mask_radius = 0.25;
  const ComplexField u = construct_u(s, g, 0.5, {});
  const std::size_t centre = g.flatten({20, 20, 0});
  CHECK(u.masked(centre));
  CHECK(u.masked(g.flatten({21, 21, 0})));
  const std::size_t i = g.flatten({30, 25, 0});
  const Vec3 x = g.position(i);
  CHECK(std::abs(u[i]) * dot(x, x) == doctest::Approx(3.0));
  CHECK(std::arg(u[i]) == doctest::Approx(std::remainder(x[0] - 0.5, 2.0 * kPi)));

  s.z_path = [](double) { return Vec3(2.5, 0.0); };
  CHECK_THROWS_AS(construct_u(s, g, 0.0, {}), Error);
}

TEST_CASE("phase-harmony u inherits the guiding phase and locks to a") {
  const GridSpec g = square(-2.0, 2.0, 41);
  const ComplexField psi = ComplexField::generate(g, [](const Vec3& x) {
    return std::exp(-0.5 * dot(x, x)) * std::exp(Complex(0.0, 0.7 * x[1]));
  });
  SingularWaveSpec s;
  s.envelope = EnvelopeKind::amplitude_locked;
  s.z_path = [](double) { return Vec3(0.05, 0.05); };
  GuidingData d;
  d.psi = &psi;
  const ComplexField u = construct_u(s, g, 0.0, d);
  const std::size_t i = g.flatten({10, 33, 0});
  const double R = norm(g.position(i) - Vec3(0.05, 0.05));
  CHECK(std::abs(u[i]) * R == doctest::Approx(std::abs(psi[i])));
  CHECK(std::abs(std::arg(u[i] / psi[i])) < 1e-12);
  CHECK_THROWS_AS(construct_u(s, g, 0.0, {}), Error);
}

TEST_CASE("weak guidance: linear mismatch vanishes at R = 0 with power one") {
  const Vec3 z(0.1, -0.2), zdot(0.4, 0.1);
  ShellOptions o;
  o.epsilon = 0.05;
  const auto r = weak_guidance_residual(linear_flow(zdot, Vec3(), z), 0.0, z, zdot, 2, o);
  CHECK_FALSE(r.exact);
  CHECK(r.intercept < 1e-10);
  CHECK(r.fitted_power == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("weak guidance: a constant velocity offset shows up as the intercept") {
  const Vec3 z(0.1, -0.2), zdot(0.4, 0.1), offset(0.03, -0.04);
  ShellOptions o;
  o.epsilon = 0.05;
  const auto r = weak_guidance_residual(linear_flow(zdot, offset, z), 0.0, z, zdot, 2, o);
  CHECK(r.intercept == doctest::Approx(0.05).epsilon(1e-8));
  CHECK(r.dipole_intercept[0] == doctest::Approx(0.03).epsilon(1e-8));
  CHECK(std::abs(r.monopole_intercept) < 1e-12);
}

TEST_CASE("weak guidance: uniform flow equal to dz/dt is exact") {
  VelocityFn same = [](double, const Vec3&, Vec3& v) {
    v = Vec3(0.2, 0.0, 0.1);
    return Lookup::ok;
  };
  ShellOptions o;
  o.epsilon = 0.1;
  const auto r = weak_guidance_residual(same, 0.0, Vec3(), Vec3(0.2, 0.0, 0.1), 3, o);
  CHECK(r.exact);
}

TEST_CASE("transport quadrature converges at second order to the exact envelope") {
  // f = exp(-t^2) along any path satisfies f = f0 exp(1/2 int I dt) with I = -4t.
  FieldFn f = [](double t, const Vec3&, double& v) {
    v = std::exp(-t * t);
    return Lookup::ok;
  };
  FieldFn I = [](double t, const Vec3&, double& v) {
    v = -4.0 * t;
    return Lookup::ok;
  };
  const auto exact = transport_integral_check(sampled_path(1.0, 10), f, I);
  CHECK(exact.complete);
  CHECK(exact.max_rel_mismatch < 1e-14);

  FieldFn I_curved = [](double t, const Vec3&, double& v) {
    v = -4.0 * t * t * t;
    return Lookup::ok;
  };
  FieldFn f_curved = [](double t, const Vec3&, double& v) {
    v = std::exp(-0.5 * t * t * t * t);
    return Lookup::ok;
  };
  const auto coarse = transport_integral_check(sampled_path(1.0, 10), f_curved, I_curved);
  const auto fine = transport_integral_check(sampled_path(1.0, 20), f_curved, I_curved);
  CHECK(testing::observed_order(std::abs(coarse.final_signed_mismatch), std::abs(fine.final_signed_mismatch)) ==
        doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("F = f / a conservation flags envelopes that do not follow a") {
  FieldFn a = [](double t, const Vec3&, double& v) {
    v = std::exp(-t);
    return Lookup::ok;
  };
  FieldFn follows = [](double t, const Vec3&, double& v) {
    v = 2.0 * std::exp(-t);
    return Lookup::ok;
  };
  FieldFn frozen = [](double, const Vec3&, double& v) {
    v = 2.0;
    return Lookup::ok;
  };
  const auto good = F_transport_check(a, follows, {sampled_path(1.0, 10)}, 0.01);
  CHECK(good.conserved);
  CHECK(good.max_rel_deviation < 1e-14);
  CHECK(good.min_amplitude_ratio == doctest::Approx(std::exp(-1.0)));
  const auto bad = F_transport_check(a, frozen, {sampled_path(1.0, 10)}, 0.01);
  CHECK_FALSE(bad.conserved);
  CHECK(bad.max_rel_deviation == doctest::Approx(std::exp(1.0) - 1.0));
}

TEST_CASE("flow labels of a uniform drift are x - v t") {
  const GridSpec g = square(-3.0, 3.0, 31);
  FlowSeries flow;
  for (double t : {0.0, 0.5, 1.0}) {
    FlowSlice s;
    s.t = t;
    s.velocity = {RealField::constant(g, 0.4, t), RealField::constant(g, -0.2, t)};
    flow.add(s);
  }
  const auto maps = build_label_maps(flow, 2);
  REQUIRE(maps.size() == 3);
  Vec3 xi;
  CHECK(maps[2].label(Vec3(0.3, 0.1), xi) == Lookup::ok);
  CHECK(xi[0] == doctest::Approx(0.3 - 0.4));
  CHECK(xi[1] == doctest::Approx(0.1 + 0.2));
  // Pre-images outside the grid have no label.
  CHECK(std::isnan(maps[2].components()[0][g.flatten({0, 15, 0})]));
}

TEST_CASE("transport rate is minus the phase Laplacian over omega0") {
  const GridSpec g = line(-3.0, 3.0, 121);
  const double alpha = 0.8;
  const ComplexField u = ComplexField::generate(g, [&](const Vec3& x) {
    return std::exp(Complex(0.0, 0.5 * alpha * x[0] * x[0])) / (1.0 + x[0] * x[0]);
  });
  const RealField I = transport_rate(u, 2.0);
  CHECK(I[60] == doctest::Approx(-alpha / 2.0).epsilon(1e-8));
  CHECK(I[30] == doctest::Approx(-alpha / 2.0).epsilon(1e-8));
}

TEST_CASE("comoving Helmholtz: static exact case is valid and a hard push trips the guard") {
  HelmholtzInputs in;
  in.beta = [](double, const Vec3&) { return 1.0; };
  in.phi = [](double t, const Vec3&) { return -1.0 * t; };
  in.Omega = 0.6;
  in.z_path = [](double) { return Vec3(); };
  const auto rep = comoving_helmholtz_construct(in);
  CHECK(rep.frame.valid);
  CHECK(rep.residual.relative < 1e-3);

  in.z_path = [](double t) { return Vec3(2.0 * t * t, 0.0, 0.0); };
  const auto guard = comoving_helmholtz_construct(in);
  CHECK_FALSE(guard.frame.valid);
  CHECK(guard.frame.rigidity_ratio == doctest::Approx(4.0).epsilon(1e-4));
}
