#include "helpers.hpp"

#include "wavemech/evolve.hpp"
#include "wavemech/guidance.hpp"
#include "wavemech/parallel.hpp"

#include <doctest.h>

#include <sstream>

using namespace wavemech;
using testing::line;
using testing::square;

namespace {

FlowSlice uniform_slice(const GridSpec& g, double t, const Vec3& v) {
  FlowSlice s;
  s.t = t;
  for (int a = 0; a < g.dims(); ++a) s.velocity.push_back(RealField::constant(g, v[a], t));
  return s;
}

}  // namespace

TEST_CASE("RK4 converges at fourth order on a rigid rotation") {
  VelocityFn rot = [](double, const Vec3& x, Vec3& v) {
    v = Vec3(-x[1], x[0]);
    return Lookup::ok;
  };
  std::vector<double> err;
  for (double dt : {0.2, 0.1}) {
    IntegrateOptions o;
    o.dt = dt;
    const Trajectory tr = integrate_trajectory(rot, Vec3(1.0, 0.0), 0.0, 2.0, o, 2);
    CHECK(tr.status == TrajectoryStatus::completed);
    err.push_back(norm(tr.back().z - Vec3(std::cos(2.0), std::sin(2.0))));
  }
  CHECK(testing::observed_order(err[0], err[1]) == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("trajectories stop with a status instead of extrapolating") {
  const GridSpec g = line(0.0, 1.0, 11);
  FlowSeries flow;
  flow.add(uniform_slice(g, 0.0, Vec3(1.0)));
  flow.add(uniform_slice(g, 2.0, Vec3(1.0)));
  IntegrateOptions o;
  o.dt = 0.05;
  const Trajectory tr = integrate_trajectory(flow, Vec3(0.3), 0.0, 2.0, o);
  CHECK(tr.status == TrajectoryStatus::left_domain);
  CHECK(tr.back().z[0] <= 0.9 + 1e-12);

  VelocityFn fast = [](double, const Vec3&, Vec3& v) {
    v = Vec3(1.2);
    return Lookup::ok;
  };
  o.regime = Regime::relativistic;
  CHECK(integrate_trajectory(fast, Vec3(), 0.0, 1.0, o, 1).status == TrajectoryStatus::superluminal);
}

TEST_CASE("flow series interpolates linearly in time") {
  const GridSpec g = line(0.0, 1.0, 11);
  FlowSeries flow;
  flow.add(uniform_slice(g, 0.0, Vec3(1.0)));
  flow.add(uniform_slice(g, 1.0, Vec3(3.0)));
  Vec3 v;
  CHECK(flow.velocity(0.25, Vec3(0.5), v) == Lookup::ok);
  CHECK(v[0] == doctest::Approx(1.5));
  CHECK(flow.velocity(1.5, Vec3(0.5), v) != Lookup::ok);
  CHECK_THROWS_AS(flow.add(uniform_slice(g, 0.5, Vec3())), Error);
}

TEST_CASE("proper time and clock along a relativistic plane-wave path") {
  const double v = 0.6, gamma = 1.25, omega0 = 1.0;
  const double omega = gamma * omega0, k = omega * v;
  VelocityFn vel = [&](double, const Vec3&, Vec3& out) {
    out = Vec3(k / omega);
    return Lookup::ok;
  };
  PhaseRateFn rates = [&](double, const Vec3&, double& dSdt, Vec3& grad) {
    dSdt = -omega;
    grad = Vec3(k);
    return Lookup::ok;
  };
  IntegrateOptions o;
  o.dt = 0.1;
  o.regime = Regime::relativistic;
  Trajectory tr = integrate_trajectory(vel, Vec3(), 0.0, 5.0, o, 1);
  CHECK(tr.back().tau == doctest::Approx(5.0 / gamma));
  CHECK(accumulate_phase(tr, rates));
  CHECK(tr.back().phase == doctest::Approx(-omega0 * 5.0 / gamma));
  const ClockReport c = internal_clock_check(tr, rates, omega0);
  CHECK(c.complete);
  CHECK(c.max_deviation < 1e-12);
}

TEST_CASE("ensemble sampling is reproducible and matches the Born density moments") {
  const GridSpec g = line(-10.0, 10.0, 401);
  const ComplexField psi = gaussian_packet(g, Vec3(1.0), 1.5, Vec3());
  const Ensemble a = sample_ensemble(psi, 20000, 7);
  const Ensemble b = sample_ensemble(psi, 20000, 7);
  const Ensemble c = sample_ensemble(psi, 20000, 8);
  CHECK(a.positions == b.positions);
  CHECK_FALSE(a.positions == c.positions);
  double mean = 0.0, var = 0.0;
  for (const auto& p : a.positions) mean += p[0];
  mean /= 20000.0;
  for (const auto& p : a.positions) var += (p[0] - mean) * (p[0] - mean);
  var /= 19999.0;
  CHECK(std::abs(mean - 1.0) < 4.0 * 1.5 / std::sqrt(20000.0));
  CHECK(std::sqrt(var) == doctest::Approx(1.5).epsilon(0.02));
}

TEST_CASE("histograms, TV distance and the multinomial noise floor") {
  const GridSpec g = line(-10.0, 10.0, 401);
  const ComplexField psi = gaussian_packet(g, Vec3(), 1.0, Vec3());
  const Histogram exact = histogram_of(psi, -4.0, 4.0, 32);
  double total = exact.outside;
  for (double m : exact.mass) total += m;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(exact.outside == doctest::Approx(std::erfc(4.0 / std::sqrt(2.0))).epsilon(0.05));
  CHECK(tv_distance(exact, exact) == 0.0);

  Histogram flat;
  flat.lo = 0.0;
  flat.hi = 1.0;
  flat.mass.assign(4, 0.25);
  const double n = 100.0;
  CHECK(tv_noise_floor(flat, 100) == doctest::Approx(0.5 * 4.0 * std::sqrt(2.0 * 0.25 * 0.75 / (kPi * n))));

  // Averaged over draws, the sample TV sits near the predicted floor.
  double mean_tv = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Ensemble e = sample_ensemble(psi, 5000, seed);
    mean_tv += tv_distance(histogram_of(e.positions, -4.0, 4.0, 32), exact) / 20.0;
  }
  CHECK(mean_tv == doctest::Approx(tv_noise_floor(exact, 5000)).epsilon(0.2));
  CHECK_THROWS_AS(histogram_of(psi, -4.0, 4.0, 65), Error);
}

TEST_CASE("crossing detector counts reordered neighbours") {
  auto path = [](std::vector<double> xs) {
    Trajectory t;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      TrajectorySample s;
      s.t = static_cast<double>(k);
      s.z = Vec3(xs[k]);
      t.samples.push_back(s);
    }
    return t;
  };
  CHECK(crossing_violations({path({0.0, 0.5, 1.0}), path({1.0, 1.5, 2.0})}) == 0);
  CHECK(crossing_violations({path({1.0, 0.5, 0.0}), path({0.0, 0.5, 1.0})}) == 1);
}

TEST_CASE("ensemble integration does not depend on the thread count") {
  const GridSpec g = square(-5.0, 5.0, 41);
  FlowSeries flow;
  for (double t : {0.0, 1.0}) {
    FlowSlice s;
    s.t = t;
    s.velocity.push_back(RealField::generate(g, [t](const Vec3& x) { return -x[1] * (1.0 + t); }, t));
    s.velocity.push_back(RealField::generate(g, [](const Vec3& x) { return x[0]; }, t));
    flow.add(s);
  }
  const ComplexField psi = gaussian_packet(g, Vec3(), 1.0, Vec3());
  const Ensemble e = sample_ensemble(psi, 300, 3);
  IntegrateOptions o;
  o.dt = 0.05;
  auto run = [&](int threads) {
    set_thread_count(threads);
    std::ostringstream os;
    for (const auto& t : integrate_ensemble(flow, e, 1.0, o)) write_trajectory_csv(os, t);
    return os.str();
  };
  const std::string one = run(1);
  const std::string three = run(3);
  set_thread_count(1);
  CHECK(one == three);
}
