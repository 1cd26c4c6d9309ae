#include "wavemech/guidance.hpp"
#include "wavemech/interpolate.hpp"
#include "wavemech/parallel.hpp"
#include "wavemech/snapshot.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace wavemech {

void FlowSeries::add(FlowSlice slice) {
  require(!slice.velocity.empty(), ErrorKind::shape, "flow slice without velocity components");
  if (!slices_.empty()) {
    require(slice.velocity.front().grid() == grid(), ErrorKind::shape, "flow slices must share a grid");
    require(slice.t > slices_.back().t, ErrorKind::precondition, "flow slices must arrive in increasing time");
  }
  slices_.push_back(std::move(slice));
}

void FlowSeries::add(const FlowFields& flow, const PolarFields* polar) {
  FlowSlice s;
  s.t = flow.time;
  s.velocity = flow.v3;
  if (polar) {
    s.phase_dt = polar->phase_dt;
    s.phase_gradient = polar->phase_gradient;
  }
  add(std::move(s));
}

bool FlowSeries::bracket(double t, std::size_t& i0, std::size_t& i1, double& w) const {
  if (slices_.empty()) return false;
  const double tol = 1e-12 * std::max(1.0, std::abs(t));
  if (t < t_begin() - tol || t > t_end() + tol) return false;
  if (slices_.size() == 1) {
    i0 = i1 = 0;
    w = 0.0;
    return true;
  }
  auto it = std::upper_bound(slices_.begin(), slices_.end(), t, [](double v, const FlowSlice& s) { return v < s.t; });
  std::size_t hi = static_cast<std::size_t>(it - slices_.begin());
  hi = std::clamp<std::size_t>(hi, 1, slices_.size() - 1);
  i0 = hi - 1;
  i1 = hi;
  w = std::clamp((t - slices_[i0].t) / (slices_[i1].t - slices_[i0].t), 0.0, 1.0);
  return true;
}

namespace {

/// Linear-in-time, multilinear-in-space value; NaN marks undefined points.
double blend(const RealField& a, const RealField& b, double w, const Vec3& x) {
  const double va = w < 1.0 ? sample(a, x) : 0.0;
  const double vb = w > 0.0 ? sample(b, x) : 0.0;
  return (1.0 - w) * va + w * vb;
}

}  // namespace

Lookup FlowSeries::velocity(double t, const Vec3& x, Vec3& v) const {
  std::size_t i0 = 0, i1 = 0;
  double w = 0.0;
  if (!bracket(t, i0, i1, w) || !interpolation_domain_contains(grid(), x)) return Lookup::outside;
  v = Vec3{};
  for (std::size_t a = 0; a < slices_[i0].velocity.size(); ++a) {
    v[static_cast<int>(a)] = blend(slices_[i0].velocity[a], slices_[i1].velocity[a], w, x);
    if (!std::isfinite(v[static_cast<int>(a)])) return Lookup::masked;
  }
  return Lookup::ok;
}

Lookup FlowSeries::phase_rates(double t, const Vec3& x, double& dSdt, Vec3& gradS) const {
  std::size_t i0 = 0, i1 = 0;
  double w = 0.0;
  if (!bracket(t, i0, i1, w) || !interpolation_domain_contains(grid(), x)) return Lookup::outside;
  const auto& a = slices_[i0];
  const auto& b = slices_[i1];
  require(a.phase_dt && b.phase_dt && !a.phase_gradient.empty(), ErrorKind::precondition,
          "flow series carries no phase rates");
  dSdt = blend(*a.phase_dt, *b.phase_dt, w, x);
  gradS = Vec3{};
  bool ok = std::isfinite(dSdt);
  for (std::size_t c = 0; c < a.phase_gradient.size(); ++c) {
    gradS[static_cast<int>(c)] = blend(a.phase_gradient[c], b.phase_gradient[c], w, x);
    ok = ok && std::isfinite(gradS[static_cast<int>(c)]);
  }
  return ok ? Lookup::ok : Lookup::masked;
}

VelocityFn FlowSeries::velocity_fn() const {
  return [this](double t, const Vec3& x, Vec3& v) { return velocity(t, x, v); };
}

PhaseRateFn FlowSeries::phase_rate_fn() const {
  return [this](double t, const Vec3& x, double& s, Vec3& g) { return phase_rates(t, x, s, g); };
}

std::string to_string(TrajectoryStatus s) {
  switch (s) {
    case TrajectoryStatus::completed: return "completed";
    case TrajectoryStatus::left_domain: return "left_domain";
    case TrajectoryStatus::masked_region: return "masked_region";
    case TrajectoryStatus::superluminal: return "superluminal";
  }
  return "unknown";
}

Trajectory integrate_trajectory(const VelocityFn& velocity, const Vec3& z0, double t0, double t1,
                                const IntegrateOptions& opts, int dims) {
  require(opts.dt > 0.0 && std::isfinite(opts.dt), ErrorKind::configuration, "trajectory dt must be positive");
  require(t1 >= t0, ErrorKind::precondition, "trajectories run forward in time");
  require(opts.record_stride >= 1, ErrorKind::configuration, "record stride must be at least 1");
  Trajectory traj;
  traj.dims = dims;
  const bool rel = opts.regime == Regime::relativistic;
  auto status_of = [](Lookup l) {
    return l == Lookup::outside ? TrajectoryStatus::left_domain : TrajectoryStatus::masked_region;
  };
  auto eval = [&](double t, const Vec3& z, Vec3& v) -> std::optional<TrajectoryStatus> {
    const Lookup l = velocity(t, z, v);
    if (l != Lookup::ok) return status_of(l);
    v *= opts.velocity_scale;
    if (rel && dot(v, v) >= 1.0) return TrajectoryStatus::superluminal;
    return std::nullopt;
  };
  TrajectorySample s;
  s.t = t0;
  s.z = z0;
  if (auto bad = eval(t0, z0, s.v)) {
    traj.status = *bad;
    return traj;
  }
  traj.samples.push_back(s);
  const auto steps = static_cast<long>(std::ceil((t1 - t0) / opts.dt - 1e-9));
  for (long n = 0; n < steps; ++n) {
    const double t = s.t;
    const double h = std::min(opts.dt, t1 - t);
    const Vec3 k1 = s.v;
    Vec3 k2, k3, k4;
    std::optional<TrajectoryStatus> bad;
    if ((bad = eval(t + 0.5 * h, s.z + k1 * (0.5 * h), k2)) || (bad = eval(t + 0.5 * h, s.z + k2 * (0.5 * h), k3)) ||
        (bad = eval(t + h, s.z + k3 * h, k4))) {
      traj.status = *bad;
      break;
    }
    TrajectorySample next;
    next.t = n + 1 == steps ? t1 : t0 + (n + 1) * opts.dt;
    next.z = s.z + (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (h / 6.0);
    if ((bad = eval(next.t, next.z, next.v))) {
      traj.status = *bad;
      break;
    }
    next.tau = rel ? s.tau + 0.5 * h * (std::sqrt(1.0 - dot(s.v, s.v)) + std::sqrt(1.0 - dot(next.v, next.v)))
                   : next.t - t0;
    s = next;
    if ((n + 1) % opts.record_stride == 0 || n + 1 == steps) traj.samples.push_back(s);
  }
  if (traj.truncated() && traj.samples.back().t != s.t) traj.samples.push_back(s);
  return traj;
}

Trajectory integrate_trajectory(const FlowSeries& flow, const Vec3& z0, double t0, double t1,
                                const IntegrateOptions& opts) {
  require(!flow.empty(), ErrorKind::precondition, "empty flow series");
  return integrate_trajectory(flow.velocity_fn(), z0, t0, t1, opts, flow.grid().dims());
}

bool accumulate_phase(Trajectory& traj, const PhaseRateFn& rates, double phase0) {
  double prev_dt = 0.0;
  Vec3 prev_grad;
  bool ok = true;
  for (std::size_t i = 0; i < traj.samples.size(); ++i) {
    auto& s = traj.samples[i];
    double dSdt = 0.0;
    Vec3 grad;
    if (!ok || rates(s.t, s.z, dSdt, grad) != Lookup::ok) {
      ok = false;
      s.phase = kNaN;
      continue;
    }
    if (i == 0) {
      s.phase = phase0;
    } else {
      const auto& p = traj.samples[i - 1];
      const double dt = s.t - p.t;
      const Vec3 dz = s.z - p.z;
      s.phase = p.phase + 0.5 * ((prev_dt + dSdt) * dt + dot(prev_grad + grad, dz));
    }
    prev_dt = dSdt;
    prev_grad = grad;
  }
  return ok;
}

ClockReport internal_clock_check(Trajectory traj, const PhaseRateFn& rates, double omega0,
                                 const std::function<double(double, const Vec3&, const Vec3&)>& correction) {
  ClockReport r;
  r.complete = accumulate_phase(traj, rates) && !traj.truncated();
  double worst = 0.0, sum = 0.0;
  for (std::size_t i = 1; i < traj.samples.size(); ++i) {
    const auto& a = traj.samples[i - 1];
    const auto& b = traj.samples[i];
    if (!std::isfinite(b.phase) || b.tau == a.tau) break;
    const double rate = (b.phase - a.phase) / (b.tau - a.tau);
    double target = -omega0;
    if (correction) {
      const double tm = 0.5 * (a.t + b.t);
      target += correction(tm, (a.z + b.z) * 0.5, (a.v + b.v) * 0.5);
    }
    worst = std::max(worst, std::abs(rate - target));
    sum += rate;
    ++r.segments;
  }
  if (r.segments > 0) {
    r.max_deviation = worst;
    r.mean_rate = sum / static_cast<double>(r.segments);
  }
  return r;
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

Ensemble sample_ensemble(const ComplexField& field, std::size_t n, std::uint64_t seed) {
  const GridSpec& g = field.grid();
  require(n > 0, ErrorKind::configuration, "ensemble size must be positive");
  std::vector<double> cdf(g.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double p = field.masked(i) ? 0.0 : std::norm(field[i]);
    acc += std::isfinite(p) ? p : 0.0;
    cdf[i] = acc;
  }
  require(acc > 0.0, ErrorKind::precondition, "cannot sample an all-zero density");
  Ensemble e;
  e.seed = seed;
  e.t0 = field.time_label();
  e.positions.reserve(n);
  std::mt19937_64 rng(seed);
  for (std::size_t k = 0; k < n; ++k) {
    const double u = uniform01(rng) * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const std::size_t idx = std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), g.size() - 1);
    Vec3 x = g.position(idx);
    const auto ijk = g.unflatten(idx);
    for (int a = 0; a < g.dims(); ++a) {
      const double h = g.spacing(a);
      double lo = x[a] - 0.5 * h, hi = x[a] + 0.5 * h;
      if (g.boundary != Boundary::periodic) {
        if (ijk[static_cast<std::size_t>(a)] == 0) lo = x[a];
        if (ijk[static_cast<std::size_t>(a)] == g.points(a) - 1) hi = x[a];
      }
      x[a] = lo + (hi - lo) * uniform01(rng);
    }
    e.positions.push_back(x);
  }
  return e;
}

namespace {

Histogram empty_histogram(double lo, double hi, int bins) {
  require(bins >= 1 && bins <= 64, ErrorKind::configuration, "histograms use 1 to 64 bins");
  require(hi > lo, ErrorKind::configuration, "histogram range is empty");
  Histogram h;
  h.lo = lo;
  h.hi = hi;
  h.mass.assign(static_cast<std::size_t>(bins), 0.0);
  return h;
}

}  // namespace

Histogram histogram_of(const std::vector<Vec3>& positions, double lo, double hi, int bins) {
  Histogram h = empty_histogram(lo, hi, bins);
  if (positions.empty()) return h;
  const double w = 1.0 / static_cast<double>(positions.size());
  const double width = (hi - lo) / bins;
  for (const auto& p : positions) {
    const double s = (p[0] - lo) / width;
    if (s >= 0.0 && s < bins) {
      h.mass[static_cast<std::size_t>(s)] += w;
    } else {
      h.outside += w;
    }
  }
  return h;
}

Histogram histogram_of(const ComplexField& field, double lo, double hi, int bins) {
  Histogram h = empty_histogram(lo, hi, bins);
  const GridSpec& g = field.grid();
  const int n0 = g.points(0);
  const double hx = g.spacing(0);
  std::vector<double> marginal(static_cast<std::size_t>(n0), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double p = field.masked(i) ? 0.0 : std::norm(field[i]);
    marginal[static_cast<std::size_t>(g.unflatten(i)[0])] += p;
    total += p;
  }
  require(total > 0.0, ErrorKind::precondition, "cannot histogram an all-zero density");
  const double width = (hi - lo) / bins;
  for (int j = 0; j < n0; ++j) {
    const double x = g.coord(0, j);
    double a = x - 0.5 * hx, b = x + 0.5 * hx;
    if (g.boundary != Boundary::periodic) {
      if (j == 0) a = x;
      if (j == n0 - 1) b = x;
    }
    if (b <= a) continue;
    const double density = marginal[static_cast<std::size_t>(j)] / total / (b - a);
    double inside = 0.0;
    const int k0 = std::max(0, static_cast<int>(std::floor((a - lo) / width)));
    const int k1 = std::min(bins - 1, static_cast<int>(std::floor((b - lo) / width)));
    for (int k = k0; k <= k1; ++k) {
      const double overlap = std::min(b, lo + (k + 1) * width) - std::max(a, lo + k * width);
      if (overlap > 0.0) {
        h.mass[static_cast<std::size_t>(k)] += density * overlap;
        inside += overlap;
      }
    }
    h.outside += density * ((b - a) - inside);
  }
  return h;
}

double tv_distance(const Histogram& a, const Histogram& b) {
  require(a.mass.size() == b.mass.size() && a.lo == b.lo && a.hi == b.hi, ErrorKind::shape,
          "histograms must share their bins");
  double s = std::abs(a.outside - b.outside);
  for (std::size_t k = 0; k < a.mass.size(); ++k) s += std::abs(a.mass[k] - b.mass[k]);
  return 0.5 * s;
}

double tv_noise_floor(const Histogram& p, std::size_t n) {
  double s = 0.0;
  auto term = [&](double q) { return std::sqrt(2.0 * q * (1.0 - q) / (kPi * static_cast<double>(n))); };
  for (double q : p.mass) s += term(q);
  s += term(p.outside);
  return 0.5 * s;
}

EquivarianceReport equivariance_test(const std::vector<Trajectory>& trajectories, const ComplexField& field_at_t,
                                     double lo, double hi, int bins) {
  EquivarianceReport r;
  std::vector<Vec3> ends;
  ends.reserve(trajectories.size());
  for (const auto& t : trajectories) {
    if (t.truncated() || t.samples.empty()) {
      ++r.truncated;
      continue;
    }
    ends.push_back(t.back().z);
  }
  const Histogram ref = histogram_of(field_at_t, lo, hi, bins);
  r.tv = tv_distance(histogram_of(ends, lo, hi, bins), ref);
  r.noise_floor = tv_noise_floor(ref, ends.size());
  return r;
}

std::size_t crossing_violations(const std::vector<Trajectory>& trajectories) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < trajectories.size(); ++i)
    if (!trajectories[i].samples.empty()) order.push_back(i);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return trajectories[a].samples.front().z[0] < trajectories[b].samples.front().z[0];
  });
  std::size_t bad = 0;
  for (std::size_t k = 1; k < order.size(); ++k) {
    const auto& a = trajectories[order[k - 1]].samples;
    const auto& b = trajectories[order[k]].samples;
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t s = 0; s < n; ++s) {
      if (!(a[s].z[0] < b[s].z[0]) && !(a[0].z[0] == b[0].z[0] && a[s].z[0] == b[s].z[0])) {
        ++bad;
        break;
      }
    }
  }
  return bad;
}

std::vector<Trajectory> integrate_ensemble(const FlowSeries& flow, const Ensemble& ens, double t1,
                                           const IntegrateOptions& opts) {
  std::vector<Trajectory> out(ens.positions.size());
  parallel_for(out.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) out[i] = integrate_trajectory(flow, ens.positions[i], ens.t0, t1, opts);
  });
  return out;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  static const char* axes[] = {"x", "y", "z"};
  os << "t";
  for (int a = 0; a < traj.dims; ++a) os << ",z" << axes[a];
  for (int a = 0; a < traj.dims; ++a) os << ",v" << axes[a];
  os << ",tau,phase\n";
  for (const auto& s : traj.samples) {
    os << format_double(s.t);
    for (int a = 0; a < traj.dims; ++a) os << ',' << format_double(s.z[a]);
    for (int a = 0; a < traj.dims; ++a) os << ',' << format_double(s.v[a]);
    os << ',' << format_double(s.tau) << ',' << format_double(s.phase) << '\n';
  }
}

}  // namespace wavemech
