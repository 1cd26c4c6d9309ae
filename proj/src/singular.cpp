#include "wavemech/singular.hpp"
#include "wavemech/interpolate.hpp"
#include "wavemech/numerics.hpp"
#include "wavemech/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace wavemech {

namespace {

constexpr Complex I(0.0, 1.0);

bool bracket_times(const std::vector<double>& times, double t, std::size_t& i0, std::size_t& i1, double& w) {
  if (times.empty()) return false;
  const double tol = 1e-12 * std::max(1.0, std::abs(t));
  if (t < times.front() - tol || t > times.back() + tol) return false;
  if (times.size() == 1) {
    i0 = i1 = 0;
    w = 0.0;
    return true;
  }
  auto it = std::upper_bound(times.begin(), times.end(), t);
  std::size_t hi = std::clamp<std::size_t>(static_cast<std::size_t>(it - times.begin()), 1, times.size() - 1);
  i0 = hi - 1;
  i1 = hi;
  w = std::clamp((t - times[i0]) / (times[i1] - times[i0]), 0.0, 1.0);
  return true;
}

double rms(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return v.empty() ? 0.0 : std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

void RealSeries::add(RealField f) {
  if (!fields_.empty()) {
    require(f.grid() == fields_.front().grid(), ErrorKind::shape, "series slices must share a grid");
    require(f.time_label() > fields_.back().time_label(), ErrorKind::precondition,
            "series slices must arrive in increasing time");
  }
  times_.push_back(f.time_label());
  fields_.push_back(std::move(f));
}

FieldFn RealSeries::fn() const {
  return [this](double t, const Vec3& x, double& v) { return sample(t, x, v); };
}

Lookup RealSeries::sample(double t, const Vec3& x, double& value) const {
  std::size_t i0 = 0, i1 = 0;
  double w = 0.0;
  if (!bracket_times(times_, t, i0, i1, w) || !interpolation_domain_contains(fields_.front().grid(), x))
    return Lookup::outside;
  const double a = w < 1.0 ? wavemech::sample(fields_[i0], x) : 0.0;
  const double b = w > 0.0 ? wavemech::sample(fields_[i1], x) : 0.0;
  value = (1.0 - w) * a + w * b;
  return std::isfinite(value) ? Lookup::ok : Lookup::masked;
}

// ---------------------------------------------------------------------------

LagrangianMap LagrangianMap::identity(const GridSpec& grid, double t0) {
  require(grid.boundary != Boundary::periodic, ErrorKind::precondition, "flow labels need a non-periodic grid");
  LagrangianMap m;
  m.t_ = t0;
  for (int a = 0; a < grid.dims(); ++a) {
    m.components_.push_back(RealField::generate(grid, [a](const Vec3& x) { return x[a]; }, t0));
  }
  return m;
}

LagrangianMap LagrangianMap::advance(const FlowSeries& flow, double t1, int substeps) const {
  require(t1 > t_, ErrorKind::precondition, "label maps advance forward in time");
  require(substeps >= 1, ErrorKind::configuration, "substeps must be at least 1");
  const GridSpec& g = components_.front().grid();
  const int dims = g.dims();
  std::vector<std::vector<double>> out(static_cast<std::size_t>(dims), std::vector<double>(g.size(), kNaN));
  const double h = -(t1 - t_) / substeps;
  parallel_for(g.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      Vec3 x = g.position(i);
      double t = t1;
      bool ok = true;
      for (int s = 0; s < substeps && ok; ++s) {
        Vec3 k1, k2, k3, k4;
        ok = flow.velocity(t, x, k1) == Lookup::ok && flow.velocity(t + 0.5 * h, x + k1 * (0.5 * h), k2) == Lookup::ok &&
             flow.velocity(t + 0.5 * h, x + k2 * (0.5 * h), k3) == Lookup::ok &&
             flow.velocity(t + h, x + k3 * h, k4) == Lookup::ok;
        if (!ok) break;
        x += (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (h / 6.0);
        t = s + 1 == substeps ? t_ : t + h;
      }
      if (!ok || !interpolation_domain_contains(g, x)) continue;
      for (int a = 0; a < dims; ++a) out[static_cast<std::size_t>(a)][i] = sample(components_[static_cast<std::size_t>(a)], x);
    }
  });
  LagrangianMap m;
  m.t_ = t1;
  for (auto& c : out) m.components_.emplace_back(g, std::move(c), t1);
  return m;
}

Lookup LagrangianMap::label(const Vec3& x, Vec3& xi) const {
  const GridSpec& g = components_.front().grid();
  if (!interpolation_domain_contains(g, x)) return Lookup::outside;
  xi = Vec3{};
  for (int a = 0; a < g.dims(); ++a) {
    xi[a] = sample(components_[static_cast<std::size_t>(a)], x);
    if (!std::isfinite(xi[a])) return Lookup::masked;
  }
  return Lookup::ok;
}

std::vector<LagrangianMap> build_label_maps(const FlowSeries& flow, int substeps) {
  require(!flow.empty(), ErrorKind::precondition, "empty flow series");
  std::vector<LagrangianMap> maps;
  maps.push_back(LagrangianMap::identity(flow.grid(), flow.t_begin()));
  for (std::size_t j = 1; j < flow.size(); ++j) maps.push_back(maps.back().advance(flow, flow[j].t, substeps));
  return maps;
}

PathFn trajectory_path(const Trajectory& traj) {
  require(!traj.samples.empty(), ErrorKind::precondition, "empty trajectory");
  return [samples = traj.samples](double t) {
    if (t <= samples.front().t) return samples.front().z;
    if (t >= samples.back().t) return samples.back().z;
    auto it = std::upper_bound(samples.begin(), samples.end(), t,
                               [](double v, const TrajectorySample& s) { return v < s.t; });
    const auto& b = *it;
    const auto& a = *(it - 1);
    const double h = b.t - a.t;
    const double s = (t - a.t) / h;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
    return a.z * h00 + a.v * (h * h10) + b.z * h01 + b.v * (h * h11);
  };
}

FieldFn transported_amplitude(const std::vector<LagrangianMap>& maps, const RealSeries& a, PathFn z, double C, int n) {
  require(maps.size() == a.size() && !maps.empty(), ErrorKind::shape, "one label map per amplitude slice");
  std::vector<double> times;
  for (std::size_t j = 0; j < maps.size(); ++j) {
    require(std::abs(maps[j].time() - a[j].time_label()) <= 1e-9 * std::max(1.0, std::abs(a[j].time_label())),
            ErrorKind::shape, "label maps and amplitude slices disagree in time");
    times.push_back(maps[j].time());
  }
  return [&maps, &a, z = std::move(z), C, n, times](double t, const Vec3& x, double& value) -> Lookup {
    std::size_t i0 = 0, i1 = 0;
    double w = 0.0;
    if (!bracket_times(times, t, i0, i1, w)) return Lookup::outside;
    auto label_at = [&](const Vec3& p, Vec3& xi) -> Lookup {
      Vec3 l0, l1;
      const Lookup s0 = maps[i0].label(p, l0);
      if (s0 != Lookup::ok) return s0;
      const Lookup s1 = maps[i1].label(p, l1);
      if (s1 != Lookup::ok) return s1;
      xi = l0 * (1.0 - w) + l1 * w;
      return Lookup::ok;
    };
    Vec3 xi, xi_z;
    double av = 0.0;
    Lookup s = label_at(x, xi);
    if (s != Lookup::ok) return s;
    if ((s = label_at(z(t), xi_z)) != Lookup::ok) return s;
    if ((s = a.sample(t, x, av)) != Lookup::ok) return s;
    value = C * av / std::pow(norm(xi - xi_z), n);
    return std::isfinite(value) ? Lookup::ok : Lookup::masked;
  };
}

// ---------------------------------------------------------------------------

std::string to_string(EnvelopeKind k) {
  switch (k) {
    case EnvelopeKind::constant: return "constant";
    case EnvelopeKind::amplitude_locked: return "amplitude_locked";
    case EnvelopeKind::transported: return "transported";
  }
  return "constant";
}

std::string to_string(CarrierKind k) {
  switch (k) {
    case CarrierKind::phase_harmony: return "phase_harmony";
    case CarrierKind::analytic: return "analytic";
    case CarrierKind::first_order_contact: return "first_order_contact";
  }
  return "phase_harmony";
}

EnvelopeKind envelope_from_string(const std::string& s) {
  for (auto k : {EnvelopeKind::constant, EnvelopeKind::amplitude_locked, EnvelopeKind::transported})
    if (to_string(k) == s) return k;
  fail(ErrorKind::configuration, "unknown envelope '" + s + "'");
}

CarrierKind carrier_from_string(const std::string& s) {
  for (auto k : {CarrierKind::phase_harmony, CarrierKind::analytic, CarrierKind::first_order_contact})
    if (to_string(k) == s) return k;
  fail(ErrorKind::configuration, "unknown carrier '" + s + "'");
}

void SingularWaveSpec::validate() const {
  require(n >= 1, ErrorKind::configuration, "multipole order n must be at least 1");
  require(std::isfinite(C) && C != 0.0, ErrorKind::configuration, "C must be finite and non-zero");
  require(Omega > 0.0, ErrorKind::configuration, "Omega must be positive");
  require(static_cast<bool>(z_path), ErrorKind::configuration, "singular wave needs a z path");
  require(carrier == CarrierKind::phase_harmony || static_cast<bool>(phase), ErrorKind::configuration,
          "this carrier needs a phase function");
  require(contact_radius > 0.0, ErrorKind::configuration, "contact radius must be positive");
  require(mask_radius >= 0.0, ErrorKind::configuration, "mask radius must be non-negative");
}

ComplexField construct_u(const SingularWaveSpec& spec, const GridSpec& grid, double t, const GuidingData& data) {
  spec.validate();
  const int dims = grid.dims();
  const Vec3 z = spec.z_path(t);
  for (int a = 0; a < dims; ++a) {
    const auto& ax = grid.axes[static_cast<std::size_t>(a)];
    require(z[a] > ax.min && z[a] < ax.max, ErrorKind::out_of_bounds, "singularity lies outside the grid");
  }
  const bool need_psi = spec.envelope != EnvelopeKind::constant || spec.carrier != CarrierKind::analytic;
  require(!need_psi || (data.psi && data.psi->grid() == grid), ErrorKind::precondition,
          "this construction needs the guiding wave on the same grid");
  Vec3 xi_z;
  if (spec.envelope == EnvelopeKind::transported) {
    require(data.labels && data.labels->components().front().grid() == grid, ErrorKind::precondition,
            "the transported envelope needs flow labels on the same grid");
    require(data.labels->label(z, xi_z) == Lookup::ok, ErrorKind::precondition, "no flow label at the singularity");
  }
  const double mr = spec.mask_radius > 0.0 ? spec.mask_radius : 0.5 * grid.min_spacing();
  std::vector<Complex> u(grid.size());
  std::vector<std::uint8_t> mask(grid.size(), 0);
  parallel_for(grid.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const Vec3 x = grid.position(i);
      const double R = norm(x - z);
      Complex carrier = 1.0;
      double a = 1.0;
      if (need_psi) {
        const Complex p = (*data.psi)[i];
        a = std::abs(p);
        if (data.psi->masked(i) || !(a > 0.0)) {
          mask[i] = 1;
          continue;
        }
        carrier = p / a;
      }
      double f = 0.0;
      switch (spec.envelope) {
        case EnvelopeKind::constant: f = spec.C / std::pow(R, spec.n); break;
        case EnvelopeKind::amplitude_locked: f = spec.C * a / std::pow(R, spec.n); break;
        case EnvelopeKind::transported: {
          Vec3 xi;
          for (int c = 0; c < dims; ++c) xi[c] = data.labels->components()[static_cast<std::size_t>(c)][i];
          f = spec.C * a / std::pow(norm(xi - xi_z), spec.n);
          break;
        }
      }
      switch (spec.carrier) {
        case CarrierKind::phase_harmony: break;
        case CarrierKind::analytic: carrier = std::exp(I * spec.phase(t, x)); break;
        case CarrierKind::first_order_contact: {
          const double q = R / spec.contact_radius;
          carrier *= std::exp(I * (1.0 - std::exp(-q * q)) * spec.phase(t, x));
          break;
        }
      }
      if (R < mr || !std::isfinite(f)) {
        mask[i] = 1;
        continue;
      }
      u[i] = f * carrier;
    }
  });
  bool any = false;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (mask[i]) {
      u[i] = nan_value<Complex>();
      any = true;
    }
  }
  if (!any) mask.clear();
  return ComplexField(grid, std::move(u), t, std::move(mask));
}

// ---------------------------------------------------------------------------

WeakGuidanceReport weak_guidance_residual(const VelocityFn& v_u, double t, const Vec3& z, const Vec3& zdot, int dims,
                                          const ShellOptions& opts) {
  require(opts.epsilon > 0.0, ErrorKind::configuration, "shell analysis needs a positive epsilon");
  require(opts.shells >= 6, ErrorKind::configuration, "shell fits use at least six shells");
  require(opts.outer_factor > 1.0, ErrorKind::configuration, "outer shell must lie beyond epsilon");
  const int count = opts.directions > 0 ? opts.directions : (dims == 3 ? 128 : 64);
  const auto dirs = shell_directions(dims, count);
  WeakGuidanceReport r;
  r.t = t;
  r.z = z;
  r.zdot = zdot;
  std::vector<double> R, c0;
  std::vector<std::vector<double>> w(static_cast<std::size_t>(dims));
  double biggest = 0.0;
  for (int s = 0; s < opts.shells; ++s) {
    ShellSample sh;
    sh.R = opts.epsilon * (1.0 + (opts.outer_factor - 1.0) * s / (opts.shells - 1));
    double mono = 0.0;
    Vec3 dip;
    for (const auto& d : dirs) {
      Vec3 v;
      if (v_u(t, z + d * sh.R, v) != Lookup::ok) {
        sh.skipped = true;
        break;
      }
      const double g = dot(v - zdot, d);
      mono += g;
      dip += d * g;
    }
    if (!sh.skipped) {
      const double inv = 1.0 / static_cast<double>(dirs.size());
      sh.monopole = mono * inv;
      sh.dipole = dip * (dims * inv);
      R.push_back(sh.R);
      c0.push_back(sh.monopole);
      biggest = std::max(biggest, std::abs(sh.monopole));
      for (int a = 0; a < dims; ++a) {
        w[static_cast<std::size_t>(a)].push_back(sh.dipole[a]);
        biggest = std::max(biggest, std::abs(sh.dipole[a]));
      }
    } else {
      ++r.skipped;
    }
    r.shells.push_back(sh);
  }
  if (R.size() < 6) return r;
  r.monopole_intercept = polyfit(R, c0, 2)[0];
  double q2 = 0.0;
  for (int a = 0; a < dims; ++a) {
    r.dipole_intercept[a] = polyfit(R, w[static_cast<std::size_t>(a)], 2)[0];
    q2 += r.dipole_intercept[a] * r.dipole_intercept[a];
  }
  r.intercept = std::sqrt(r.monopole_intercept * r.monopole_intercept + q2);
  if (biggest < opts.exact_threshold) {
    r.exact = true;
    return r;
  }
  std::vector<double> m(R.size());
  for (std::size_t k = 0; k < R.size(); ++k) {
    double s = (c0[k] - r.monopole_intercept) * (c0[k] - r.monopole_intercept);
    for (int a = 0; a < dims; ++a) {
      const double d = w[static_cast<std::size_t>(a)][k] - r.dipole_intercept[a];
      s += d * d;
    }
    m[k] = std::sqrt(s);
  }
  r.fitted_power = loglog_slope(R, m);
  return r;
}

nlohmann::json WeakGuidanceReport::to_json() const {
  nlohmann::json shells_json = nlohmann::json::array();
  for (const auto& s : shells) {
    shells_json.push_back({{"R", s.R},
                           {"monopole", s.monopole},
                           {"dipole", std::vector<double>(s.dipole.c.begin(), s.dipole.c.end())},
                           {"skipped", s.skipped}});
  }
  return {{"t", t},
          {"z", std::vector<double>(z.c.begin(), z.c.end())},
          {"zdot", std::vector<double>(zdot.c.begin(), zdot.c.end())},
          {"shells", shells_json},
          {"monopole_intercept", monopole_intercept},
          {"dipole_intercept", std::vector<double>(dipole_intercept.c.begin(), dipole_intercept.c.end())},
          {"intercept", intercept},
          {"fitted_exponent", fitted_power},
          {"exact", exact},
          {"skipped_shells", skipped}};
}

// ---------------------------------------------------------------------------

RealField transport_rate(const ComplexField& u, double omega0, const StencilConfig& cfg) {
  require(omega0 > 0.0, ErrorKind::configuration, "omega0 must be positive");
  const GridSpec& g = u.grid();
  std::vector<double> acc(g.size(), 0.0);
  for (int a = 0; a < g.dims(); ++a) {
    const RealField d = partial(phase_partial(u, a, cfg), a, cfg);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += d[i];
  }
  for (auto& v : acc) v = -v / omega0;
  return RealField(g, std::move(acc), u.time_label());
}

double transport_rate_analytic(const ScalarFn& phi, const PotentialFunctions& pot, double t, const Vec3& x, int dims,
                               double h) {
  const double e = pot.charge;
  auto V = [&](double tt, const Vec3& xx) { return pot.V ? pot.V(Event{tt, xx}) : 0.0; };
  auto A = [&](double tt, const Vec3& xx) { return pot.A ? pot.A(Event{tt, xx}) : Vec3{}; };
  const double p0 = (phi(t + h, x) - phi(t - h, x)) / (2.0 * h) + e * V(t, x);
  const double dt_p0 = (phi(t + h, x) - 2.0 * phi(t, x) + phi(t - h, x)) / (h * h) +
                       e * (V(t + h, x) - V(t - h, x)) / (2.0 * h);
  double div_p = 0.0;
  for (int a = 0; a < dims; ++a) {
    Vec3 s;
    s[a] = h;
    div_p += (phi(t, x + s) - 2.0 * phi(t, x) + phi(t, x - s)) / (h * h);
    div_p -= e * (A(t, x + s)[a] - A(t, x - s)[a]) / (2.0 * h);
  }
  require(p0 != 0.0, ErrorKind::singularity, "d_t phi + eV vanishes");
  return -(dt_p0 - div_p) / p0;
}

TransportReport transport_integral_check(const Trajectory& streamline, const FieldFn& f, const FieldFn& I_u) {
  TransportReport r;
  r.complete = !streamline.truncated();
  double integral = 0.0, prev_I = 0.0, f0 = 0.0, worst = 0.0;
  for (std::size_t k = 0; k < streamline.samples.size(); ++k) {
    const auto& s = streamline.samples[k];
    double fd = 0.0, Iv = 0.0;
    if (f(s.t, s.z, fd) != Lookup::ok || I_u(s.t, s.z, Iv) != Lookup::ok) {
      r.complete = false;
      break;
    }
    if (k == 0) {
      f0 = fd;
    } else {
      integral += 0.5 * (prev_I + Iv) * (s.t - r.t.back());
    }
    prev_I = Iv;
    const double fq = f0 * std::exp(0.5 * integral);
    r.t.push_back(s.t);
    r.f_direct.push_back(fd);
    r.f_quadrature.push_back(fq);
    const double rel = (fq - fd) / fd;
    worst = std::max(worst, std::abs(rel));
    r.final_signed_mismatch = rel;
  }
  if (!r.t.empty()) r.max_rel_mismatch = worst;
  return r;
}

FTransportReport F_transport_check(const FieldFn& a, const FieldFn& f, const std::vector<Trajectory>& streamlines,
                                   double tolerance) {
  FTransportReport r;
  r.tolerance = tolerance;
  double worst = 0.0, min_ratio = kNaN;
  for (const auto& tr : streamlines) {
    std::vector<double> F;
    double a0 = 0.0, a_last = 0.0;
    bool ok = !tr.truncated() && !tr.samples.empty();
    for (const auto& s : tr.samples) {
      double av = 0.0, fv = 0.0;
      if (a(s.t, s.z, av) != Lookup::ok || f(s.t, s.z, fv) != Lookup::ok || !(av > 0.0)) {
        ok = false;
        break;
      }
      if (F.empty()) a0 = av;
      a_last = av;
      F.push_back(fv / av);
      worst = std::max(worst, std::abs(F.back() - F.front()) / std::abs(F.front()));
    }
    if (!ok) ++r.incomplete;
    if (!F.empty()) {
      const double ratio = a_last / a0;
      min_ratio = std::isnan(min_ratio) ? ratio : std::min(min_ratio, ratio);
    }
    r.F.push_back(std::move(F));
  }
  r.max_rel_deviation = streamlines.empty() ? kNaN : worst;
  r.min_amplitude_ratio = min_ratio;
  r.conserved = !streamlines.empty() && r.incomplete == 0 && worst < tolerance;
  return r;
}

nlohmann::json FTransportReport::to_json() const {
  return {{"streamlines", F.size()},
          {"F", F},
          {"max_rel_deviation", max_rel_deviation},
          {"min_amplitude_ratio", min_amplitude_ratio},
          {"incomplete", incomplete},
          {"conserved", conserved},
          {"tolerance", tolerance}};
}

PerrinReport perrin_diagnostic(const FieldFn& a, const FieldFn& f, const Trajectory& z_traj,
                               const std::vector<Trajectory>& offset_streamlines, double delta) {
  require(!offset_streamlines.empty(), ErrorKind::precondition, "Perrin diagnostic needs offset streamlines");
  PerrinReport r;
  r.delta = delta;
  std::vector<double> f0(offset_streamlines.size(), kNaN);
  double a0 = kNaN;
  for (std::size_t k = 0; k < z_traj.samples.size(); ++k) {
    const auto& s = z_traj.samples[k];
    double az = 0.0;
    if (a(s.t, s.z, az) != Lookup::ok) break;
    if (k == 0) a0 = az;
    double sum = 0.0;
    std::size_t used = 0;
    for (std::size_t j = 0; j < offset_streamlines.size(); ++j) {
      const auto& tr = offset_streamlines[j];
      if (k >= tr.samples.size() || std::abs(tr.samples[k].t - s.t) > 1e-9) continue;
      double fv = 0.0;
      if (f(s.t, tr.samples[k].z, fv) != Lookup::ok) continue;
      if (k == 0) f0[j] = fv;
      if (!std::isfinite(f0[j])) continue;
      sum += fv / f0[j];
      ++used;
    }
    if (used == 0) break;
    r.t.push_back(s.t);
    r.a_ratio.push_back(az / a0);
    r.f_ratio.push_back(sum / static_cast<double>(used));
  }
  return r;
}

nlohmann::json PerrinReport::to_json() const {
  return {{"delta", delta}, {"t", t}, {"f_ratio", f_ratio}, {"a_ratio", a_ratio}};
}

// ---------------------------------------------------------------------------

namespace {

Vec3 axis_step(int a, double h) {
  Vec3 s;
  s[a] = h;
  return s;
}

/// (d phi + eA)^2 with the (+,-,-,-) metric.
double momentum_square(const HelmholtzInputs& in, double t, const Vec3& x, double h) {
  const double e = in.pot.charge;
  const Event ev{t, x};
  double p0 = (in.phi(t + h, x) - in.phi(t - h, x)) / (2.0 * h) + (in.pot.V ? e * in.pot.V(ev) : 0.0);
  double s = p0 * p0;
  const Vec3 A = in.pot.A ? in.pot.A(ev) : Vec3{};
  for (int a = 0; a < 3; ++a) {
    const Vec3 st = axis_step(a, h);
    const double pa = (in.phi(t, x + st) - in.phi(t, x - st)) / (2.0 * h) - e * A[a];
    s -= pa * pa;
  }
  return s;
}

double box_of(const ScalarFn& f, double t, const Vec3& x, double h) {
  double b = (f(t + h, x) - 2.0 * f(t, x) + f(t - h, x)) / (h * h);
  for (int a = 0; a < 3; ++a) {
    const Vec3 st = axis_step(a, h);
    b -= (f(t, x + st) - 2.0 * f(t, x) + f(t, x - st)) / (h * h);
  }
  return b;
}

double y_of(const HelmholtzInputs& in, double t, const Vec3& x, double h) {
  const double chi = in.pot.chi ? in.pot.chi(Event{t, x}) : 0.0;
  return momentum_square(in, t, x, h) - chi - box_of(in.beta, t, x, h) / in.beta(t, x) - in.Omega * in.Omega;
}

}  // namespace

HelmholtzReport comoving_helmholtz_construct(const HelmholtzInputs& in) {
  require(in.beta && in.phi && in.z_path, ErrorKind::configuration, "Helmholtz construction needs beta, phi and z");
  require(in.r_outer > in.r_inner && in.r_inner > 0.0, ErrorKind::configuration, "annulus needs 0 < r_inner < r_outer");
  require(in.fd_step > 0.0 && in.fd_step < 0.1 * in.r_inner, ErrorKind::configuration,
          "finite-difference step must be well inside the annulus");
  const double h = in.fd_step;
  const double t = in.t;
  HelmholtzReport rep;
  auto& fr = rep.frame;
  fr.t = t;
  fr.z = in.z_path(t);
  fr.zdot = (in.z_path(t + h) - in.z_path(t - h)) * (1.0 / (2.0 * h));
  fr.zddot = (in.z_path(t + h) - 2.0 * fr.z + in.z_path(t - h)) * (1.0 / (h * h));
  auto logb = [&](double tt, const Vec3& x) { return std::log(in.beta(tt, x)); };
  const double dt_logb = (logb(t + h, fr.z) - logb(t - h, fr.z)) / (2.0 * h);
  for (int a = 0; a < 3; ++a) {
    const Vec3 st = axis_step(a, h);
    fr.A[a] = fr.zdot[a] * dt_logb + (logb(t, fr.z + st) - logb(t, fr.z - st)) / (2.0 * h);
  }
  fr.B = y_of(in, t, fr.z, h);
  fr.rigidity_length = in.r_outer;
  fr.rigidity_ratio = norm(fr.zddot) * fr.rigidity_length;
  fr.velocity_sq = dot(fr.zdot, fr.zdot);
  fr.valid = fr.rigidity_ratio < in.rigidity_limit && fr.velocity_sq < in.velocity_sq_limit;
  if (fr.rigidity_ratio >= in.rigidity_limit) {
    fr.status = "construction invalid: rigidity ratio |z''| l = " + std::to_string(fr.rigidity_ratio);
  } else if (fr.velocity_sq >= in.velocity_sq_limit) {
    fr.status = "construction invalid: |z'|^2 = " + std::to_string(fr.velocity_sq) + " outside the slow-motion window";
  } else {
    fr.status = "valid";
  }
  if (!fr.valid) return rep;

  // G(t', x) = G'(x - z(t')) with A and B frozen at the construction time.
  auto G = [&](double tt, const Vec3& x) { return helmholtz_multipole(fr.B, fr.A, x - in.z_path(tt), in.C).G.real(); };
  auto Gp = [&](const Vec3& xp) { return helmholtz_multipole(fr.B, fr.A, xp, in.C).G.real(); };
  const auto region = annulus_region(fr.z, in.r_inner, in.r_outer, std::max(2, in.samples / 5), 3, t);
  std::vector<double> box_v, drift_v, pot_v, res_v, rel_v, acc_v, far_v;
  for (const auto& ev : region.samples) {
    const Vec3& x = ev.x;
    const double g0 = G(t, x);
    const double box = box_of(G, t, x, h);
    const double dtG = (G(t + h, x) - G(t - h, x)) / (2.0 * h);
    double drift = (logb(t + h, x) - logb(t - h, x)) / (2.0 * h) * dtG;
    for (int a = 0; a < 3; ++a) {
      const Vec3 st = axis_step(a, h);
      drift -= (logb(t, x + st) - logb(t, x - st)) / (2.0 * h) * (G(t, x + st) - G(t, x - st)) / (2.0 * h);
    }
    const double yg = y_of(in, t, x, h) * g0;
    const double res = box + 2.0 * drift - yg;
    const Vec3 xp = x - fr.z;
    const double rel = (Gp(xp + fr.zdot * h) - 2.0 * Gp(xp) + Gp(xp - fr.zdot * h)) / (h * h);
    const double acc = -(Gp(xp + fr.zddot * h) - Gp(xp - fr.zddot * h)) / (2.0 * h);
    box_v.push_back(box);
    drift_v.push_back(2.0 * drift);
    pot_v.push_back(yg);
    res_v.push_back(res);
    rel_v.push_back(rel);
    acc_v.push_back(acc);
    far_v.push_back(res - rel - acc);
  }
  auto& r = rep.residual;
  r.box_term = rms(box_v);
  r.drift_term = rms(drift_v);
  r.potential_term = rms(pot_v);
  r.dominant = std::max({r.box_term, r.drift_term, r.potential_term});
  r.residual = rms(res_v);
  r.relative = r.dominant > 0.0 ? r.residual / r.dominant : kNaN;
  r.relativistic_part = rms(rel_v);
  r.acceleration_part = rms(acc_v);
  r.far_field_part = rms(far_v);
  return rep;
}

nlohmann::json HelmholtzReport::to_json() const {
  auto vec = [](const Vec3& v) { return std::vector<double>(v.c.begin(), v.c.end()); };
  return {{"t", frame.t},
          {"z", vec(frame.z)},
          {"zdot", vec(frame.zdot)},
          {"zddot", vec(frame.zddot)},
          {"A", vec(frame.A)},
          {"B", frame.B},
          {"rigidity_length", frame.rigidity_length},
          {"rigidity_ratio", frame.rigidity_ratio},
          {"velocity_sq", frame.velocity_sq},
          {"valid", frame.valid},
          {"status", frame.status},
          {"residual",
           {{"box_term", residual.box_term},
            {"drift_term", residual.drift_term},
            {"potential_term", residual.potential_term},
            {"dominant", residual.dominant},
            {"residual", residual.residual},
            {"relative", residual.relative},
            {"relativistic_part", residual.relativistic_part},
            {"acceleration_part", residual.acceleration_part},
            {"far_field_part", residual.far_field_part}}}};
}

ComplexField sample_comoving_G(const ComovingFrameData& frame, const GridSpec& grid, double C, double mask_radius) {
  std::vector<Complex> v(grid.size());
  std::vector<std::uint8_t> mask(grid.size(), 0);
  bool any = false;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec3 xp = grid.position(i) - frame.z;
    if (norm(xp) < std::max(mask_radius, 1e-300)) {
      v[i] = nan_value<Complex>();
      mask[i] = 1;
      any = true;
      continue;
    }
    v[i] = helmholtz_multipole(frame.B, frame.A, xp, C).G;
  }
  if (!any) mask.clear();
  return ComplexField(grid, std::move(v), frame.t, std::move(mask));
}

}  // namespace wavemech
