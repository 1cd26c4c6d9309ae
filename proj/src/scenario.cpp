#include "wavemech/scenario.hpp"

#include "wavemech/evolve.hpp"
#include "wavemech/guidance.hpp"
#include "wavemech/interpolate.hpp"
#include "wavemech/numerics.hpp"
#include "wavemech/singular.hpp"
#include "wavemech/snapshot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace wavemech {

namespace fs = std::filesystem;
using json = nlohmann::json;

bool ScenarioResult::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

json ScenarioResult::report_json() const {
  json checks_json = json::array();
  for (const auto& c : checks) {
    json j = c.details;
    j["check_name"] = c.check_name;
    j["pass"] = c.pass;
    j["tolerances"] = c.tolerances;
    checks_json.push_back(std::move(j));
  }
  return json{{"scenario", scenario}, {"all_pass", all_pass()}, {"checks", std::move(checks_json)}};
}

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{"plane_wave",          "free_gaussian",     "double_gaussian_interference",
                                              "harmonic_oscillator", "moving_monopole",   "comoving_helmholtz",
                                              "perrin_spreading"};
  return names;
}

namespace {

json vec_json(const Vec3& v, int dims) {
  json j = json::array();
  for (int a = 0; a < dims; ++a) j.push_back(v[a]);
  return j;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::io, "cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

void write_trajectory(const fs::path& path, const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::io, "cannot write '" + path.string() + "'");
  write_trajectory_csv(out, traj);
}

std::string indexed(const std::string& stem, long i, const std::string& ext) {
  std::ostringstream os;
  os << stem << '_';
  os.width(5);
  os.fill('0');
  os << i << ext;
  return os.str();
}

/// Shared state of one run: the config, the output location, the
/// bookkeeping for the manifest and the collected checks.
struct Ctx {
  Ctx(Config& c, RunOptions o, std::string n) : cfg(c), opts(std::move(o)), name(std::move(n)) {}

  Config& cfg;
  RunOptions opts;
  std::string name;
  fs::path out;
  std::uint64_t seed = 1;
  bool snapshots = false;
  long steps = 0;
  long save_stride = 1;
  std::vector<CheckResult> checks;

  /// Rethrows a configuration error from `fn` with the line of `key`.
  template <class Fn>
  auto at(const std::string& key, Fn&& fn) -> decltype(fn()) {
    try {
      return fn();
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::configuration) throw;
      cfg.fail_at(key, e.what());
    }
  }

  double tol(const std::string& key, double fallback) { return cfg.get_double("verify." + key, fallback); }

  double positive(const std::string& key, double fallback) {
    const double v = cfg.get_double(key, fallback);
    if (!(v > 0.0) || !std::isfinite(v)) cfg.fail_at(key, "must be a positive number");
    return v;
  }

  int count(const std::string& key, long fallback, long lo = 1) {
    const long v = cfg.get_int(key, fallback);
    if (v < lo) cfg.fail_at(key, "must be at least " + std::to_string(lo));
    return static_cast<int>(v);
  }

  GridSpec grid() {
    GridSpec g;
    const long dims = cfg.get_int("grid.dims");
    if (dims < 1 || dims > 3) cfg.fail_at("grid.dims", "must be 1, 2 or 3");
    const auto n = static_cast<std::size_t>(dims);
    const auto mins = cfg.get_doubles("grid.min", n);
    const auto pts = cfg.get_doubles("grid.points", n);
    std::vector<double> maxs;
    if (cfg.has("grid.period")) {
      const auto per = cfg.get_doubles("grid.period", n);
      for (std::size_t a = 0; a < n; ++a) maxs.push_back(mins[a] + per[a] * (pts[a] - 1.0) / pts[a]);
    } else {
      maxs = cfg.get_doubles("grid.max", n);
    }
    for (std::size_t a = 0; a < n; ++a) {
      if (pts[a] < 3 || pts[a] != std::floor(pts[a])) cfg.fail_at("grid.points", "needs integers >= 3");
      if (!(maxs[a] > mins[a])) cfg.fail_at(cfg.has("grid.period") ? "grid.period" : "grid.max", "must exceed grid.min");
      g.axes.push_back(AxisSpec{mins[a], maxs[a], static_cast<int>(pts[a])});
    }
    g.dt = positive("grid.dt", 0.0);
    g.boundary = at("grid.boundary", [&] { return boundary_from_string(cfg.get_string("grid.boundary", "dirichlet_zero")); });
    at("grid.dims", [&] {
      g.validate();
      return 0;
    });
    return g;
  }

  /// run.steps, or run.t_end as a whole number of dt steps, plus the save stride.
  void schedule(double dt) {
    if (cfg.has("run.steps")) {
      steps = count("run.steps", 1);
    } else {
      const double t_end = positive("run.t_end", 0.0);
      steps = std::lround(t_end / dt);
      if (steps < 1 || std::abs(steps * dt - t_end) > 1e-9 * std::max(1.0, t_end)) {
        cfg.fail_at("run.t_end", "must be a whole number of grid.dt steps");
      }
    }
    save_stride = count("run.save_stride", 1);
    if (steps % save_stride != 0) cfg.fail_at("run.save_stride", "must divide the step count " + std::to_string(steps));
  }

  /// Output options, unused-key rejection, directory creation and the
  /// manifest. Everything after this may write files.
  void begin() {
    if (opts.seed) cfg.set("run.seed", std::to_string(*opts.seed));
    const long s = cfg.get_int("run.seed", 1);
    if (s < 0) cfg.fail_at("run.seed", "must be non-negative");
    seed = static_cast<std::uint64_t>(s);
    snapshots = cfg.get_bool("output.snapshots", false);
    const std::string dir = cfg.get_string("output.dir", "out/" + name);
    cfg.reject_unused();
    out = opts.out_dir ? *opts.out_dir : fs::path(dir);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) fail(ErrorKind::io, "cannot create output directory '" + out.string() + "': " + ec.message());
    if (snapshots) fs::create_directories(out / "snapshots", ec);
    write_json(out / "manifest.json", json{{"scenario", name},
                                           {"steps", steps},
                                           {"save_stride", save_stride},
                                           {"config_hash", fnv1a_hex(cfg.serialize())},
                                           {"seed", seed}});
  }

  void check(const std::string& check_name, bool pass, json details, json tolerances) {
    checks.push_back(CheckResult{check_name, pass, std::move(details), std::move(tolerances)});
  }

  void snapshot(const std::string& stem, long i, const ComplexField& f, const std::string& field_name) {
    if (snapshots) write_snapshot(out / "snapshots" / indexed(stem, i, ".bin"), f, field_name);
  }
};

// ---------------------------------------------------------------------------
// Shared pieces

double field_norm(const ComplexField& f) {
  double s = 0.0;
  for (const auto& v : f.values()) s += std::norm(v);
  return s * f.grid().cell_volume();
}

/// Position variance along axis 0 of |psi|^2.
double axis0_variance(const ComplexField& f) {
  double m0 = 0.0, m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double w = std::norm(f[i]);
    const double x = f.grid().position(i)[0];
    m0 += w;
    m1 += w * x;
    m2 += w * x * x;
  }
  const double mean = m1 / m0;
  return m2 / m0 - mean * mean;
}

using SaveFn = std::function<void(const FieldStack& stack, long step, double t)>;

struct SchrodingerOutcome {
  double norm0 = 0.0;
  double max_norm_drift = 0.0;
  ComplexField final_field;
};

/// Crank-Nicolson run of ctx.steps steps. Every save point hands the
/// centred stack (t - dt, t, t + dt) to `on_save`; the slice before t = 0
/// comes from one reversed step. On divergence the last finite state is
/// written to last_good.bin before the error propagates.
SchrodingerOutcome run_schrodinger(Ctx& ctx, const ComplexField& psi0, const FourPotential& pot,
                                   const SchrodingerConfig& sc, double dt, const SaveFn& on_save) {
  auto relabel = [](EvolutionState s, double t) {
    s.current = s.current.with_time(t);
    s.t = t;
    return s;
  };
  EvolutionState cur{EvolutionRegime::schrodinger, psi0.with_time(0.0), std::nullopt, 0.0, 0.0, false};
  EvolutionState prev = relabel(schrodinger_step(cur, pot, -dt, sc), -dt);
  SchrodingerOutcome o;
  o.norm0 = field_norm(cur.current);
  for (long n = 0;; ++n) {
    EvolutionState next;
    try {
      next = relabel(schrodinger_step(cur, pot, dt, sc), static_cast<double>(n + 1) * dt);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::diverged) write_snapshot(ctx.out / "last_good.bin", cur.current, "psi");
      throw;
    }
    if (n % ctx.save_stride == 0) {
      on_save(FieldStack{prev.current, cur.current, next.current, dt}, n, cur.t);
      ctx.snapshot("psi", n, cur.current, "psi");
    }
    if (n == ctx.steps) break;
    o.max_norm_drift = std::max(o.max_norm_drift, std::abs(field_norm(next.current) - o.norm0));
    prev = std::move(cur);
    cur = std::move(next);
  }
  o.final_field = cur.current;
  return o;
}

/// Continuity residual integrated over the defined nodes of one slice.
double continuity_integral(const PolarFields& polar, const FourPotential& pot, double mass, const StencilConfig& sc) {
  const RealField r = continuity_residual(polar, pot, Regime::nonrelativistic, mass, sc);
  double s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (std::isfinite(r[i])) s += r[i];
  }
  return s * r.grid().cell_volume();
}

struct EnsembleSettings {
  std::size_t n = 10000;
  double dt = 0.0;
  int bins = 32;
  int write_count = 8;
};

EnsembleSettings read_ensemble(Ctx& ctx, double field_dt) {
  EnsembleSettings s;
  s.n = static_cast<std::size_t>(ctx.count("ensemble.n", 10000));
  s.dt = ctx.positive("ensemble.dt", field_dt);
  s.bins = ctx.count("ensemble.bins", 32);
  if (s.bins > 64) ctx.cfg.fail_at("ensemble.bins", "at most 64 bins");
  s.write_count = ctx.count("ensemble.write_trajectories", 8, 0);
  const double save_dt = field_dt * static_cast<double>(ctx.save_stride);
  const double ratio = save_dt / s.dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) {
    ctx.cfg.fail_at("ensemble.dt", "must divide the save interval " + format_double(save_dt));
  }
  return s;
}

struct EnsembleOutcome {
  std::vector<Trajectory> trajectories;
  std::vector<double> tv;
  std::vector<double> floor;
  std::size_t truncated = 0;
  std::size_t crossings = 0;
};

/// Samples |psi(0)|^2, integrates the members through `flow` and compares
/// the member histogram with |psi|^2 at every saved time. `range(t)` gives
/// the histogram window along axis 0.
EnsembleOutcome run_ensemble(Ctx& ctx, const FlowSeries& flow, const std::vector<ComplexField>& saved,
                             const std::vector<double>& times, const EnsembleSettings& es,
                             const std::function<std::pair<double, double>(double)>& range) {
  const Ensemble ens = sample_ensemble(saved.front(), es.n, ctx.seed);
  IntegrateOptions io;
  io.dt = es.dt;
  io.regime = Regime::nonrelativistic;
  io.record_stride = static_cast<int>(std::lround((times[1] - times[0]) / es.dt));
  EnsembleOutcome o;
  o.trajectories = integrate_ensemble(flow, ens, times.back(), io);
  for (std::size_t j = 0; j < times.size(); ++j) {
    std::vector<Vec3> pos;
    pos.reserve(o.trajectories.size());
    for (const auto& tr : o.trajectories) {
      if (tr.samples.size() > j && std::abs(tr.samples[j].t - times[j]) < 1e-9) pos.push_back(tr.samples[j].z);
    }
    const auto [lo, hi] = range(times[j]);
    const Histogram ref = histogram_of(saved[j], lo, hi, es.bins);
    o.tv.push_back(tv_distance(histogram_of(pos, lo, hi, es.bins), ref));
    o.floor.push_back(tv_noise_floor(ref, pos.size()));
  }
  for (const auto& tr : o.trajectories) o.truncated += tr.truncated() ? 1 : 0;
  if (saved.front().grid().dims() == 1) o.crossings = crossing_violations(o.trajectories);
  write_json(ctx.out / "ensemble.json", json{{"n", es.n},
                                             {"seed", ctx.seed},
                                             {"times", times},
                                             {"tv_distance_series", o.tv},
                                             {"noise_floor_series", o.floor},
                                             {"truncated_count", o.truncated}});
  for (int k = 0; k < es.write_count && static_cast<std::size_t>(k) < o.trajectories.size(); ++k) {
    write_trajectory(ctx.out / indexed("trajectory", k, ".csv"), o.trajectories[static_cast<std::size_t>(k)]);
  }
  return o;
}

/// Equivariance checks common to the Schrodinger scenarios.
void ensemble_checks(Ctx& ctx, const EnsembleOutcome& o, double tv_tol, double floor_factor) {
  double worst_ratio = 0.0;
  for (std::size_t j = 0; j < o.tv.size(); ++j) worst_ratio = std::max(worst_ratio, o.tv[j] / o.floor[j]);
  ctx.check("equivariance", o.tv.back() <= tv_tol && o.truncated == 0,
            json{{"tv_final", o.tv.back()}, {"noise_floor_final", o.floor.back()}, {"truncated", o.truncated}},
            json{{"tv", tv_tol}});
  ctx.check("equivariance_series", worst_ratio <= floor_factor,
            json{{"tv_distance_series", o.tv}, {"noise_floor_series", o.floor}, {"worst_floor_ratio", worst_ratio}},
            json{{"tv_floor_factor", floor_factor}});
}

Complex plane_value(const PlanePhaseWave& w, double t, const Vec3& x) { return w.value(Event{t, x}); }

// ---------------------------------------------------------------------------
// plane_wave: boosted phase wave, guided straight line, clock.

void plane_wave(Ctx& ctx) {
  auto& c = ctx.cfg;
  const GridSpec grid = ctx.grid();
  const int d = grid.dims();
  const double omega0 = ctx.positive("physics.omega0", 1.0);
  const double Omega = ctx.positive("physics.Omega", omega0);
  const Vec3 v = c.get_vec("physics.velocity", d);
  if (norm(v) >= 1.0) {
    fail(ErrorKind::superluminal, c.source() + ": physics.velocity: superluminal boost, |v| = " + format_double(norm(v)) +
                                      " >= 1");
  }
  const PlanePhaseWave wave = PlanePhaseWave::from_boost(omega0, v);
  Vec3 mid;
  for (int a = 0; a < d; ++a) mid[a] = 0.5 * (grid.axes[static_cast<std::size_t>(a)].min + grid.axes[static_cast<std::size_t>(a)].max);
  const Vec3 z0 = c.get_vec("initial.z0", d, mid);
  if (grid.boundary == Boundary::periodic) {
    for (int a = 0; a < d; ++a) {
      const double cycles = wave.k[a] * grid.period(a) / (2.0 * kPi);
      if (std::abs(cycles - std::round(cycles)) > 1e-6) {
        c.fail_at("grid.period", "holds " + format_double(cycles) + " wavelengths along axis " + std::to_string(a) +
                                     "; a periodic plane wave needs a whole number");
      }
    }
  }
  ctx.schedule(grid.dt);
  const double tol_disp = ctx.tol("dispersion", 1e-12);
  const double tol_meas = ctx.tol("measured_dispersion", 1e-10);
  const double tol_clock = ctx.tol("clock", 1e-8);
  const double tol_traj = ctx.tol("trajectory", 1e-9);
  const double tol_kg = ctx.tol("kg_error", 0.05);
  const double tol_energy = ctx.tol("kg_energy", 1e-9);
  ctx.begin();

  const double dt = grid.dt;
  const double t_end = static_cast<double>(ctx.steps) * dt;
  auto sample_at = [&](double t) {
    return ComplexField::generate(grid, [&](const Vec3& x) { return plane_value(wave, t, x); }, t);
  };
  DecomposeOptions dopt;
  dopt.method = PhaseGradientMethod::link;
  FlowSeries flow;
  double worst_measured = 0.0;
  double measured_omega = kNaN, measured_k = kNaN;
  for (long n = 0; n <= ctx.steps; n += ctx.save_stride) {
    const double t = static_cast<double>(n) * dt;
    const FieldStack stack{sample_at(t - dt), sample_at(t), sample_at(t + dt), dt};
    const PolarFields polar = decompose(stack, FourPotential::none(), dopt);
    flow.add(velocity_fields(polar, FourPotential::none(), Regime::relativistic, omega0), &polar);
    for (std::size_t i = 0; i < polar.amplitude.size(); ++i) {
      const double w = -(*polar.phase_dt)[i];
      double k2 = 0.0;
      for (int a = 0; a < d; ++a) k2 += polar.phase_gradient[static_cast<std::size_t>(a)][i] * polar.phase_gradient[static_cast<std::size_t>(a)][i];
      worst_measured = std::max(worst_measured, std::abs(w * w - k2 - omega0 * omega0));
      if (i == 0 && n == 0) {
        measured_omega = w;
        measured_k = std::sqrt(k2);
      }
    }
  }

  IntegrateOptions io;
  io.dt = dt;
  io.regime = Regime::relativistic;
  io.record_stride = static_cast<int>(ctx.save_stride);
  Trajectory traj = integrate_trajectory(flow, z0, 0.0, t_end, io);
  const PhaseRateFn rates = flow.phase_rate_fn();
  accumulate_phase(traj, rates, wave.phase(Event{0.0, z0}));
  const ClockReport clock = internal_clock_check(traj, rates, omega0);
  write_trajectory(ctx.out / "trajectory.csv", traj);

  double worst_path = 0.0;
  const Vec3 vg = wave.group_velocity();
  for (const auto& s : traj.samples) worst_path = std::max(worst_path, norm(s.z - z0 - vg * s.t));

  // Klein-Gordon leapfrog from the exact initial data.
  KleinGordonConfig kc;
  kc.Omega = Omega;
  const ComplexField u0 = sample_at(0.0);
  const ComplexField ut0 = ComplexField::generate(grid, [&](const Vec3& x) { return Complex(0.0, -wave.omega) * plane_value(wave, 0.0, x); });
  EvolutionState st = klein_gordon_start(u0, ut0, FourPotential::none(), dt, kc);
  const double e0 = diagnostics(st, kc).energy;
  double worst_energy = 0.0, worst_field = 0.0;
  for (long n = 1; n <= ctx.steps; ++n) {
    try {
      st = klein_gordon_step(st, FourPotential::none(), dt, kc);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::diverged) write_snapshot(ctx.out / "last_good.bin", st.current, "u");
      throw;
    }
    worst_energy = std::max(worst_energy, std::abs(diagnostics(st, kc).energy - e0) / std::abs(e0));
    if (n % ctx.save_stride == 0) {
      const double t = static_cast<double>(n) * dt;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        worst_field = std::max(worst_field, std::abs(st.current[i] - plane_value(wave, t, grid.position(i))));
      }
      ctx.snapshot("u", n, st.current.with_time(t), "u");
    }
  }

  const bool mass_shell = Omega == omega0;
  ctx.check("dispersion", std::abs(wave.dispersion_residual()) < tol_disp,
            json{{"omega", wave.omega}, {"k", norm(wave.k)}, {"residual", wave.dispersion_residual()}},
            json{{"dispersion", tol_disp}});
  ctx.check("measured_dispersion", worst_measured < tol_meas,
            json{{"omega", measured_omega}, {"k", measured_k}, {"max_residual", worst_measured}},
            json{{"measured_dispersion", tol_meas}});
  ctx.check("clock", clock.complete && clock.max_deviation < tol_clock && !traj.truncated(),
            json{{"max_deviation", clock.max_deviation},
                 {"mean_rate", clock.mean_rate},
                 {"clock_pulsation_lab", wave.clock_pulsation()},
                 {"segments", clock.segments},
                 {"trajectory_status", to_string(traj.status)}},
            json{{"clock", tol_clock}});
  ctx.check("straight_line", worst_path < tol_traj, json{{"max_deviation", worst_path}, {"velocity", vec_json(vg, d)}},
            json{{"trajectory", tol_traj}});
  ctx.check("kg_evolution", worst_field < tol_kg && worst_energy < tol_energy,
            json{{"max_field_error", worst_field}, {"max_relative_energy_drift", worst_energy}, {"Omega_equals_omega0", mass_shell}},
            json{{"kg_error", tol_kg}, {"kg_energy", tol_energy}});
}

// ---------------------------------------------------------------------------
// Schrodinger scenarios with an ensemble.

struct PacketScenario {
  double mass = 1.0;
  SchrodingerConfig sc;
  StencilConfig stencil;
  FourPotential pot;
  ComplexField psi0;
};

/// Evolves, builds the flow series and the saved fields, and records the
/// per-slice continuity integrals and the norm drift.
struct PacketRun {
  SchrodingerOutcome evo;
  FlowSeries flow;
  std::vector<ComplexField> saved;
  std::vector<double> times;
  double worst_continuity = 0.0;
};

PacketRun run_packet(Ctx& ctx, const GridSpec& grid, const PacketScenario& ps,
                     const std::function<void(const PolarFields&, const FieldStack&)>& per_slice = {}) {
  PacketRun r;
  DecomposeOptions dopt;
  dopt.method = PhaseGradientMethod::link;
  dopt.stencil = ps.stencil;
  r.evo = run_schrodinger(ctx, ps.psi0, ps.pot, ps.sc, grid.dt, [&](const FieldStack& st, long, double t) {
    const PolarFields polar = decompose(st, ps.pot, dopt);
    r.flow.add(velocity_fields(polar, ps.pot, Regime::nonrelativistic, ps.mass, ps.stencil), &polar);
    r.saved.push_back(st.current);
    r.times.push_back(t);
    r.worst_continuity = std::max(r.worst_continuity, std::abs(continuity_integral(polar, ps.pot, ps.mass, ps.stencil)));
    if (per_slice) per_slice(polar, st);
  });
  return r;
}

void conservation_checks(Ctx& ctx, const PacketRun& r, double tol_norm, double tol_cont) {
  ctx.check("norm_drift", r.evo.max_norm_drift < tol_norm,
            json{{"initial_norm", r.evo.norm0}, {"max_drift", r.evo.max_norm_drift}, {"steps", ctx.steps}},
            json{{"norm_drift", tol_norm}});
  ctx.check("continuity", r.worst_continuity < tol_cont,
            json{{"max_integrated_residual", r.worst_continuity}, {"slices", r.times.size()}},
            json{{"continuity", tol_cont}});
}

void free_gaussian(Ctx& ctx) {
  auto& c = ctx.cfg;
  const GridSpec grid = ctx.grid();
  const int d = grid.dims();
  PacketScenario ps;
  ps.mass = ctx.positive("physics.mass", 1.0);
  ps.sc.mass = ps.mass;
  ps.sc.order = ctx.count("physics.order", 2);
  ps.stencil.order = ps.sc.order;
  const Vec3 center = c.get_vec("initial.center", d);
  const double sigma = ctx.positive("initial.sigma", 1.0);
  const Vec3 k = c.get_vec("initial.k", d);
  ctx.schedule(grid.dt);
  const EnsembleSettings es = read_ensemble(ctx, grid.dt);
  const double range_sigmas = ctx.positive("ensemble.range_sigmas", 4.0);
  const int follow = ctx.count("ensemble.follow", 16);
  const double tol_norm = ctx.tol("norm_drift", 1e-8);
  const double tol_cont = ctx.tol("continuity", 1e-6);
  const double tol_width = ctx.tol("width", 5e-3);
  const double tol_closed = ctx.tol("closed_form", 2e-3);
  const double tol_tv = ctx.tol("tv", 0.03);
  const double tol_floor = ctx.tol("tv_floor_factor", 3.0);
  const double tol_path = ctx.tol("trajectory", 0.01);
  ctx.begin();

  ps.psi0 = gaussian_packet(grid, center, sigma, k);
  PacketRun r = run_packet(ctx, grid, ps);
  const double t_end = r.times.back();
  auto mean_at = [&](double t) { return center[0] + k[0] * t / ps.mass; };
  const EnsembleOutcome eo = run_ensemble(ctx, r.flow, r.saved, r.times, es, [&](double t) {
    const double s = free_gaussian_width(sigma, t, ps.mass);
    return std::make_pair(mean_at(t) - range_sigmas * s, mean_at(t) + range_sigmas * s);
  });

  const double width = std::sqrt(axis0_variance(r.evo.final_field));
  const double width_exact = free_gaussian_width(sigma, t_end, ps.mass);
  double worst_closed = 0.0, peak = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Complex ex = free_gaussian_exact(grid.position(i), t_end, d, center, sigma, k, ps.mass);
    worst_closed = std::max(worst_closed, std::abs(r.evo.final_field[i] - ex));
    peak = std::max(peak, std::abs(ex));
  }
  // Exact guided paths scale with the width about the moving centre.
  double worst_path = 0.0;
  for (int m = 0; m < follow && static_cast<std::size_t>(m) < eo.trajectories.size(); ++m) {
    const auto& tr = eo.trajectories[static_cast<std::size_t>(m)];
    const Vec3 x0 = tr.samples.front().z;
    for (const auto& s : tr.samples) {
      const double sc = free_gaussian_width(sigma, s.t, ps.mass) / sigma;
      const Vec3 exact = center + k * (s.t / ps.mass) + (x0 - center) * sc;
      worst_path = std::max(worst_path, norm(s.z - exact) / free_gaussian_width(sigma, s.t, ps.mass));
    }
  }

  conservation_checks(ctx, r, tol_norm, tol_cont);
  ctx.check("width", std::abs(width / width_exact - 1.0) < tol_width,
            json{{"t", t_end}, {"sigma_numeric", width}, {"sigma_exact", width_exact}}, json{{"width", tol_width}});
  ctx.check("closed_form", worst_closed / peak < tol_closed, json{{"t", t_end}, {"max_relative_error", worst_closed / peak}},
            json{{"closed_form", tol_closed}});
  ensemble_checks(ctx, eo, tol_tv, tol_floor);
  if (d == 1) {
    ctx.check("no_crossing", eo.crossings == 0, json{{"violations", eo.crossings}}, json{{"violations", 0}});
  }
  ctx.check("guided_paths", worst_path < tol_path, json{{"followed", follow}, {"max_error_over_sigma", worst_path}},
            json{{"trajectory", tol_path}});
}

void double_gaussian_interference(Ctx& ctx) {
  auto& c = ctx.cfg;
  const GridSpec grid = ctx.grid();
  const int d = grid.dims();
  if (d != 1) c.fail_at("grid.dims", "double_gaussian_interference is one-dimensional");
  PacketScenario ps;
  ps.mass = ctx.positive("physics.mass", 1.0);
  ps.sc.mass = ps.mass;
  const double separation = ctx.positive("initial.separation", 8.0);
  const double sigma = ctx.positive("initial.sigma", 1.0);
  ctx.schedule(grid.dt);
  const EnsembleSettings es = read_ensemble(ctx, grid.dt);
  const double range_sigmas = ctx.positive("ensemble.range_sigmas", 4.0);
  const double tol_norm = ctx.tol("norm_drift", 1e-8);
  const double tol_cont = ctx.tol("continuity", 1e-6);
  const double tol_tv = ctx.tol("tv", 0.05);
  const double tol_floor = ctx.tol("tv_floor_factor", 3.0);
  ctx.begin();

  const Vec3 c1{-0.5 * separation, 0.0, 0.0};
  const Vec3 c2{0.5 * separation, 0.0, 0.0};
  ps.psi0 = double_gaussian(grid, c1, c2, sigma, Vec3{});
  PacketRun r = run_packet(ctx, grid, ps);
  const EnsembleOutcome eo = run_ensemble(ctx, r.flow, r.saved, r.times, es, [&](double t) {
    const double reach = 0.5 * separation + range_sigmas * free_gaussian_width(sigma, t, ps.mass);
    return std::make_pair(-reach, reach);
  });
  std::size_t axis_crossings = 0;
  for (const auto& tr : eo.trajectories) {
    const double s0 = tr.samples.front().z[0];
    for (const auto& s : tr.samples) {
      if (s.z[0] * s0 < 0.0) {
        ++axis_crossings;
        break;
      }
    }
  }
  conservation_checks(ctx, r, tol_norm, tol_cont);
  ensemble_checks(ctx, eo, tol_tv, tol_floor);
  ctx.check("no_crossing", eo.crossings == 0, json{{"violations", eo.crossings}}, json{{"violations", 0}});
  ctx.check("symmetry_axis", axis_crossings == 0, json{{"trajectories_crossing_axis", axis_crossings}},
            json{{"crossings", 0}});
}

void harmonic_oscillator(Ctx& ctx) {
  const GridSpec grid = ctx.grid();
  const int d = grid.dims();
  PacketScenario ps;
  ps.mass = ctx.positive("physics.mass", 1.0);
  const double omega = ctx.positive("physics.omega", 1.0);
  ps.sc.mass = ps.mass;
  ps.sc.order = ctx.count("physics.order", d == 1 ? 4 : 2);
  if (ps.sc.order != 2 && ps.sc.order != 4) ctx.cfg.fail_at("physics.order", "must be 2 or 4");
  ps.stencil.order = ps.sc.order;
  ctx.schedule(grid.dt);
  const EnsembleSettings es = read_ensemble(ctx, grid.dt);
  const double range_sigmas = ctx.positive("ensemble.range_sigmas", 4.0);
  const double tol_norm = ctx.tol("norm_drift", 1e-8);
  const double tol_cont = ctx.tol("continuity", 1e-6);
  const double tol_q = ctx.tol("quantum_potential", 1e-6);
  const double tol_stat = ctx.tol("stationarity", 1e-6);
  const double q_floor = ctx.tol("quantum_potential_floor", 1e-4);
  const double tol_floor = ctx.tol("tv_floor_factor", 3.0);
  ctx.begin();

  ps.pot = oscillator_potential(grid, ps.mass, omega);
  ps.psi0 = oscillator_ground_state(grid, ps.mass, omega);
  const double target = 0.5 * omega * d;
  // Identity on the ground state itself over every defined node, then on the
  // evolved slices above an amplitude floor: deep in the tails roundoff in
  // psi is a large relative error in lap a / a.
  DecomposeOptions q_opts;
  q_opts.stencil = ps.stencil;
  auto q_deviation = [&](const PolarFields& polar, double floor_fraction, std::size_t& count) {
    const RealField Q = quantum_potential(polar, Regime::nonrelativistic, ps.mass, ps.stencil);
    double amax = 0.0;
    for (std::size_t i = 0; i < Q.size(); ++i) amax = std::max(amax, polar.amplitude[i]);
    double worst = 0.0;
    count = 0;
    for (std::size_t i = 0; i < Q.size(); ++i) {
      if (!std::isfinite(Q[i]) || polar.amplitude[i] < floor_fraction * amax) continue;
      ++count;
      worst = std::max(worst, std::abs(Q[i] + ps.pot.v_at(i) - target));
    }
    return worst;
  };
  std::size_t defined = 0, defined_evolved = 0;
  const double worst_q = q_deviation(decompose(ps.psi0, ps.pot, q_opts), 0.0, defined);
  double worst_q_evolved = 0.0, worst_stat = 0.0;
  PacketRun r = run_packet(ctx, grid, ps, [&](const PolarFields& polar, const FieldStack& st) {
    std::size_t count = 0;
    worst_q_evolved = std::max(worst_q_evolved, q_deviation(polar, q_floor, count));
    defined_evolved = std::max(defined_evolved, count);
    for (std::size_t i = 0; i < st.current.size(); ++i) {
      worst_stat = std::max(worst_stat, std::abs(std::abs(st.current[i]) - std::abs(ps.psi0[i])));
    }
  });
  const double sigma = std::sqrt(1.0 / (2.0 * ps.mass * omega));
  const EnsembleOutcome eo = run_ensemble(ctx, r.flow, r.saved, r.times, es, [&](double) {
    return std::make_pair(-range_sigmas * sigma, range_sigmas * sigma);
  });
  conservation_checks(ctx, r, tol_norm, tol_cont);
  ctx.check("quantum_potential", worst_q < tol_q && defined > 0,
            json{{"target", target}, {"max_abs_deviation", worst_q}, {"defined_nodes", defined}},
            json{{"quantum_potential", tol_q}});
  ctx.check("quantum_potential_evolved", worst_q_evolved < tol_q && defined_evolved > 0,
            json{{"target", target}, {"max_abs_deviation", worst_q_evolved}, {"nodes_above_floor", defined_evolved}},
            json{{"quantum_potential", tol_q}, {"quantum_potential_floor", q_floor}});
  ctx.check("stationarity", worst_stat < tol_stat, json{{"max_amplitude_change", worst_stat}},
            json{{"stationarity", tol_stat}});
  double worst_ratio = 0.0;
  for (std::size_t j = 0; j < eo.tv.size(); ++j) worst_ratio = std::max(worst_ratio, eo.tv[j] / eo.floor[j]);
  ctx.check("equivariance_series", worst_ratio <= tol_floor && eo.truncated == 0,
            json{{"tv_distance_series", eo.tv}, {"noise_floor_series", eo.floor}, {"worst_floor_ratio", worst_ratio}},
            json{{"tv_floor_factor", tol_floor}});
  if (d == 1) ctx.check("no_crossing", eo.crossings == 0, json{{"violations", eo.crossings}}, json{{"violations", 0}});
}

// ---------------------------------------------------------------------------
// moving_monopole: residual convergence of the closed-form singular wave.

void moving_monopole(Ctx& ctx) {
  auto& c = ctx.cfg;
  MonopoleSpec spec;
  spec.kind = ctx.at("physics.kind", [&] { return monopole_kind_from_string(c.get_string("physics.kind", "kg_simple")); });
  spec.omega0 = ctx.positive("physics.omega0", 1.0);
  spec.omega = ctx.positive("physics.omega", spec.omega0);
  spec.velocity = c.get_vec("physics.velocity", 3);
  spec.origin = c.get_vec("physics.origin", 3);
  if (norm(spec.velocity) >= 1.0) {
    fail(ErrorKind::superluminal, c.source() + ": physics.velocity: superluminal boost, |v| = " +
                                      format_double(norm(spec.velocity)) + " >= 1");
  }
  ctx.at("physics.kind", [&] {
    spec.validate();
    return 0;
  });
  const double r_in = ctx.positive("analysis.r_inner", 0.5);
  const double r_out = ctx.positive("analysis.r_outer", 2.0);
  if (r_out <= r_in) c.fail_at("analysis.r_outer", "must exceed analysis.r_inner");
  const int per_shell = ctx.count("analysis.samples", 48, 2);
  const double t0 = c.get_double("analysis.t", 0.0);
  const auto hs = c.get_list("analysis.h_values").empty() ? std::vector<double>{0.1, 0.05, 0.025, 0.0125}
                                                          : c.get_doubles("analysis.h_values", c.get_list("analysis.h_values").size());
  if (hs.size() < 2) c.fail_at("analysis.h_values", "needs at least two steps");
  std::optional<GridSpec> grid;
  if (c.has("grid.dims")) grid = ctx.grid();
  const double tol_order = ctx.tol("monopole_order", 1.8);
  ctx.begin();

  // Samples on the rest-frame shell r0 in [r_in, r_out] at rest time t0,
  // mapped to the lab frame.
  const ResidualRegion rest = annulus_region(Vec3{}, r_in, r_out, per_shell, 3, t0);
  ResidualRegion region;
  const double gamma = lorentz_factor(spec.velocity);
  for (const auto& e : rest.samples) {
    // A point fixed in the rest frame moves with the singularity.
    const Event lab = lorentz_boost(e, spec.velocity * -1.0);
    region.samples.push_back(Event{lab.t, lab.x + spec.origin});
  }
  region.singular_path = [&](double t) { return spec.origin + spec.velocity * t; };
  region.exclusion = 0.5 * r_in / gamma;
  const WaveOperator op = spec.kind == MonopoleKind::dalembert_timesym ? WaveOperator::dalembert : WaveOperator::klein_gordon;
  const ConvergenceReport rep = residual_oracle([&](const Event& e) { return eval_monopole(spec, e); }, op,
                                                spec.wave_mass(), PotentialFunctions{}, region, hs, 3);
  write_json(ctx.out / "residual.json", rep.to_json());

  if (grid) {
    // Plane z = 0 (or the grid itself in 3D) at t = 0, singular node masked.
    const GridSpec& g = *grid;
    std::vector<Complex> vals(g.size());
    std::vector<std::uint8_t> mask(g.size(), 0);
    const double rmask = 0.5 * g.min_spacing();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Vec3 x = g.position(i);
      if (norm(x - spec.origin) < rmask) {
        mask[i] = 1;
        vals[i] = nan_value<Complex>();
      } else {
        vals[i] = eval_monopole(spec, Event{0.0, x});
      }
    }
    write_snapshot(ctx.out / "monopole.bin", ComplexField(g, std::move(vals), 0.0, std::move(mask)), "u");
  }

  json details = rep.to_json();
  details["kind"] = to_string(spec.kind);
  details["samples"] = region.samples.size();
  ctx.check("monopole_residual", rep.fitted_order >= tol_order, details, json{{"monopole_order", tol_order}});
}

// ---------------------------------------------------------------------------
// comoving_helmholtz: slow-motion construction and the rigidity guard.

void comoving_helmholtz(Ctx& ctx) {
  auto& c = ctx.cfg;
  HelmholtzInputs in;
  in.Omega = ctx.positive("physics.Omega", 1.0);
  const double omega = ctx.positive("physics.omega", std::sqrt(1.5));
  const double beta_sigma = ctx.positive("physics.beta_sigma", 20.0);
  const Vec3 beta_center = c.get_vec("physics.beta_center", 3, Vec3{5.0, 3.0, 0.0});
  const double beta_mass = ctx.positive("physics.beta_mass", in.Omega);
  in.C = ctx.positive("physics.C", 1.0);
  const Vec3 z0 = c.get_vec("path.z0", 3);
  const Vec3 v = c.get_vec("path.velocity", 3, Vec3{0.02, 0.0, 0.0});
  const Vec3 acc = c.get_vec("path.acceleration", 3, Vec3{0.002, 0.0, 0.0});
  const Vec3 guard_acc = c.get_vec("path.guard_acceleration", 3, Vec3{0.2, 0.0, 0.0});
  if (norm(v) >= 1.0) {
    fail(ErrorKind::superluminal, c.source() + ": path.velocity: superluminal boost, |v| = " + format_double(norm(v)) + " >= 1");
  }
  in.t = c.get_double("analysis.t", 0.0);
  in.r_inner = ctx.positive("analysis.r_inner", 0.3);
  in.r_outer = ctx.positive("analysis.r_outer", 1.0);
  in.samples = ctx.count("analysis.samples", 400, 10);
  in.fd_step = ctx.positive("analysis.fd_step", 1e-3);
  in.rigidity_limit = ctx.positive("verify.rigidity_limit", 0.1);
  in.velocity_sq_limit = ctx.positive("verify.velocity_sq_limit", 0.1);
  std::optional<GridSpec> grid;
  if (c.has("grid.dims")) {
    grid = ctx.grid();
    if (grid->dims() != 3) c.fail_at("grid.dims", "the comoving construction is three-dimensional");
  }
  const double tol_rel = ctx.tol("helmholtz_relative", 0.05);
  ctx.begin();

  in.beta = [=](double t, const Vec3& x) {
    return std::abs(free_gaussian_exact(x, t, 3, beta_center, beta_sigma, Vec3{}, beta_mass));
  };
  in.phi = [=](double t, const Vec3&) { return -omega * t; };
  auto path = [](Vec3 z, Vec3 vel, Vec3 a) {
    return [=](double t) { return z + vel * t + a * (0.5 * t * t); };
  };
  in.z_path = path(z0, v, acc);
  const HelmholtzReport valid = comoving_helmholtz_construct(in);
  HelmholtzInputs guard_in = in;
  guard_in.z_path = path(z0, v, guard_acc);
  const HelmholtzReport guard = comoving_helmholtz_construct(guard_in);
  write_json(ctx.out / "helmholtz.json", json{{"slow_motion", valid.to_json()}, {"rigidity_guard", guard.to_json()}});
  if (grid && valid.frame.valid) {
    write_snapshot(ctx.out / "comoving_G.bin", sample_comoving_G(valid.frame, *grid, in.C, 0.5 * grid->min_spacing()), "G");
  }

  json d = valid.to_json();
  ctx.check("helmholtz_residual", valid.frame.valid && valid.residual.relative <= tol_rel, d,
            json{{"helmholtz_relative", tol_rel}, {"rigidity_limit", in.rigidity_limit}, {"velocity_sq_limit", in.velocity_sq_limit}});
  ctx.check("rigidity_guard", !guard.frame.valid && guard.frame.rigidity_ratio >= in.rigidity_limit, guard.to_json(),
            json{{"rigidity_limit", in.rigidity_limit}});
}

// ---------------------------------------------------------------------------
// perrin_spreading: singular u riding a spreading 2D packet.

void perrin_spreading(Ctx& ctx) {
  auto& c = ctx.cfg;
  const GridSpec grid = ctx.grid();
  const int d = grid.dims();
  if (d < 2) c.fail_at("grid.dims", "perrin_spreading needs two or three dimensions");
  if (grid.boundary == Boundary::periodic) c.fail_at("grid.boundary", "flow labels need a non-periodic grid");
  const std::string regime = c.get_string("physics.regime", "nonrelativistic");
  if (regime != "nonrelativistic") c.fail_at("physics.regime", "only the nonrelativistic regime is supported here");
  PacketScenario ps;
  ps.mass = ctx.positive("physics.mass", 1.0);
  ps.sc.mass = ps.mass;
  const double Omega = ctx.positive("physics.Omega", ps.mass);
  const Vec3 center = c.get_vec("initial.center", d);
  const double sigma = ctx.positive("initial.sigma", 1.0);
  const Vec3 k = c.get_vec("initial.k", d);
  ctx.schedule(grid.dt);
  const double h = grid.max_spacing();
  const int n_sing = ctx.count("singular.n", 1);
  const double C = ctx.positive("singular.C", 1.0);
  const Vec3 z0 = c.get_vec("singular.z0", d);
  const double eps = ctx.positive("singular.epsilon", 3.0 * h);
  const double mask_radius = ctx.positive("singular.mask_radius", 0.5 * grid.min_spacing());
  const double delta = ctx.positive("singular.delta", 4.0 * eps / 3.0);
  if (!(delta > eps && delta < 3.0 * eps)) c.fail_at("singular.delta", "must lie strictly between epsilon and 3 epsilon");
  const int offsets = ctx.count("singular.offsets", 8, 2);
  const int substeps = ctx.count("singular.label_substeps", 2);
  const double neg_scale = ctx.positive("singular.negative_scale", 0.9);
  const Vec3 carrier_v = c.get_vec("singular.negative_carrier_velocity", d, k * (1.0 / ps.mass));
  const double save_dt = grid.dt * static_cast<double>(ctx.save_stride);
  const double t_end = grid.dt * static_cast<double>(ctx.steps);
  const std::vector<double> analysis = c.get_list("analysis.times").empty()
                                           ? std::vector<double>{1.0, 2.0, 3.0, 4.0}
                                           : c.get_doubles("analysis.times", c.get_list("analysis.times").size());
  for (double t : analysis) {
    const double j = t / save_dt;
    if (t <= 0.0 || t > t_end || std::abs(j - std::round(j)) > 1e-9 * j) {
      c.fail_at("analysis.times", "every time must be a positive save time no later than the run end");
    }
  }
  const std::vector<double> tdts = c.get_list("transport.dts").empty()
                                       ? std::vector<double>{0.8, 0.4, 0.2, 0.1}
                                       : c.get_doubles("transport.dts", c.get_list("transport.dts").size());
  if (tdts.size() < 3) c.fail_at("transport.dts", "needs at least three steps to measure an order");
  for (double s : tdts) {
    // RK4 stages then land on saved slices, never between them.
    const double q = s / (2.0 * save_dt), m = t_end / s;
    if (s <= 0.0 || q < 0.5 || std::abs(q - std::round(q)) > 1e-9 * q || std::abs(m - std::round(m)) > 1e-9 * m) {
      c.fail_at("transport.dts", "each step must be a multiple of twice the save interval and divide the run length");
    }
  }
  const double tol_power = ctx.tol("weak_power", 0.8);
  const double tol_intercept = ctx.tol("weak_intercept", 0.02);
  const double tol_negative = ctx.tol("negative_intercept", 0.1);
  const double tol_transport = ctx.tol("transport_mismatch", 0.01);
  const double tol_order = ctx.tol("transport_order", 0.2);
  const double tol_F = ctx.tol("F_deviation", 0.01);
  const double tol_decay = ctx.tol("amplitude_decay", 0.5);
  const double tol_perrin = ctx.tol("perrin_tracking", 0.02);
  ctx.begin();

  // Guiding wave, flow series, amplitude and transport-rate series.
  ps.psi0 = gaussian_packet(grid, center, sigma, k);
  ps.pot = FourPotential::none();
  DecomposeOptions dopt;
  dopt.method = PhaseGradientMethod::link;
  FlowSeries flow;
  RealSeries amp, rate;
  std::vector<std::pair<double, ComplexField>> kept;
  run_schrodinger(ctx, ps.psi0, ps.pot, ps.sc, grid.dt, [&](const FieldStack& st, long, double t) {
    const PolarFields polar = decompose(st.current, ps.pot, dopt);
    flow.add(velocity_fields(polar, ps.pot, Regime::nonrelativistic, ps.mass));
    amp.add(polar.amplitude);
    rate.add(transport_rate(st.current, ps.mass));
    for (double ta : analysis) {
      if (std::abs(ta - t) < 1e-9) kept.emplace_back(t, st.current);
    }
  });
  const std::vector<LagrangianMap> maps = build_label_maps(flow, substeps);
  auto map_at = [&](double t) -> const LagrangianMap& {
    return maps[static_cast<std::size_t>(std::lround(t / save_dt))];
  };

  IntegrateOptions io;
  io.dt = grid.dt;
  io.regime = Regime::nonrelativistic;
  io.record_stride = static_cast<int>(ctx.save_stride);
  const Trajectory ztraj = integrate_trajectory(flow, z0, 0.0, t_end, io);
  IntegrateOptions io_neg = io;
  io_neg.velocity_scale = neg_scale;
  const Trajectory zneg = integrate_trajectory(flow, z0, 0.0, t_end, io_neg);
  write_trajectory(ctx.out / "trajectory.csv", ztraj);
  write_trajectory(ctx.out / "trajectory_negative.csv", zneg);
  const PathFn zpath = trajectory_path(ztraj);
  const PathFn zneg_path = trajectory_path(zneg);
  const FieldFn a_fn = amp.fn();
  const FieldFn f_fn = transported_amplitude(maps, amp, zpath, C, n_sing);

  // Weak guidance at the analysis times, with and without the flow lag.
  ShellOptions so;
  so.epsilon = eps;
  json weak = json::array(), weak_neg = json::array();
  bool weak_ok = true, neg_ok = true;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const double t = kept[i].first;
    const ComplexField& psi = kept[i].second;
    auto shell_report = [&](const PathFn& path, double scale) {
      SingularWaveSpec spec;
      spec.n = n_sing;
      spec.C = C;
      spec.Omega = Omega;
      spec.envelope = EnvelopeKind::transported;
      spec.carrier = CarrierKind::phase_harmony;
      spec.z_path = path;
      spec.mask_radius = mask_radius;
      const ComplexField u = construct_u(spec, grid, t, GuidingData{&psi, &map_at(t)});
      ctx.snapshot(scale == 1.0 ? "u" : "u_negative", std::lround(t / grid.dt), u, "u");
      const PolarFields pu = decompose(u, ps.pot, dopt);
      FlowSeries fu;
      fu.add(velocity_fields(pu, ps.pot, Regime::nonrelativistic, ps.mass));
      const Vec3 z = path(t);
      Vec3 vpsi;
      if (flow.velocity(t, z, vpsi) != Lookup::ok) vpsi = Vec3{kNaN, kNaN, kNaN};
      WeakGuidanceReport rep = weak_guidance_residual(fu.velocity_fn(), t, z, vpsi * scale, d, so);
      return std::make_pair(rep, vpsi);
    };
    const auto [pos, vpos] = shell_report(zpath, 1.0);
    const double allowed = tol_intercept * norm(vpos);
    const bool ok = pos.fitted_power >= tol_power && pos.intercept <= allowed;
    weak_ok = weak_ok && (ok || pos.exact);
    json jp = pos.to_json();
    jp["allowed_intercept"] = allowed;
    weak.push_back(jp);

    const auto [neg, vneg] = shell_report(zneg_path, neg_scale);
    const double injected = (1.0 - neg_scale) * norm(vneg);
    const bool nok = std::abs(neg.intercept - injected) <= tol_negative * injected;
    neg_ok = neg_ok && nok;
    json jn = neg.to_json();
    jn["injected_intercept"] = injected;
    weak_neg.push_back(jn);
  }
  ctx.check("weak_guidance", weak_ok && !kept.empty() && !ztraj.truncated(), json{{"shells", weak}},
            json{{"weak_power", tol_power}, {"weak_intercept", tol_intercept}});
  ctx.check("weak_guidance_negative", neg_ok && !kept.empty() && !zneg.truncated(), json{{"shells", weak_neg}},
            json{{"negative_intercept", tol_negative}, {"velocity_scale", neg_scale}});

  // Offset streamlines around z(0).
  std::vector<Trajectory> streams;
  const auto dirs = shell_directions(d, offsets);
  for (const auto& dir : dirs) streams.push_back(integrate_trajectory(flow, z0 + dir * delta, 0.0, t_end, io));

  // Transport integral under trajectory-step refinement.
  json tr_runs = json::array(), tr_series = json::array();
  std::vector<double> signed_mismatch, max_mismatch;
  bool tr_complete = true;
  for (double s : tdts) {
    IntegrateOptions ti = io;
    ti.dt = s;
    ti.record_stride = 1;
    const Trajectory st = integrate_trajectory(flow, z0 + dirs.front() * delta, 0.0, t_end, ti);
    const TransportReport rep = transport_integral_check(st, f_fn, rate.fn());
    tr_complete = tr_complete && rep.complete && !st.truncated();
    signed_mismatch.push_back(rep.final_signed_mismatch);
    max_mismatch.push_back(rep.max_rel_mismatch);
    tr_runs.push_back(json{{"dt", s}, {"max_rel_mismatch", rep.max_rel_mismatch}, {"final_signed_mismatch", rep.final_signed_mismatch}});
    tr_series.push_back(json{{"dt", s}, {"t", rep.t}, {"f_direct", rep.f_direct}, {"f_quadrature", rep.f_quadrature}});
  }
  write_json(ctx.out / "transport.json", tr_series);
  std::vector<double> diff_dt, diffs;
  for (std::size_t i = 0; i + 1 < tdts.size(); ++i) {
    diff_dt.push_back(tdts[i]);
    diffs.push_back(std::abs(signed_mismatch[i] - signed_mismatch[i + 1]));
  }
  const double order = loglog_slope(diff_dt, diffs);
  ctx.check("transport_integral",
            tr_complete && max_mismatch.back() <= tol_transport && std::abs(order - 2.0) <= tol_order,
            json{{"streamlines", tr_runs}, {"successive_differences", diffs}, {"fitted_exponent", order}},
            json{{"transport_mismatch", tol_transport}, {"transport_order", tol_order}});

  // F = f / a along the streamlines, and the decay of a along z.
  const FTransportReport fr = F_transport_check(a_fn, f_fn, streams, tol_F);
  double a_start = kNaN, a_end = kNaN;
  a_fn(ztraj.samples.front().t, ztraj.samples.front().z, a_start);
  a_fn(ztraj.back().t, ztraj.back().z, a_end);
  const double decay = a_end / a_start;
  json fj = fr.to_json();
  fj["amplitude_ratio_along_z"] = decay;
  ctx.check("F_transport", fr.conserved && fr.incomplete == 0 && decay <= tol_decay && !ztraj.truncated(), fj,
            json{{"F_deviation", tol_F}, {"amplitude_decay", tol_decay}});

  // Independent carrier: constant envelope translating rigidly.
  const FieldFn f_rigid = [=](double t, const Vec3& x, double& value) {
    const double R = norm(x - (z0 + carrier_v * t));
    value = C / std::pow(R, n_sing);
    return std::isfinite(value) ? Lookup::ok : Lookup::masked;
  };
  const FTransportReport fneg = F_transport_check(a_fn, f_rigid, streams, tol_F);
  ctx.check("F_transport_negative", !fneg.conserved && fneg.incomplete == 0, fneg.to_json(), json{{"F_deviation", tol_F}});

  // Perrin ratios against the closed-form width.
  const PerrinReport pr = perrin_diagnostic(a_fn, f_fn, ztraj, streams, delta);
  std::vector<double> closed;
  double worst_f = 0.0, worst_a = 0.0;
  for (std::size_t i = 0; i < pr.t.size(); ++i) {
    closed.push_back(std::pow(sigma / free_gaussian_width(sigma, pr.t[i], ps.mass), 0.5 * d));
    worst_f = std::max(worst_f, std::abs(pr.f_ratio[i] / closed.back() - 1.0));
    worst_a = std::max(worst_a, std::abs(pr.a_ratio[i] / closed.back() - 1.0));
  }
  json pj = pr.to_json();
  pj["closed_form"] = closed;
  write_json(ctx.out / "perrin.json", pj);
  ctx.check("perrin",
            !pr.t.empty() && std::abs(pr.t.back() - t_end) < 1e-9 && worst_f <= tol_perrin && worst_a <= tol_perrin,
            json{{"amplitude_ratio_series", pj}, {"max_f_ratio_error", worst_f}, {"max_a_ratio_error", worst_a}},
            json{{"perrin_tracking", tol_perrin}});
}

}  // namespace

ScenarioResult run_scenario(Config cfg, const RunOptions& opts) {
  Ctx ctx(cfg, opts, cfg.get_string("scenario.name"));
  static const std::map<std::string, void (*)(Ctx&)> table{
      {"plane_wave", plane_wave},
      {"free_gaussian", free_gaussian},
      {"double_gaussian_interference", double_gaussian_interference},
      {"harmonic_oscillator", harmonic_oscillator},
      {"moving_monopole", moving_monopole},
      {"comoving_helmholtz", comoving_helmholtz},
      {"perrin_spreading", perrin_spreading},
  };
  auto it = table.find(ctx.name);
  if (it == table.end()) cfg.fail_at("scenario.name", "unknown scenario '" + ctx.name + "'");
  it->second(ctx);
  ScenarioResult result{ctx.name, ctx.out, std::move(ctx.checks)};
  if (opts.verify) write_json(ctx.out / "report.json", result.report_json());
  return result;
}

}  // namespace wavemech
