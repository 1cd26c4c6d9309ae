#pragma once

#include "wavemech/madelung.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>

namespace wavemech {

/// Outcome of one velocity or phase lookup.
enum class Lookup { ok, outside, masked };

using VelocityFn = std::function<Lookup(double t, const Vec3& x, Vec3& v)>;
/// Returns d_t S and grad S at (t, x).
using PhaseRateFn = std::function<Lookup(double t, const Vec3& x, double& dSdt, Vec3& gradS)>;

/// Flow and phase-rate fields saved at increasing times on one grid. Values
/// between slices are linear in time and multilinear in space.
struct FlowSlice {
  double t = 0.0;
  std::vector<RealField> velocity;
  std::optional<RealField> phase_dt;
  std::vector<RealField> phase_gradient;
};

class FlowSeries {
 public:
  /// Slices must share the grid and arrive in increasing time.
  void add(FlowSlice slice);
  /// Velocity (and phase rates, when present) of a decomposed field.
  void add(const FlowFields& flow, const PolarFields* polar = nullptr);

  bool empty() const { return slices_.empty(); }
  std::size_t size() const { return slices_.size(); }
  const FlowSlice& operator[](std::size_t i) const { return slices_[i]; }
  double t_begin() const { return slices_.front().t; }
  double t_end() const { return slices_.back().t; }
  const GridSpec& grid() const { return slices_.front().velocity.front().grid(); }

  Lookup velocity(double t, const Vec3& x, Vec3& v) const;
  Lookup phase_rates(double t, const Vec3& x, double& dSdt, Vec3& gradS) const;

  VelocityFn velocity_fn() const;
  PhaseRateFn phase_rate_fn() const;

 private:
  std::vector<FlowSlice> slices_;
  /// Bracketing slices and the weight of the later one.
  bool bracket(double t, std::size_t& i0, std::size_t& i1, double& w) const;
};

enum class TrajectoryStatus { completed, left_domain, masked_region, superluminal };
std::string to_string(TrajectoryStatus s);

struct TrajectorySample {
  double t = 0.0;
  Vec3 z;
  Vec3 v;
  double tau = 0.0;
  double phase = kNaN;
};

struct Trajectory {
  int dims = 1;
  std::vector<TrajectorySample> samples;
  TrajectoryStatus status = TrajectoryStatus::completed;

  bool truncated() const { return status != TrajectoryStatus::completed; }
  const TrajectorySample& back() const { return samples.back(); }
};

struct IntegrateOptions {
  double dt = 0.0;
  Regime regime = Regime::nonrelativistic;
  /// Multiplies every velocity lookup; 0.9 builds an off-streamline path.
  double velocity_scale = 1.0;
  /// Record every n-th step (the final state is always recorded).
  int record_stride = 1;
};

/// Classical RK4 on dz/dt = scale * v(t, z). Stops early, with a status,
/// when a lookup leaves the domain, meets a masked or undefined point, or
/// returns |v| >= 1 in the relativistic regime. Proper time is accumulated
/// with the trapezoid rule on sqrt(1 - v^2) (tau = t - t0 otherwise).
Trajectory integrate_trajectory(const VelocityFn& velocity, const Vec3& z0, double t0, double t1,
                                const IntegrateOptions& opts, int dims);
Trajectory integrate_trajectory(const FlowSeries& flow, const Vec3& z0, double t0, double t1,
                                const IntegrateOptions& opts);

/// Fills sample.phase by trapezoid integration of d_t S dt + grad S . dz from
/// `phase0`. Returns false (phases NaN from there on) at the first failed
/// lookup.
bool accumulate_phase(Trajectory& traj, const PhaseRateFn& rates, double phase0 = 0.0);

struct ClockReport {
  /// max over segments of |dphi/dtau + omega0 - correction|.
  double max_deviation = kNaN;
  double mean_rate = kNaN;  // mean dphi/dtau
  std::size_t segments = 0;
  bool complete = false;    // false when the phase could not be tracked to the end
};

/// Segment rates dphi/dtau against -omega0. `correction(t, z, v)` is added
/// to -omega0 when given, e.g. the quantum Hamilton-Jacobi prediction.
ClockReport internal_clock_check(Trajectory traj, const PhaseRateFn& rates, double omega0,
                                 const std::function<double(double, const Vec3&, const Vec3&)>& correction = {});

/// Uniform double in [0, 1) from the top 53 bits of one draw.
double uniform01(std::mt19937_64& rng);

struct Ensemble {
  std::vector<Vec3> positions;
  std::uint64_t seed = 0;
  double t0 = 0.0;
};

/// Inverse-CDF draw over the cells of |psi|^2 (each node owns the cell
/// [x - h/2, x + h/2] per axis, clipped to the grid), uniform inside a cell.
Ensemble sample_ensemble(const ComplexField& field, std::size_t n, std::uint64_t seed);

struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> mass;  // probability per bin
  double outside = 0.0;      // probability outside [lo, hi)
};

/// Histogram of positions along axis 0; at most 64 bins.
Histogram histogram_of(const std::vector<Vec3>& positions, double lo, double hi, int bins);
/// Exact bin overlap of the cell-constant |psi|^2 marginal along axis 0.
Histogram histogram_of(const ComplexField& field, double lo, double hi, int bins);

/// Total-variation distance, the outside mass counted as one more bin.
double tv_distance(const Histogram& a, const Histogram& b);

/// Expected TV of an n-sample multinomial draw from `p` under the normal
/// approximation: (1/2) sum sqrt(2 p (1 - p) / (pi n)).
double tv_noise_floor(const Histogram& p, std::size_t n);

struct EquivarianceReport {
  double tv = kNaN;
  double noise_floor = kNaN;
  std::size_t truncated = 0;
};

EquivarianceReport equivariance_test(const std::vector<Trajectory>& trajectories, const ComplexField& field_at_t,
                                     double lo, double hi, int bins);

/// Number of adjacent pairs (ordered by start position along axis 0) whose
/// order is not strict at some common sample index.
std::size_t crossing_violations(const std::vector<Trajectory>& trajectories);

/// Integrates every member in parallel; results are in ensemble order and
/// independent of the thread count.
std::vector<Trajectory> integrate_ensemble(const FlowSeries& flow, const Ensemble& ens, double t1,
                                           const IntegrateOptions& opts);

/// Columns t, z..., v..., tau, phase.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

}  // namespace wavemech
