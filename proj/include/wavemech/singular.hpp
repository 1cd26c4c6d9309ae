#pragma once

#include "wavemech/analytic.hpp"
#include "wavemech/guidance.hpp"

#include <json.hpp>

namespace wavemech {

using ScalarFn = std::function<double(double t, const Vec3& x)>;
using PathFn = std::function<Vec3(double t)>;
/// Scalar lookup at (t, x); NaN or a failed lookup is reported, not hidden.
using FieldFn = std::function<Lookup(double t, const Vec3& x, double& value)>;

/// Real field samples at increasing times; values between slices are linear
/// in time and multilinear in space.
class RealSeries {
 public:
  void add(RealField f);
  std::size_t size() const { return fields_.size(); }
  const RealField& operator[](std::size_t i) const { return fields_[i]; }
  Lookup sample(double t, const Vec3& x, double& value) const;
  FieldFn fn() const;

 private:
  std::vector<RealField> fields_;
  std::vector<double> times_;
};

/// Flow labels: Xi(x, t) is where the streamline through x at time t sat at
/// the first slice time. Built slice by slice, Xi_j = Xi_{j-1} o back-trace,
/// so F = G(Xi) is constant along streamlines for any G.
class LagrangianMap {
 public:
  static LagrangianMap identity(const GridSpec& grid, double t0);
  /// Back-traces every node from t1 to the current map time through `flow`
  /// with `substeps` RK4 steps. Nodes whose pre-image leaves the domain or
  /// meets undefined flow get NaN labels.
  LagrangianMap advance(const FlowSeries& flow, double t1, int substeps = 1) const;

  Lookup label(const Vec3& x, Vec3& xi) const;
  double time() const { return t_; }
  const std::vector<RealField>& components() const { return components_; }

 private:
  std::vector<RealField> components_;
  double t_ = 0.0;
};

/// One map per slice of `flow`, starting from the identity at its first time.
std::vector<LagrangianMap> build_label_maps(const FlowSeries& flow, int substeps = 1);

/// Cubic Hermite interpolation of a trajectory through its positions and
/// velocities; clamps to the end points outside the sampled range.
PathFn trajectory_path(const Trajectory& traj);

/// f(t, x) = C a(t, x) / |Xi(x, t) - Xi(z(t), t)|^n evaluated off the grid,
/// with labels and amplitude linear in time between slices. The maps must
/// match the slice times of `a`.
FieldFn transported_amplitude(const std::vector<LagrangianMap>& maps, const RealSeries& a, PathFn z, double C, int n);

/// alpha(x): constant C; C a(x) (literal phase-harmony envelope); or C a(x)
/// R^n / |Xi(x) - Xi(z)|^n, which makes f / a a function of the flow label.
enum class EnvelopeKind { constant, amplitude_locked, transported };
/// phi(x): S of the guiding wave; an independent phase; or
/// S + w(R) dphi with w(R) = 1 - exp(-(R/contact_radius)^2).
enum class CarrierKind { phase_harmony, analytic, first_order_contact };

std::string to_string(EnvelopeKind k);
std::string to_string(CarrierKind k);
EnvelopeKind envelope_from_string(const std::string& s);
CarrierKind carrier_from_string(const std::string& s);

struct SingularWaveSpec {
  int n = 1;
  EnvelopeKind envelope = EnvelopeKind::transported;
  CarrierKind carrier = CarrierKind::phase_harmony;
  double C = 1.0;
  double Omega = 1.0;
  /// Independent phase (analytic carrier) or the blended correction.
  ScalarFn phase;
  double contact_radius = 1.0;
  PathFn z_path;
  /// Nodes with R below this are masked; 0 selects half the smallest spacing.
  double mask_radius = 0.0;

  void validate() const;
};

/// Guiding-wave data a construction may need at the construction time.
struct GuidingData {
  const ComplexField* psi = nullptr;
  const LagrangianMap* labels = nullptr;
};

/// u = f e^{i phi} with f = alpha / R^n on the nodes of `grid` at time t;
/// nodes closer than mask_radius to z(t) are masked. Throws out_of_bounds
/// when z(t) is not strictly inside the grid.
ComplexField construct_u(const SingularWaveSpec& spec, const GridSpec& grid, double t, const GuidingData& data = {});

// ---------------------------------------------------------------------------
// Weak guidance

struct ShellOptions {
  double epsilon = 0.0;     // innermost shell radius
  double outer_factor = 10.0;
  int shells = 8;
  int directions = 0;       // 0: 64 in 2D, 128 in 3D
  double exact_threshold = 1e-12;
};

struct ShellSample {
  double R = 0.0;
  double monopole = kNaN;   // <g> over directions
  Vec3 dipole;              // d <g R^>, d the dimension
  bool skipped = false;     // some direction had no defined velocity
};

/// Shell moments of g = (v_u - dz/dt) . R^ around z. Each moment is fitted
/// with a quadratic in R; the intercept is the norm of the fitted R -> 0
/// values and the power is the log-log slope of the moment distance from
/// it. An intercept offset along R^ shows up in the dipole, which is what a
/// plain shell average would cancel.
struct WeakGuidanceReport {
  double t = 0.0;
  Vec3 z;
  Vec3 zdot;
  std::vector<ShellSample> shells;
  double monopole_intercept = kNaN;
  Vec3 dipole_intercept;
  double intercept = kNaN;
  double fitted_power = kNaN;
  bool exact = false;  // residual below exact_threshold on every shell
  std::size_t skipped = 0;

  nlohmann::json to_json() const;
};

WeakGuidanceReport weak_guidance_residual(const VelocityFn& v_u, double t, const Vec3& z, const Vec3& zdot, int dims,
                                          const ShellOptions& opts);

// ---------------------------------------------------------------------------
// Transport along streamlines

/// I_u = -div v_u in the nonrelativistic regime, -lap(phi)/omega0, with the
/// phase gradient taken from neighbour products so the amplitude
/// singularity does not leak in.
RealField transport_rate(const ComplexField& u, double omega0, const StencilConfig& cfg = {});

/// Relativistic I_u = -d_mu(d^mu phi + eA^mu) / (d_t phi + eV) from a phase
/// callable by central differences of step h.
double transport_rate_analytic(const ScalarFn& phi, const PotentialFunctions& pot, double t, const Vec3& x, int dims,
                               double h);

struct TransportReport {
  std::vector<double> t;
  std::vector<double> f_direct;
  std::vector<double> f_quadrature;  // f(t0) exp(1/2 int I_u dt), trapezoid on the samples
  double max_rel_mismatch = kNaN;
  double final_signed_mismatch = kNaN;
  bool complete = false;
};

TransportReport transport_integral_check(const Trajectory& streamline, const FieldFn& f, const FieldFn& I_u);

struct FTransportReport {
  std::vector<std::vector<double>> F;  // per streamline, per sample
  double max_rel_deviation = kNaN;
  double min_amplitude_ratio = kNaN;   // smallest a(t_end)/a(t0) over streamlines
  std::size_t incomplete = 0;
  bool conserved = false;              // max_rel_deviation < tolerance
  double tolerance = 0.0;

  nlohmann::json to_json() const;
};

FTransportReport F_transport_check(const FieldFn& a, const FieldFn& f, const std::vector<Trajectory>& streamlines,
                                   double tolerance);

/// f ratios along streamlines started at z(t0) + delta R^, beside the
/// guiding amplitude ratio a(z(t)) / a(z(t0)).
struct PerrinReport {
  std::vector<double> t;
  std::vector<double> f_ratio;  // mean over the offset streamlines
  std::vector<double> a_ratio;
  double delta = 0.0;

  nlohmann::json to_json() const;
};

PerrinReport perrin_diagnostic(const FieldFn& a, const FieldFn& f, const Trajectory& z_traj,
                               const std::vector<Trajectory>& offset_streamlines, double delta);

// ---------------------------------------------------------------------------
// Comoving Helmholtz construction

struct ComovingFrameData {
  double t = 0.0;
  Vec3 z, zdot, zddot;
  Vec3 A;                        // [zdot d_t + grad] log beta at z(t)
  double B = 0.0;                // y at z(t)
  double rigidity_length = 0.0;  // l, the outer annulus radius
  double rigidity_ratio = 0.0;   // |zddot| l
  double velocity_sq = 0.0;      // |zdot|^2
  bool valid = false;
  std::string status;
};

struct HelmholtzInputs {
  ScalarFn beta;
  ScalarFn phi;
  PotentialFunctions pot;
  double Omega = 1.0;
  PathFn z_path;
  double t = 0.0;
  double C = 1.0;
  double r_inner = 0.3;
  double r_outer = 1.0;
  int samples = 400;
  double fd_step = 1e-3;
  double rigidity_limit = 0.1;
  double velocity_sq_limit = 0.1;
};

/// RMS magnitudes over the annulus of the three terms of
/// box G + 2 dlog(beta).dG - y G, of the residual, and of its parts from
/// the neglected velocity-squared, acceleration, and far-field variation.
struct HelmholtzResidual {
  double box_term = 0.0;
  double drift_term = 0.0;
  double potential_term = 0.0;
  double dominant = 0.0;
  double residual = 0.0;
  double relative = kNaN;       // residual / dominant
  double relativistic_part = 0.0;
  double acceleration_part = 0.0;
  double far_field_part = 0.0;
};

struct HelmholtzReport {
  ComovingFrameData frame;
  HelmholtzResidual residual;

  nlohmann::json to_json() const;
};

/// Evaluates A and B at z(t), builds G' = H' e^{-A.x'} with H' the radial
/// Helmholtz monopole, and measures the residual of the full equation for G
/// on the annulus r_inner < r' < r_outer (3D). When the rigidity or
/// slow-motion guards fail, the frame is marked invalid and no residual is
/// computed.
HelmholtzReport comoving_helmholtz_construct(const HelmholtzInputs& in);

/// G'(x - z(t)) on the grid nodes, masked within `mask_radius` of z(t).
ComplexField sample_comoving_G(const ComovingFrameData& frame, const GridSpec& grid, double C, double mask_radius);

}  // namespace wavemech
