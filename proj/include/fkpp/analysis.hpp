#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fkpp/evolution.hpp"
#include "fkpp/fracop.hpp"
#include "fkpp/geometry.hpp"
#include "fkpp/spectral.hpp"

namespace fkpp {

/// Least-squares line fit with its verdict against a target slope.
struct FitReport {
  double slope = 0.0;
  double intercept = 0.0;
  double window_lo = 0.0;  // smallest abscissa used
  double window_hi = 0.0;  // largest abscissa used
  std::size_t points = 0;
  double rms = 0.0;  // residual RMS, always reported
  double target = 0.0;
  double relative_deviation = 0.0;
  bool pass = false;
  std::vector<double> xs;
  std::vector<double> ys;
};

/// Ordinary least squares y = slope x + intercept; needs two distinct xs.
FitReport fit_line(std::vector<double> xs, std::vector<double> ys);

/// Per-component maximum of `field` over `mask`, keyed by component index.
std::vector<std::pair<long, double>> component_maxima(std::span<const double> field,
                                                      const GridDomain& dom,
                                                      const NodeMask& mask);

struct KernelRatioReport {
  TailEnvelope envelope;
  double limit = 50.0;
  bool pass = false;  // envelope.ratio() <= limit
};

/// r(x) = p(x,1) (1 + |x|^{1+2a}) / delta(x)^a over nodes with delta >= h and
/// r_lo <= |x| <= r_hi (the admissible band: away from the initial bump and
/// the window edge).
KernelRatioReport kernel_ratio_check(std::span<const double> p, const GridDomain& dom,
                                     double alpha, double r_lo, double r_hi,
                                     double limit = 50.0);

/// Largest relative change of c_m and c_M between two window sizes.
double kernel_ratio_drift(const KernelRatioReport& a, const KernelRatioReport& b);

/// Slope of log(max of field over Omega0 + a_k) against log |a_k| for the
/// components with |a_k| in [r_lo, r_hi]; target -(1 + 2 alpha). Passes at
/// `tolerance` relative deviation. Needs at least 8 components.
FitReport fit_tail_exponent(std::span<const double> field, const GridDomain& dom, double alpha,
                            double r_lo, double r_hi, double tolerance = 0.1);

struct FrontTrace {
  double level = 0.0;
  double nu = 0.0;
  std::vector<double> times;
  std::vector<std::vector<long>> invaded;  // sorted component indices
  std::vector<double> R;                   // max |a_k| over invaded k (0 if none)
};

/// Streams states into a FrontTrace: component k counts as invaded at time t
/// when max over (Omega0 + a_k)_nu of n(., t) >= level.
class FrontTracker {
 public:
  FrontTracker(const GridDomain& dom, double level, double nu);
  void observe(double t, std::span<const double> n);
  const FrontTrace& trace() const { return trace_; }

 private:
  const GridDomain* dom_;
  std::vector<long> keys_;
  std::vector<std::vector<std::size_t>> nodes_;
  FrontTrace trace_;
};

FrontTrace track_front(const Trajectory& traj, const GridDomain& dom, double level, double nu);

/// First time after `t_from` at which the invaded set stops being nested in
/// the previous one, or nullopt when nested throughout.
std::optional<double> nesting_violation(const FrontTrace& trace, double t_from);

struct SpeedFitOptions {
  double t_min = 2.0;  // transient cutoff
  double r_min = 0.0;  // smallest R(t) kept
  double r_max = 0.0;  // largest R(t) kept (0: no cap)
  double tolerance = 0.15;
};

/// Slope of log R(t) against t over the post-transient part of the trace;
/// target |lambda0| / (1 + 2 alpha).
FitReport fit_speed(const FrontTrace& trace, double lambda0, double alpha,
                    const SpeedFitOptions& options = {});

struct PlateauReport {
  std::optional<double> t_mu;
  std::optional<std::size_t> snapshot;  // index of t_mu
  std::vector<double> deviations;       // per snapshot
};

/// Earliest snapshot time after which max over Omega_nu cap {|x| < e^{ct}}
/// of |n - n_plus| stays <= mu for every later snapshot.
PlateauReport plateau_check(const Trajectory& traj, std::span<const double> n_plus,
                            const GridDomain& dom, double nu, double c, double mu);

/// Fit of log(max over {|x| > e^{Ct}} of n) against t for snapshots with
/// t >= t_min and e^{Ct} <= r_max; kappa = -slope must be positive.
FitReport decay_beyond_front(const Trajectory& traj, const GridDomain& dom, double rate_C,
                             double t_min, double r_max);

struct EnvelopeReport {
  double C_m = 0.0;
  double C_M = 0.0;
  std::vector<double> times;
  std::vector<double> lower_violation;  // max of (lower - n - eps)_+ on Omega_nu
  std::vector<double> upper_violation;  // max of (n - upper)_+ on Omega
  double max_lower = 0.0;
  double max_upper = 0.0;
  bool clean() const { return max_lower == 0.0 && max_upper == 0.0; }
};

struct EnvelopeInputs {
  double alpha = 0.5;
  double nu = 0.5;
  double epsilon = 0.05;
  double lambda_nu = 0.0;       // eigenvalue on Omega_nu
  double lambda_minus_nu = 0.0; // eigenvalue on Omega_{-nu}
  double c_m = 0.0;
  double c_M = 0.0;
  double cm_scale = 1.0;  // multiplies C_m (detector sanity)
};

/// Lower/upper envelopes built from the eigenfunctions phi_nu, phi_{-nu}
/// (window-aligned, sup-normalised), checked at every snapshot t >= 1.
EnvelopeReport envelope_check(const Trajectory& traj, const GridDomain& dom,
                              std::span<const double> phi_nu, std::span<const double> phi_mnu,
                              const EnvelopeInputs& in);

struct BarrierReport {
  double C = 0.0;               // smallest admissible power of two
  double max_on_annulus = 0.0;  // max of L^a psi on B(nu) \ B(nu/2)
  double c_lower = 0.0;         // min of psi / (nu - |x|)^a on B(nu)
  double max_inner = 0.0;       // max of psi on B(nu/2)
  bool zero_outside = false;
  bool pass = false;
  std::vector<double> x;
  std::vector<double> psi;
};

/// Barrier psi = (C^{-1} (nu^2 - |x|^2)^a + 1/2 1_{B(nu/4)}) 1_{B(nu)} for the
/// nu-truncated operator on a grid of spacing h.
BarrierReport barrier_check(double nu, double alpha, double h);

struct KernelLowerBoundReport {
  double mu = 0.0;                // principal eigenvalue of L^a on B(0, nu)
  double c_nu = 0.0;              // (1 - e^{-mu}) / mu
  double min_margin = 0.0;        // min of w(x,1) - c_nu phi(x)
  double margin_location = 0.0;   // x of the minimum
  bool monotone_in_time = false;  // w(., t) nondecreasing
  bool below_t = false;           // w(., t) <= t
  double tolerance = 1e-6;
  bool pass = false;
};

/// Solves w_t + L^a w = 1 on B(0, nu), w = 0 at t = 0, to t = 1 by implicit
/// Euler with one Richardson extrapolation (dt and dt/2) and checks
/// w(x,1) >= c_nu phi(x) - tolerance.
KernelLowerBoundReport kernel_lower_bound_pieces(double nu, double alpha, double h, double dt,
                                                 double tolerance = 1e-6);

struct ScalingReport {
  std::vector<double> a;
  std::vector<double> constants;  // sup |A g(a.)| / (a^{2 alpha} g(a.))
  double worst_ratio = 0.0;       // max over a of constant(a) / constant(1)
  bool pass = false;              // worst_ratio <= 1 + slack
};

/// Scaling bound for g(x) = 1 / (1 + |x|^{1+2 alpha}) on a line grid of
/// half-width L, sup taken over |x| <= L / 4.
ScalingReport scaling_check(double alpha, double h, double half_width,
                            const std::vector<double>& a_list, double slack = 0.25);

/// Periodic extension of a field given on `source` (a torus or window whose
/// edges are multiples of the period) onto `target`'s grid.
Field periodic_extend(std::span<const double> field, const GridDomain& source,
                      const GridDomain& target);

}  // namespace fkpp
