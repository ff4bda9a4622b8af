#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fkpp/fracop.hpp"
#include "fkpp/geometry.hpp"
#include "fkpp/linalg.hpp"
#include "fkpp/spectral.hpp"

namespace fkpp {

/// Two-sided monotone iteration state: lower <= upper nodewise.
struct BracketState {
  Field lower;
  Field upper;
  double gap = 0.0;  // ||upper - lower||_inf
  int iterations = 0;
  std::vector<double> gap_history;
};

struct StationaryOptions {
  /// Monotone splitting constant; must be >= 2 (margin over Lip(n - n^2) = 1).
  double K = 2.0;
  /// Stop once the bracket gap is below this.
  double tolerance = 1e-7;
  int max_iterations = 5000;
  /// Slack allowed when asserting monotonicity of the iterates (inner solve
  /// accuracy).
  double monotonicity_slack = 1e-10;
  CgOptions cg{1e-13, 5000};
};

enum class StationaryStatus {
  /// Positive stationary state found and bracketed.
  positive,
  /// No positive sub-solution exists ((H1) numerically false); only n = 0.
  trivial_only,
};

struct StationaryResult {
  StationaryStatus status = StationaryStatus::trivial_only;
  /// Midpoint of the final bracket.
  Field state;
  BracketState bracket;
  /// Scale of the sub-solution start epsilon * phi0 (0 when trivial).
  double epsilon = 0.0;
  /// ||A n - n + n^2||_inf on the mask.
  double residual = 0.0;
};

/// Largest epsilon in {2^-j, j = 0..60} with A(eps phi) <= eps phi - (eps phi)^2
/// on the mask; nullopt if none.
std::optional<double> subsolution_scale(const DiscreteFracOp& op, const NodeMask& mask,
                                        std::span<const double> phi);

/// Monotone iteration (A + K) z_{m+1} = K z_m + z_m - z_m^2 from u0 = eps * phi0
/// and v0 = 1 on the mask. `ground` is the principal pair of A - Id on the
/// same mask.
StationaryResult solve_stationary(const DiscreteFracOp& op, const NodeMask& mask,
                                  const EigenPair& ground, const StationaryOptions& options = {});

/// Same iteration from an explicit lower start, which must be a discrete
/// sub-solution below 1.
StationaryResult solve_stationary_from(const DiscreteFracOp& op, const NodeMask& mask,
                                       std::span<const double> lower_start,
                                       const StationaryOptions& options = {});

/// ||A n - (n - n^2)||_inf over the mask.
double stationary_residual(const DiscreteFracOp& op, const NodeMask& mask,
                           std::span<const double> n);

struct ShapeRatio {
  double c = 0.0;  // min of u / delta^alpha
  double C = 0.0;  // max of u / delta^alpha
  std::size_t nodes = 0;
  double spread() const { return C / c; }
};

/// Extremes of u / delta^alpha over masked nodes with delta <= max_delta
/// (defaults to half the ball radius r1).
ShapeRatio shape_ratio(std::span<const double> u, const GridDomain& dom, double alpha,
                       std::optional<double> max_delta = std::nullopt);

/// max |n(x + P) - n(x)| over masked node pairs whose periods both lie at
/// least `margin_periods` periods away from the window edge.
double periodicity_deviation(std::span<const double> n, const GridDomain& dom,
                             int margin_periods);

struct UniquenessReport {
  std::vector<double> epsilons;
  /// Deviation of each extra start's fixed point from the reference state.
  std::vector<double> deviations;
  double max_deviation = 0.0;
  bool unique = false;
  /// Every fixed point lies inside the reference bracket (with slack).
  bool sandwiched = false;
  /// Fixed point reached from the single-component start.
  Field single_start_state;
};

/// Reruns the iteration from eps * phi0 with two scales and from eps * phi1,
/// phi1 the ground state of the single component 0 (a non-periodic
/// sub-solution), and compares the fixed points with `reference` within
/// `agreement` in sup norm.
UniquenessReport uniqueness_certificate(const DiscreteFracOp& op, const NodeMask& mask,
                                        const StationaryResult& reference,
                                        const EigenPair& ground, double agreement,
                                        const StationaryOptions& options = {},
                                        const EigenOptions& eigen_options = {});

std::string to_string(StationaryStatus status);

}  // namespace fkpp
