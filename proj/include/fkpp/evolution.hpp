#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fkpp/geometry.hpp"
#include "fkpp/linalg.hpp"

namespace fkpp {

enum class ReactionKind {
  kpp,     // n (1 - n)
  linear,  // -M n
  none,    // pure fractional heat flow
  source,  // constant unit source
};

struct Reaction {
  ReactionKind kind = ReactionKind::kpp;
  double M = 0.0;

  static Reaction kpp() { return {ReactionKind::kpp, 0.0}; }
  static Reaction linear(double m) { return {ReactionKind::linear, m}; }
  static Reaction none() { return {ReactionKind::none, 0.0}; }
  static Reaction source() { return {ReactionKind::source, 0.0}; }

  double operator()(double n) const {
    switch (kind) {
      case ReactionKind::kpp: return n * (1.0 - n);
      case ReactionKind::linear: return -M * n;
      case ReactionKind::none: return 0.0;
      case ReactionKind::source: return 1.0;
    }
    return 0.0;
  }
  std::string tag() const;
};

/// Smooth compactly supported bump amplitude * exp(1 - 1/(1 - r^2)),
/// r = |x - center| / half_width.
struct Bump {
  double center = 0.0;
  double half_width = 1.0;
  double amplitude = 1.0;
};

/// Sum of bumps sampled on the grid and forced to vanish off `mask`. Each
/// bump's support must lie strictly inside one component of the geometry.
Field make_initial_data(const GridDomain& dom, const std::vector<Bump>& bumps,
                        const NodeMask& mask);

struct EvolveOptions {
  double dt = 0.05;
  double T = 1.0;
  /// Requested snapshot times; each is realised at the nearest step.
  std::vector<double> snapshot_times;
  CgOptions cg{1e-13, 5000};
  /// Values below -tolerance abort the run; smaller undershoots from the
  /// inner solve are clipped to zero.
  double negativity_tolerance = 1e-12;
  /// Called after every step (and once for t = 0) with the current state.
  std::function<void(int step, double t, std::span<const double> n)> observer;
};

struct Trajectory {
  std::vector<double> times;  // realised snapshot times
  std::vector<int> steps;
  std::vector<Field> snapshots;
  Reaction reaction;
  double dt = 0.0;
  std::string scheme = "imex-euler";
  long cg_iterations = 0;
};

/// IMEX Euler: (I + dt A) n^{k+1} = n^k + dt f(n^k) on the mask of `op`.
Trajectory evolve(const MaskedOperator& op, std::span<const double> n0, const Reaction& reaction,
                  const EvolveOptions& options);

/// max over snapshots and nodes of (lower - upper)_+.
double ordering_violation(const Trajectory& lower, const Trajectory& upper);

struct TailEnvelope {
  double c_m = 0.0;  // min of n (1 + |x|^{d+2a}) / delta^a
  double c_M = 0.0;  // max of the same
  std::size_t nodes = 0;
  double ratio() const { return c_M / c_m; }
};

/// Extremes of n(x) (1 + |x|^{1+2a}) / delta(x)^a over masked nodes with
/// delta >= h and min_radius <= |x| <= max_radius.
TailEnvelope prepared_tails(std::span<const double> n, const GridDomain& dom, double alpha,
                            double max_radius, double min_radius = 0.0);

}  // namespace fkpp
