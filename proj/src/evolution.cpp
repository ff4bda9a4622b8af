#include "fkpp/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fkpp/error.hpp"

namespace fkpp {

std::string Reaction::tag() const {
  switch (kind) {
    case ReactionKind::kpp: return "kpp";
    case ReactionKind::linear: return "linear(-" + std::to_string(M) + ")";
    case ReactionKind::none: return "none";
    case ReactionKind::source: return "source";
  }
  return "unknown";
}

Field make_initial_data(const GridDomain& dom, const std::vector<Bump>& bumps,
                        const NodeMask& mask) {
  if (bumps.empty()) throw InvalidArgument("initial data needs at least one bump");
  Field n(dom.size(), 0.0);
  for (const Bump& b : bumps) {
    if (!(b.half_width > 0.0) || !(b.amplitude > 0.0))
      throw InvalidArgument("bump width and amplitude must be positive");
    if (!(dom.geometry.boundary_distance(b.center) > b.half_width))
      throw InvalidArgument("bump support is not strictly inside a component");
    if (b.center - b.half_width < -dom.half_width || b.center + b.half_width > dom.half_width)
      throw InvalidArgument("bump support leaves the window");
    for (std::size_t i = 0; i < dom.size(); ++i) {
      const double r = (dom.x[i] - b.center) / b.half_width;
      if (std::abs(r) < 1.0 && mask[i]) n[i] += b.amplitude * std::exp(1.0 - 1.0 / (1.0 - r * r));
    }
  }
  return n;
}

Trajectory evolve(const MaskedOperator& op, std::span<const double> n0, const Reaction& reaction,
                  const EvolveOptions& options) {
  const std::size_t n = op.size();
  if (n0.size() != n) throw InvalidArgument("initial data size does not match operator");
  if (!(options.dt > 0.0)) throw InvalidArgument("time step must be positive");
  if (!(options.T >= 0.0)) throw InvalidArgument("final time must be non-negative");
  const int nsteps = static_cast<int>(std::llround(options.T / options.dt));
  std::vector<int> snap_steps;
  for (double t : options.snapshot_times) {
    if (t < 0.0 || t > options.T + 0.5 * options.dt)
      throw InvalidArgument("snapshot time outside [0, T]");
    snap_steps.push_back(static_cast<int>(std::llround(t / options.dt)));
  }
  std::sort(snap_steps.begin(), snap_steps.end());
  snap_steps.erase(std::unique(snap_steps.begin(), snap_steps.end()), snap_steps.end());

  const NodeMask& mask = op.mask();
  Trajectory traj;
  traj.reaction = reaction;
  traj.dt = options.dt;
  Field cur(n, 0.0), rhs(n, 0.0);
  double bound = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!mask[i]) continue;
    if (n0[i] < 0.0) throw InvalidArgument("initial data must be non-negative");
    cur[i] = n0[i];
    bound = std::max(bound, n0[i]);
  }
  const double slack = 1e-10;

  std::size_t next = 0;
  auto record = [&](int step) {
    while (next < snap_steps.size() && snap_steps[next] == step) {
      traj.steps.push_back(step);
      traj.times.push_back(step * options.dt);
      traj.snapshots.push_back(cur);
      ++next;
    }
  };
  record(0);
  if (options.observer) options.observer(0, 0.0, cur);

  // (I + dt A) y = b  <=>  (A + 1/dt) y = b / dt
  const double inv_dt = 1.0 / options.dt;
  ShiftedSolver solver(op, inv_dt, options.cg);
  for (int k = 1; k <= nsteps; ++k) {
    for (std::size_t i = 0; i < n; ++i)
      rhs[i] = mask[i] ? (cur[i] + options.dt * reaction(cur[i])) * inv_dt : 0.0;
    solver.solve(rhs, cur);
    for (std::size_t i = 0; i < n; ++i) {
      if (!mask[i]) continue;
      if (cur[i] < 0.0) {
        if (cur[i] < -options.negativity_tolerance)
          throw SolverError("negative density " + std::to_string(cur[i]) + " at node " +
                                std::to_string(i) + ", step " + std::to_string(k),
                            cur[i]);
        cur[i] = 0.0;
      }
      if (reaction.kind == ReactionKind::kpp && cur[i] > bound + slack)
        throw SolverError("KPP invariant region violated at node " + std::to_string(i), cur[i]);
    }
    record(k);
    if (options.observer) options.observer(k, k * options.dt, cur);
  }
  traj.cg_iterations = solver.total_iterations();
  return traj;
}

double ordering_violation(const Trajectory& lower, const Trajectory& upper) {
  if (lower.snapshots.size() != upper.snapshots.size())
    throw InvalidArgument("trajectories have different snapshot counts");
  double v = 0.0;
  for (std::size_t s = 0; s < lower.snapshots.size(); ++s) {
    const Field& a = lower.snapshots[s];
    const Field& b = upper.snapshots[s];
    for (std::size_t i = 0; i < a.size(); ++i) v = std::max(v, a[i] - b[i]);
  }
  return v;
}

TailEnvelope prepared_tails(std::span<const double> n, const GridDomain& dom, double alpha,
                            double max_radius, double min_radius) {
  TailEnvelope env;
  env.c_m = std::numeric_limits<double>::infinity();
  const double q = 1.0 + 2.0 * alpha;
  const double hmin = dom.spacing * (1.0 - 1e-9);
  for (std::size_t i = 0; i < dom.size(); ++i) {
    const double ax = std::abs(dom.x[i]);
    if (!dom.mask[i] || dom.delta[i] < hmin || ax > max_radius || ax < min_radius) continue;
    const double r = n[i] * (1.0 + std::pow(std::abs(dom.x[i]), q)) / std::pow(dom.delta[i], alpha);
    env.c_m = std::min(env.c_m, r);
    env.c_M = std::max(env.c_M, r);
    ++env.nodes;
  }
  if (env.nodes == 0) throw InvalidArgument("no admissible nodes for the tail envelope");
  return env;
}

}  // namespace fkpp
