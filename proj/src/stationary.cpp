#include "fkpp/stationary.hpp"

#include <algorithm>
#include <cmath>

#include "fkpp/error.hpp"

namespace fkpp {
namespace {

// Rows at which n vanishes to this level are treated as the trivial state.
constexpr double kCollapse = 1e-12;

double sup_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

class MonotoneMap {
 public:
  MonotoneMap(const DiscreteFracOp& op, const NodeMask& mask, const StationaryOptions& options)
      : masked_(op, mask, 0.0), solver_(masked_, options.K, options.cg), K_(options.K) {}

  // z <- (A + K)^{-1} (K z + z - z^2) on the mask.
  void step(Field& z) {
    const NodeMask& mask = masked_.mask();
    rhs_.assign(z.size(), 0.0);
    for (std::size_t i = 0; i < z.size(); ++i)
      if (mask[i]) rhs_[i] = K_ * z[i] + z[i] - z[i] * z[i];
    solver_.solve(rhs_, z);
  }

 private:
  FracOperatorOnMask masked_;
  ShiftedSolver solver_;
  double K_;
  Field rhs_;
};

void validate(const StationaryOptions& options) {
  if (!(options.K >= 2.0)) throw InvalidArgument("monotone splitting needs K >= 2");
  if (!(options.tolerance > 0.0)) throw InvalidArgument("stationary tolerance must be positive");
}

}  // namespace

double stationary_residual(const DiscreteFracOp& op, const NodeMask& mask,
                           std::span<const double> n) {
  Field an(n.size());
  op.apply_masked(n, mask, an);
  double r = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i)
    if (mask[i]) r = std::max(r, std::abs(an[i] - n[i] + n[i] * n[i]));
  return r;
}

std::optional<double> subsolution_scale(const DiscreteFracOp& op, const NodeMask& mask,
                                        std::span<const double> phi) {
  Field aphi(phi.size());
  op.apply_masked(phi, mask, aphi);
  double eps = 1.0;
  for (int j = 0; j <= 60; ++j, eps *= 0.5) {
    bool ok = true;
    for (std::size_t i = 0; i < phi.size() && ok; ++i) {
      if (!mask[i]) continue;
      const double u = eps * phi[i];
      ok = eps * aphi[i] <= u - u * u;
    }
    if (ok) return eps;
  }
  return std::nullopt;
}

StationaryResult solve_stationary_from(const DiscreteFracOp& op, const NodeMask& mask,
                                       std::span<const double> lower_start,
                                       const StationaryOptions& options) {
  validate(options);
  const std::size_t n = op.size();
  if (lower_start.size() != n || mask.size() != n)
    throw InvalidArgument("stationary start size does not match operator");
  MonotoneMap map(op, mask, options);
  StationaryResult result;
  BracketState& b = result.bracket;
  b.lower.assign(n, 0.0);
  b.upper.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!mask[i]) continue;
    b.lower[i] = lower_start[i];
    b.upper[i] = 1.0;
  }
  Field prev_lower, prev_upper;
  b.gap = sup_diff(b.lower, b.upper);
  b.gap_history.push_back(b.gap);
  const double slack = options.monotonicity_slack;
  while (b.gap > options.tolerance) {
    if (b.iterations >= options.max_iterations)
      throw SolverError("monotone iteration did not close the bracket", b.gap);
    prev_lower = b.lower;
    prev_upper = b.upper;
    map.step(b.lower);
    map.step(b.upper);
    ++b.iterations;
    for (std::size_t i = 0; i < n; ++i) {
      if (!mask[i]) continue;
      if (b.lower[i] < prev_lower[i] - slack || b.upper[i] > prev_upper[i] + slack ||
          b.lower[i] > b.upper[i] + slack)
        throw SolverError("monotone iteration lost its ordering at node " + std::to_string(i),
                          b.gap);
    }
    b.gap = sup_diff(b.lower, b.upper);
    b.gap_history.push_back(b.gap);
    if (sup_norm(b.upper) <= kCollapse) break;
  }
  result.state.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    if (mask[i]) result.state[i] = 0.5 * (b.lower[i] + b.upper[i]);
  result.residual = stationary_residual(op, mask, result.state);
  result.status = sup_norm(b.lower) > kCollapse ? StationaryStatus::positive
                                                : StationaryStatus::trivial_only;
  return result;
}

StationaryResult solve_stationary(const DiscreteFracOp& op, const NodeMask& mask,
                                  const EigenPair& ground, const StationaryOptions& options) {
  validate(options);
  const std::optional<double> eps = subsolution_scale(op, mask, ground.vector);
  if (!eps) {
    // No positive sub-solution: follow the lower sequence from phi0 down to
    // the trivial state to document the collapse.
    MonotoneMap map(op, mask, options);
    StationaryResult result;
    Field z(ground.vector.begin(), ground.vector.end());
    BracketState& b = result.bracket;
    while (sup_norm(z) > options.tolerance && b.iterations < options.max_iterations) {
      map.step(z);
      ++b.iterations;
      b.gap_history.push_back(sup_norm(z));
    }
    b.lower = z;
    b.upper = z;
    b.gap = 0.0;
    result.state.assign(op.size(), 0.0);
    result.residual = stationary_residual(op, mask, result.state);
    result.status = StationaryStatus::trivial_only;
    return result;
  }
  Field start(op.size(), 0.0);
  for (std::size_t i = 0; i < start.size(); ++i)
    if (mask[i]) start[i] = *eps * ground.vector[i];
  StationaryResult result = solve_stationary_from(op, mask, start, options);
  result.epsilon = *eps;
  return result;
}

ShapeRatio shape_ratio(std::span<const double> u, const GridDomain& dom, double alpha,
                       std::optional<double> max_delta) {
  const double cap = max_delta.value_or(0.5 * dom.geometry.ball_radius());
  ShapeRatio r;
  r.c = INFINITY;
  r.C = 0.0;
  for (std::size_t i = 0; i < dom.size(); ++i) {
    if (!dom.mask[i] || dom.delta[i] > cap) continue;
    const double q = u[i] / std::pow(dom.delta[i], alpha);
    r.c = std::min(r.c, q);
    r.C = std::max(r.C, q);
    ++r.nodes;
  }
  if (r.nodes == 0) throw InvalidArgument("no masked nodes near the boundary");
  if (!(r.c > 0.0)) throw SolverError("shape ratio is not positive: corrupted state");
  return r;
}

double periodicity_deviation(std::span<const double> n, const GridDomain& dom,
                             int margin_periods) {
  const std::size_t shift = dom.period_shift();
  const std::size_t lo = static_cast<std::size_t>(std::max(margin_periods, 0)) * shift;
  const std::size_t hi = dom.size() - lo;
  double dev = 0.0;
  for (std::size_t i = lo; i + shift < hi; ++i) {
    if (!dom.mask[i]) continue;
    dev = std::max(dev, std::abs(n[i + shift] - n[i]));
  }
  return dev;
}

UniquenessReport uniqueness_certificate(const DiscreteFracOp& op, const NodeMask& mask,
                                        const StationaryResult& reference,
                                        const EigenPair& ground, double agreement,
                                        const StationaryOptions& options,
                                        const EigenOptions& eigen_options) {
  UniquenessReport report;
  if (reference.status != StationaryStatus::positive)
    throw InvalidArgument("uniqueness certificate needs a positive stationary state");
  std::vector<Field> starts;
  for (double factor : {0.5, 0.125}) {
    const double eps = reference.epsilon * factor;
    Field s(op.size(), 0.0);
    for (std::size_t i = 0; i < s.size(); ++i)
      if (mask[i]) s[i] = eps * ground.vector[i];
    report.epsilons.push_back(eps);
    starts.push_back(std::move(s));
  }
  {
    NodeMask single = component_mask(op.domain(), 0);
    for (std::size_t i = 0; i < single.size(); ++i) single[i] = single[i] && mask[i];
    FracOperatorOnMask masked(op, single, -1.0);
    const EigenPair phi1 = principal_eigenpair(masked, eigen_options);
    const std::optional<double> eps = subsolution_scale(op, mask, phi1.vector);
    if (!eps) throw SolverError("single-component ground state is not a sub-solution");
    Field s(op.size(), 0.0);
    for (std::size_t i = 0; i < s.size(); ++i)
      if (mask[i]) s[i] = *eps * phi1.vector[i];
    report.epsilons.push_back(*eps);
    starts.push_back(std::move(s));
  }
  report.sandwiched = true;
  const double slack = 10.0 * options.tolerance;
  for (const Field& s : starts) {
    const StationaryResult r = solve_stationary_from(op, mask, s, options);
    const double dev = sup_diff(r.state, reference.state);
    report.deviations.push_back(dev);
    report.max_deviation = std::max(report.max_deviation, dev);
    if (&s == &starts.back()) report.single_start_state = r.state;
    for (std::size_t i = 0; i < r.state.size(); ++i) {
      if (!mask[i]) continue;
      if (r.state[i] < reference.bracket.lower[i] - slack ||
          r.state[i] > reference.bracket.upper[i] + slack)
        report.sandwiched = false;
    }
  }
  report.unique = report.max_deviation <= agreement;
  return report;
}

std::string to_string(StationaryStatus status) {
  return status == StationaryStatus::positive ? "positive" : "trivial state only";
}

}  // namespace fkpp
