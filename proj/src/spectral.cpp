#include "fkpp/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "fkpp/error.hpp"

namespace fkpp {
namespace {

// Distance kept between the safe shift and the operator's lower bound.
constexpr double kSafeMargin = 0.1;

double norm2_masked(std::span<const double> v, const NodeMask& mask) {
  return std::sqrt(dot_masked(v, v, mask));
}

struct Iterate {
  double rho = 0.0;
  double res2 = 0.0;
  double res_inf = 0.0;
};

// Rayleigh quotient and residuals of a unit (2-norm) vector.
Iterate measure(const MaskedOperator& op, std::span<const double> x, Field& work) {
  const NodeMask& mask = op.mask();
  op.apply(x, work);
  Iterate it;
  it.rho = dot_masked(x, work, mask);
  double r2 = 0.0;
  double rinf = 0.0;
  double xinf = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!mask[i]) continue;
    const double r = work[i] - it.rho * x[i];
    r2 += r * r;
    rinf = std::max(rinf, std::abs(r));
    xinf = std::max(xinf, std::abs(x[i]));
  }
  it.res2 = std::sqrt(r2);
  it.res_inf = xinf > 0.0 ? rinf / xinf : rinf;
  return it;
}

bool nearly_one_signed(std::span<const double> x, const NodeMask& mask) {
  double lo = 0.0;
  double hi = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!mask[i]) continue;
    lo = std::min(lo, x[i]);
    hi = std::max(hi, x[i]);
  }
  return -lo <= 1e-6 * hi || hi <= 1e-6 * -lo;
}

}  // namespace

double eigen_residual(const MaskedOperator& op, std::span<const double> phi, double lambda) {
  Field work(phi.size());
  op.apply(phi, work);
  double r = 0.0;
  const NodeMask& mask = op.mask();
  for (std::size_t i = 0; i < phi.size(); ++i)
    if (mask[i]) r = std::max(r, std::abs(work[i] - lambda * phi[i]));
  return r;
}

EigenPair principal_eigenpair(const MaskedOperator& op, const EigenOptions& options,
                              std::span<const double> start) {
  const NodeMask& mask = op.mask();
  const std::size_t n = op.size();
  if (count(mask) == 0) throw InvalidArgument("eigenproblem on an empty mask");
  if (!start.empty() && start.size() != n) throw InvalidArgument("start vector size mismatch");

  Field x(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    if (mask[i]) x[i] = start.empty() ? 1.0 : start[i];
  double nx = norm2_masked(x, mask);
  if (!(nx > 0.0)) throw InvalidArgument("start vector vanishes on the mask");
  for (double& v : x) v /= nx;

  const double safe_sigma = op.lower_bound() - kSafeMargin;
  double sigma = safe_sigma;
  bool adaptive = options.adaptive_shift;
  auto solver = std::make_unique<ShiftedSolver>(op, -sigma, options.cg);
  long inner = 0;

  Field y(n), work(n);
  Iterate it = measure(op, x, work);
  for (int k = 1; k <= options.max_iterations; ++k) {
    std::copy(x.begin(), x.end(), y.begin());
    bool fallback = false;
    try {
      inner += solver->solve(x, y).iterations;
    } catch (const SolverError&) {
      if (sigma == safe_sigma) throw;
      fallback = true;
    }
    if (!fallback && sigma != safe_sigma && !nearly_one_signed(y, mask)) fallback = true;
    if (fallback) {
      // The adaptive shift overtook the ground state; retreat for good.
      adaptive = false;
      sigma = safe_sigma;
      solver = std::make_unique<ShiftedSolver>(op, -sigma, options.cg);
      std::copy(x.begin(), x.end(), y.begin());
      inner += solver->solve(x, y).iterations;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask[i]) sum += y[i];
    nx = norm2_masked(y, mask);
    if (!(nx > 0.0) || !std::isfinite(nx))
      throw SolverError("inverse iteration produced a degenerate iterate", it.res_inf);
    const double scale = (sum < 0.0 ? -1.0 : 1.0) / nx;
    for (std::size_t i = 0; i < n; ++i) x[i] = mask[i] ? y[i] * scale : 0.0;
    it = measure(op, x, work);
    if (it.res_inf <= options.tolerance) {
      EigenPair pair;
      double xmax = 0.0;
      for (double v : x) xmax = std::max(xmax, v);
      pair.vector.assign(n, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        if (mask[i]) pair.vector[i] = std::max(0.0, x[i] / xmax);
      pair.value = it.rho;
      pair.residual = eigen_residual(op, pair.vector, pair.value);
      pair.iterations = k;
      pair.inner_iterations = inner;
      return pair;
    }
    if (adaptive && it.res2 < 1e-2) {
      const double candidate = it.rho - 2.0 * it.res2;
      if (candidate > sigma) {
        sigma = candidate;
        solver = std::make_unique<ShiftedSolver>(op, -sigma, options.cg);
      }
    }
  }
  throw SolverError("inverse iteration did not converge in " +
                        std::to_string(options.max_iterations) + " iterations",
                    it.res_inf);
}

SimplicityReport simplicity_check(const MaskedOperator& op, const EigenPair& reference,
                                  const EigenOptions& options, std::uint64_t seed,
                                  int restarts) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  SimplicityReport report;
  const NodeMask& mask = op.mask();
  Field start(op.size(), 0.0);
  for (int r = 0; r < restarts; ++r) {
    for (std::size_t i = 0; i < start.size(); ++i) start[i] = mask[i] ? 0.5 + unif(rng) : 0.0;
    const EigenPair pair = principal_eigenpair(op, options, start);
    report.values.push_back(pair.value);
    report.max_deviation = std::max(report.max_deviation, std::abs(pair.value - reference.value));
  }
  report.simple = report.max_deviation <= 10.0 * options.tolerance;
  return report;
}

EigenPair eroded_eigenpair(const DiscreteFracOp& op, double nu, const EigenOptions& options) {
  NodeMask mask = nu >= 0.0 ? erode(op.domain(), nu) : dilate(op.domain(), -nu);
  if (count(mask) == 0)
    throw InvalidArgument("Omega_nu is empty for nu = " + std::to_string(nu));
  FracOperatorOnMask masked(op, std::move(mask), -1.0);
  return principal_eigenpair(masked, options);
}

SweepResult eigen_sweep(const DiscreteFracOp& op, std::vector<double> nu_list,
                        const EigenOptions& options) {
  std::sort(nu_list.begin(), nu_list.end());
  SweepResult result;
  for (double nu : nu_list) {
    NodeMask mask = nu >= 0.0 ? erode(op.domain(), nu) : dilate(op.domain(), -nu);
    const std::size_t nodes = count(mask);
    if (nodes == 0) throw InvalidArgument("Omega_nu is empty for nu = " + std::to_string(nu));
    FracOperatorOnMask masked(op, std::move(mask), -1.0);
    const EigenPair pair = principal_eigenpair(masked, options);
    result.entries.push_back({nu, pair.value, nodes});
    if (nu > 0.0 && pair.value < 0.0) result.r0 = std::max(result.r0, nu);
  }
  result.monotone = true;
  for (std::size_t i = 1; i < result.entries.size(); ++i) {
    if (result.entries[i].value < result.entries[i - 1].value - 10.0 * options.tolerance)
      result.monotone = false;
  }
  return result;
}

EigenPair single_component_eigenpair(const PeriodicGeometry& geom, double alpha, double spacing,
                                     const EigenOptions& options) {
  const GridDomain dom = build_domain(geom, geom.period(), spacing);
  const DiscreteFracOp op(dom, alpha, Exterior::dirichlet);
  FracOperatorOnMask masked(op, component_mask(dom, 0), -1.0);
  return principal_eigenpair(masked, options);
}

H1Report check_h1_and_corollary(const DiscreteFracOp& op, const EigenOptions& options) {
  H1Report report;
  report.single = single_component_eigenpair(op.domain().geometry, op.alpha(),
                                             op.domain().spacing, options);
  FracOperatorOnMask masked(op, op.mask(), -1.0);
  report.ground = principal_eigenpair(masked, options);
  report.lambda1 = report.single.value;
  report.lambda0 = report.ground.value;
  report.status = report.lambda1 < 0.0 ? H1Status::holds : H1Status::fails;
  report.corollary_holds = !(report.lambda1 < 0.0) || report.lambda0 < 0.0;
  report.ordered = report.lambda0 <= report.lambda1 + 10.0 * options.tolerance;
  report.predicted_speed = std::abs(report.lambda0) / (1.0 + 2.0 * op.alpha());
  return report;
}

std::string to_string(H1Status status) {
  return status == H1Status::holds ? "holds" : "(H1) fails for this geometry/alpha";
}

}  // namespace fkpp
