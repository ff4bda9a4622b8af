#include "fkpp/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "fkpp/error.hpp"
#include "fkpp/fft.hpp"

namespace fkpp {
namespace {

constexpr std::size_t kMinFitPoints = 8;

double tail_exponent(double alpha) { return 1.0 + 2.0 * alpha; }

}  // namespace

FitReport fit_line(std::vector<double> xs, std::vector<double> ys) {
  if (xs.size() != ys.size()) throw InvalidArgument("fit: abscissa/ordinate size mismatch");
  if (xs.size() < 2) throw InvalidArgument("fit needs at least two points");
  FitReport r;
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw InvalidArgument("fit abscissae are all equal");
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (r.slope * xs[i] + r.intercept);
    ss += e * e;
  }
  r.rms = std::sqrt(ss / n);
  r.points = xs.size();
  r.window_lo = *std::min_element(xs.begin(), xs.end());
  r.window_hi = *std::max_element(xs.begin(), xs.end());
  r.xs = std::move(xs);
  r.ys = std::move(ys);
  return r;
}

std::vector<std::pair<long, double>> component_maxima(std::span<const double> field,
                                                      const GridDomain& dom,
                                                      const NodeMask& mask) {
  std::map<long, double> best;
  for (std::size_t i = 0; i < dom.size(); ++i) {
    if (!mask[i]) continue;
    auto [it, inserted] = best.try_emplace(dom.component[i], field[i]);
    if (!inserted) it->second = std::max(it->second, field[i]);
  }
  return {best.begin(), best.end()};
}

KernelRatioReport kernel_ratio_check(std::span<const double> p, const GridDomain& dom,
                                     double alpha, double r_lo, double r_hi, double limit) {
  KernelRatioReport r;
  r.envelope = prepared_tails(p, dom, alpha, r_hi, r_lo);
  r.limit = limit;
  r.pass = r.envelope.c_m > 0.0 && r.envelope.ratio() <= limit;
  return r;
}

double kernel_ratio_drift(const KernelRatioReport& a, const KernelRatioReport& b) {
  const double dm = std::abs(b.envelope.c_m - a.envelope.c_m) / a.envelope.c_m;
  const double dM = std::abs(b.envelope.c_M - a.envelope.c_M) / a.envelope.c_M;
  return std::max(dm, dM);
}

FitReport fit_tail_exponent(std::span<const double> field, const GridDomain& dom, double alpha,
                            double r_lo, double r_hi, double tolerance) {
  if (!(r_hi > r_lo)) throw InvalidArgument("tail band is empty");
  std::vector<double> xs, ys;
  for (const auto& [k, m] : component_maxima(field, dom, dom.mask)) {
    const double r = std::abs(dom.geometry.offset(k));
    if (r < r_lo || r > r_hi || !(m > 0.0)) continue;
    xs.push_back(std::log(r));
    ys.push_back(std::log(m));
  }
  if (xs.size() < kMinFitPoints)
    throw InvalidArgument("tail band holds " + std::to_string(xs.size()) +
                          " components, need at least 8");
  FitReport r = fit_line(std::move(xs), std::move(ys));
  r.target = -tail_exponent(alpha);
  r.relative_deviation = std::abs(r.slope - r.target) / std::abs(r.target);
  r.pass = r.relative_deviation <= tolerance;
  return r;
}

FrontTracker::FrontTracker(const GridDomain& dom, double level, double nu) : dom_(&dom) {
  if (!(level > 0.0 && level < 1.0)) throw InvalidArgument("invasion level must lie in (0, 1)");
  trace_.level = level;
  trace_.nu = nu;
  const NodeMask core = erode(dom, nu);
  std::map<long, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < dom.size(); ++i)
    if (core[i]) groups[dom.component[i]].push_back(i);
  for (auto& [k, nodes] : groups) {
    keys_.push_back(k);
    nodes_.push_back(std::move(nodes));
  }
  if (keys_.empty()) throw InvalidArgument("eroded core is empty; reduce nu");
}

void FrontTracker::observe(double t, std::span<const double> n) {
  std::vector<long> invaded;
  double R = 0.0;
  for (std::size_t c = 0; c < keys_.size(); ++c) {
    double m = 0.0;
    for (std::size_t i : nodes_[c]) m = std::max(m, n[i]);
    if (m >= trace_.level) {
      invaded.push_back(keys_[c]);
      R = std::max(R, std::abs(dom_->geometry.offset(keys_[c])));
    }
  }
  trace_.times.push_back(t);
  trace_.invaded.push_back(std::move(invaded));
  trace_.R.push_back(R);
}

FrontTrace track_front(const Trajectory& traj, const GridDomain& dom, double level, double nu) {
  FrontTracker tracker(dom, level, nu);
  for (std::size_t s = 0; s < traj.snapshots.size(); ++s)
    tracker.observe(traj.times[s], traj.snapshots[s]);
  return tracker.trace();
}

std::optional<double> nesting_violation(const FrontTrace& trace, double t_from) {
  for (std::size_t s = 1; s < trace.times.size(); ++s) {
    if (trace.times[s - 1] < t_from) continue;
    const auto& prev = trace.invaded[s - 1];
    const auto& cur = trace.invaded[s];
    if (!std::includes(cur.begin(), cur.end(), prev.begin(), prev.end())) return trace.times[s];
  }
  return std::nullopt;
}

FitReport fit_speed(const FrontTrace& trace, double lambda0, double alpha,
                    const SpeedFitOptions& options) {
  std::vector<double> xs, ys;
  for (std::size_t s = 0; s < trace.times.size(); ++s) {
    const double R = trace.R[s];
    if (trace.times[s] < options.t_min || !(R > 0.0) || R < options.r_min) continue;
    if (options.r_max > 0.0 && R > options.r_max) continue;
    xs.push_back(trace.times[s]);
    ys.push_back(std::log(R));
  }
  if (xs.size() < kMinFitPoints)
    throw InvalidArgument("front trace has " + std::to_string(xs.size()) +
                          " usable points, need at least 8");
  FitReport r = fit_line(std::move(xs), std::move(ys));
  r.target = std::abs(lambda0) / tail_exponent(alpha);
  r.relative_deviation = std::abs(r.slope - r.target) / r.target;
  r.pass = r.relative_deviation <= options.tolerance;
  return r;
}

PlateauReport plateau_check(const Trajectory& traj, std::span<const double> n_plus,
                            const GridDomain& dom, double nu, double c, double mu) {
  const NodeMask core = erode(dom, nu);
  PlateauReport rep;
  for (std::size_t s = 0; s < traj.snapshots.size(); ++s) {
    const double radius = std::exp(c * traj.times[s]);
    const Field& n = traj.snapshots[s];
    double dev = 0.0;
    for (std::size_t i = 0; i < dom.size(); ++i)
      if (core[i] && std::abs(dom.x[i]) < radius) dev = std::max(dev, std::abs(n[i] - n_plus[i]));
    rep.deviations.push_back(dev);
  }
  // Earliest index from which every later deviation is within mu.
  std::optional<std::size_t> first;
  for (std::size_t s = rep.deviations.size(); s-- > 0;) {
    if (rep.deviations[s] > mu) break;
    first = s;
  }
  if (first) {
    rep.snapshot = first;
    rep.t_mu = traj.times[*first];
  }
  return rep;
}

FitReport decay_beyond_front(const Trajectory& traj, const GridDomain& dom, double rate_C,
                             double t_min, double r_max) {
  std::vector<double> xs, ys;
  for (std::size_t s = 0; s < traj.snapshots.size(); ++s) {
    const double t = traj.times[s];
    const double radius = std::exp(rate_C * t);
    if (t < t_min || radius > r_max) continue;
    const Field& n = traj.snapshots[s];
    double m = 0.0;
    for (std::size_t i = 0; i < dom.size(); ++i)
      if (dom.mask[i] && std::abs(dom.x[i]) > radius) m = std::max(m, n[i]);
    if (!(m > 0.0)) continue;
    xs.push_back(t);
    ys.push_back(std::log(m));
  }
  if (xs.size() < kMinFitPoints)
    throw InvalidArgument("decay fit has " + std::to_string(xs.size()) +
                          " usable snapshots, need at least 8");
  FitReport r = fit_line(std::move(xs), std::move(ys));
  r.target = 0.0;
  r.relative_deviation = 0.0;
  r.pass = -r.slope > 0.0;
  return r;
}

EnvelopeReport envelope_check(const Trajectory& traj, const GridDomain& dom,
                              std::span<const double> phi_nu, std::span<const double> phi_mnu,
                              const EnvelopeInputs& in) {
  if (phi_nu.size() != dom.size() || phi_mnu.size() != dom.size())
    throw InvalidArgument("envelope eigenfunctions are not on the trajectory grid");
  const NodeMask core = erode(dom, in.nu);
  const double q = tail_exponent(in.alpha);
  double max_phi = 0.0;
  double min_phi_m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < dom.size(); ++i) {
    if (core[i]) max_phi = std::max(max_phi, phi_nu[i]);
    if (dom.mask[i]) min_phi_m = std::min(min_phi_m, phi_mnu[i]);
  }
  if (!(min_phi_m > 0.0)) throw InvalidArgument("phi_{-nu} is not positive on Omega");
  EnvelopeReport rep;
  const double lam_nu = std::abs(in.lambda_nu);
  const double lam_mnu = std::abs(in.lambda_minus_nu);
  rep.C_m = in.cm_scale *
            std::min(std::min(lam_nu, in.c_m * std::pow(in.nu, in.alpha)) / (2.0 * (max_phi + 1.0)),
                     1.0);
  rep.C_M = (2.0 * lam_mnu + in.c_M) / min_phi_m;
  const double eps2 = in.epsilon * in.epsilon;
  for (std::size_t s = 0; s < traj.snapshots.size(); ++s) {
    const double t = traj.times[s];
    if (t < 1.0 - 1e-12) continue;
    const Field& n = traj.snapshots[s];
    const double log_lo = -(t - 1.0) * (lam_nu - eps2);
    const double log_hi = -(t - 1.0) * (lam_mnu + eps2) - 1.0 / in.epsilon;
    double vlo = 0.0, vhi = 0.0;
    for (std::size_t i = 0; i < dom.size(); ++i) {
      if (!dom.mask[i]) continue;
      const double logx = q * std::log(std::abs(dom.x[i]));
      if (core[i]) {
        const double lower = rep.C_m * phi_nu[i] / (1.0 + std::exp(log_lo + logx));
        vlo = std::max(vlo, lower - n[i] - in.epsilon);
      }
      const double upper = rep.C_M * phi_mnu[i] / (1.0 + std::exp(log_hi + logx));
      vhi = std::max(vhi, n[i] - upper);
    }
    rep.times.push_back(t);
    rep.lower_violation.push_back(vlo);
    rep.upper_violation.push_back(vhi);
    rep.max_lower = std::max(rep.max_lower, vlo);
    rep.max_upper = std::max(rep.max_upper, vhi);
  }
  return rep;
}

BarrierReport barrier_check(double nu, double alpha, double h) {
  if (!(nu >= 4.0 * h * (1.0 - 1e-12))) throw InvalidArgument("barrier needs nu >= 4h");
  const Stencil stencil(alpha, h);
  const TruncatedFracOp op(stencil, nu);
  const auto m = static_cast<long>(std::ceil(2.0 * nu / h));
  const std::size_t n = static_cast<std::size_t>(2 * m + 1);
  BarrierReport rep;
  rep.x.resize(n);
  for (std::size_t i = 0; i < n; ++i) rep.x[i] = (static_cast<long>(i) - m) * h;
  auto profile = [&](double C) {
    Field psi(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double ax = std::abs(rep.x[i]);
      if (ax >= nu) continue;
      psi[i] = std::pow(nu * nu - ax * ax, alpha) / C + (ax < 0.25 * nu ? 0.5 : 0.0);
    }
    return psi;
  };
  Field lpsi(n);
  for (int k = 0; k <= 20; ++k) {
    const double C = std::ldexp(1.0, k);
    Field psi = profile(C);
    op.apply(psi, lpsi);
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const double ax = std::abs(rep.x[i]);
      if (ax >= 0.5 * nu && ax < nu) worst = std::max(worst, lpsi[i]);
    }
    if (worst <= 0.0) {
      rep.C = C;
      rep.max_on_annulus = worst;
      rep.psi = std::move(psi);
      break;
    }
  }
  if (rep.C == 0.0) return rep;
  rep.c_lower = std::numeric_limits<double>::infinity();
  rep.zero_outside = true;
  for (std::size_t i = 0; i < n; ++i) {
    const double ax = std::abs(rep.x[i]);
    if (ax >= nu) {
      rep.zero_outside = rep.zero_outside && rep.psi[i] == 0.0;
      continue;
    }
    rep.c_lower = std::min(rep.c_lower, rep.psi[i] / std::pow(nu - ax, alpha));
    if (ax < 0.5 * nu) rep.max_inner = std::max(rep.max_inner, rep.psi[i]);
  }
  rep.pass = rep.max_on_annulus <= 0.0 && rep.c_lower > 0.0 && rep.zero_outside &&
             rep.max_inner <= 1.0;
  return rep;
}

KernelLowerBoundReport kernel_lower_bound_pieces(double nu, double alpha, double h, double dt,
                                                 double tolerance) {
  if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
  const Stencil stencil(alpha, h);
  const auto m = static_cast<long>(std::ceil(nu / h - 1e-9)) - 1;
  if (m < 1) throw InvalidArgument("ball holds no interior nodes");
  const std::size_t n = static_cast<std::size_t>(2 * m + 1);
  TruncatedOperatorOnMask op(stencil, nu, NodeMask(n, 1));
  KernelLowerBoundReport rep;
  rep.tolerance = tolerance;
  EigenOptions eo;
  eo.tolerance = 1e-11;
  const EigenPair ground = principal_eigenpair(op, eo);
  rep.mu = ground.value;
  rep.c_nu = (1.0 - std::exp(-rep.mu)) / rep.mu;

  rep.monotone_in_time = true;
  rep.below_t = true;
  auto integrate = [&](double step) {
    const int steps = static_cast<int>(std::llround(1.0 / step));
    ShiftedSolver solver(op, 1.0 / step, CgOptions{1e-14, 5000});
    Field w(n, 0.0), rhs(n), prev(n);
    for (int k = 1; k <= steps; ++k) {
      prev = w;
      for (std::size_t i = 0; i < n; ++i) rhs[i] = (w[i] + step) / step;
      solver.solve(rhs, w);
      const double t = k * step;
      for (std::size_t i = 0; i < n; ++i) {
        if (w[i] < prev[i] - 1e-12) rep.monotone_in_time = false;
        if (w[i] > t + 1e-12) rep.below_t = false;
      }
    }
    return w;
  };
  const Field coarse = integrate(dt);
  const Field fine = integrate(0.5 * dt);
  rep.min_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double w1 = 2.0 * fine[i] - coarse[i];
    const double margin = w1 - rep.c_nu * ground.vector[i];
    if (margin < rep.min_margin) {
      rep.min_margin = margin;
      rep.margin_location = (static_cast<long>(i) - m) * h;
    }
  }
  rep.pass = rep.min_margin >= -tolerance && rep.monotone_in_time && rep.below_t;
  return rep;
}

ScalingReport scaling_check(double alpha, double h, double half_width,
                            const std::vector<double>& a_list, double slack) {
  if (a_list.empty() || a_list.front() != 1.0)
    throw InvalidArgument("scaling check needs a = 1 first in the list");
  const Stencil stencil(alpha, h);
  const auto n = static_cast<std::size_t>(std::llround(2.0 * half_width / h));
  const std::vector<double> row = stencil.row(n);
  std::vector<double> kernel(2 * n, 0.0);
  for (std::size_t j = 1; j < n; ++j) {
    kernel[j] = row[j];
    kernel[2 * n - j] = row[j];
  }
  const CircularConvolver conv(kernel);
  const double q = tail_exponent(alpha);
  ScalingReport rep;
  Field g(n), ag(n);
  for (double a : a_list) {
    for (std::size_t i = 0; i < n; ++i) {
      const double x = -half_width + static_cast<double>(i) * h;
      g[i] = 1.0 / (1.0 + std::pow(std::abs(a * x), q));
    }
    conv.convolve(g, ag);
    double sup = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = -half_width + static_cast<double>(i) * h;
      if (std::abs(x) > 0.25 * half_width) continue;
      const double value = stencil.diagonal() * g[i] - ag[i];
      sup = std::max(sup, std::abs(value) / (std::pow(a, 2.0 * alpha) * g[i]));
    }
    rep.a.push_back(a);
    rep.constants.push_back(sup);
  }
  for (double c : rep.constants) rep.worst_ratio = std::max(rep.worst_ratio, c / rep.constants[0]);
  rep.pass = rep.worst_ratio <= 1.0 + slack;
  return rep;
}

Field periodic_extend(std::span<const double> field, const GridDomain& source,
                      const GridDomain& target) {
  if (std::abs(source.spacing - target.spacing) > 1e-12 * target.spacing)
    throw InvalidArgument("periodic extension needs equal spacings");
  if (std::abs(source.geometry.period() - target.geometry.period()) > 1e-12)
    throw InvalidArgument("periodic extension needs equal periods");
  const long ns = static_cast<long>(source.size());
  const long offset = std::lround((source.half_width - target.half_width) / target.spacing);
  Field out(target.size(), 0.0);
  for (std::size_t i = 0; i < target.size(); ++i) {
    long j = (static_cast<long>(i) + offset) % ns;
    if (j < 0) j += ns;
    out[i] = field[static_cast<std::size_t>(j)];
  }
  return out;
}

}  // namespace fkpp
