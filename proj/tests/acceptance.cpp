// Acceptance battery: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Fixture: Omega0 = (0, 4), period 8, h = 1/64, window
// half-width 256, torus half-width 32, alpha in {0.25, 0.5, 0.75}.
#include <Eigen/Dense>
#include <gsl/gsl_sf_gamma.h>
#include <gsl/gsl_sf_hyperg.h>

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fkpp/analysis.hpp"
#include "fkpp/cli.hpp"
#include "fkpp/config.hpp"
#include "fkpp/evolution.hpp"
#include "fkpp/spectral.hpp"
#include "fkpp/stationary.hpp"

using namespace fkpp;
namespace fs = std::filesystem;

namespace {

constexpr double kAlphas[] = {0.25, 0.5, 0.75};
constexpr double kH = 1.0 / 64.0;
constexpr double kWindow = 256.0;
constexpr double kTorus = 32.0;

PeriodicGeometry fixture() { return PeriodicGeometry(8.0, {{0.0, 4.0}}); }

// Collects sub-check outcomes of one criterion.
class Verdict {
 public:
  void check(bool ok, const char* fmt, ...) __attribute__((format(printf, 3, 4))) {
    char buf[512];
    va_list ap;
    va_start(ap, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, ap);
    va_end(ap);
    pass_ = pass_ && ok;
    lines_.push_back(std::string(ok ? "    ok   " : "    FAIL ") + buf);
  }
  bool pass() const { return pass_; }
  const std::vector<std::string>& lines() const { return lines_; }

 private:
  bool pass_ = true;
  std::vector<std::string> lines_;
};

EigenOptions eig_opts() { return {}; }

double dense_matvec_error(double alpha) {
  const GridDomain d = build_domain(PeriodicGeometry(2.0, {{0.0, 1.0}}), 4.0, kH);  // N = 512
  const DiscreteFracOp op(d, alpha);
  const std::size_t n = d.size();
  const Stencil& st = op.stencil();
  Eigen::MatrixXd a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = i == j ? st.diagonal() : -st.weight(i > j ? i - j : j - i);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u01(-1.0, 1.0);
  Field u(n);
  for (double& v : u) v = u01(rng);
  const Eigen::VectorXd ref = a * Eigen::Map<const Eigen::VectorXd>(u.data(), n);
  const Field out = op.apply(u);
  double err = 0.0;
  for (std::size_t i = 0; i < n; ++i) err = std::max(err, std::abs(out[i] - ref[i]));
  return err / ref.lpNorm<Eigen::Infinity>();
}

void criterion1(Verdict& v) {
  const GridDomain d = build_domain(fixture(), kWindow, kH);
  for (double alpha : kAlphas) {
    v.check(dense_matvec_error(alpha) <= 1e-12, "alpha %.2f: fast vs dense matvec (N = 512) rel %.2e <= 1e-12",
            alpha, dense_matvec_error(alpha));
    const DiscreteFracOp dir(d, alpha);
    const DiscreteFracOp per(d, alpha, Exterior::periodic);
    const Field one(d.size(), 1.0);
    Field out(d.size());
    dir.apply_window_only(one, out);
    const double c1 = sup_norm(out) / dir.diagonal();
    const double c2 = sup_norm(per.apply(one)) / per.diagonal();
    v.check(std::max(c1, c2) <= 1e-10, "alpha %.2f: constants annihilated, |A1|/D = %.2e (window), %.2e (torus)",
            alpha, c1, c2);
    // The oracle is geometry-free, so it runs at the unscaled spacing 1/256, L = 64.
    const GridDomain f = build_domain(PeriodicGeometry(2.0, {{0.0, 1.0}}), 64.0, 1.0 / 256.0);
    const DiscreteFracOp fop(f, alpha);
    Field g(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) g[i] = std::exp(-f.x[i] * f.x[i]);
    const Field ag = fop.apply(g);
    const double pre = std::pow(4.0, alpha) * gsl_sf_gamma(0.5 + alpha) / gsl_sf_gamma(0.5);
    double err = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
      err = std::max(err, std::abs(ag[i] - pre * gsl_sf_hyperg_1F1(0.5 + alpha, 0.5, -f.x[i] * f.x[i])));
    v.check(err <= 1e-4, "alpha %.2f: Fourier oracle on exp(-x^2) (h 1/256), sup error %.2e <= 1e-4", alpha, err);
  }
}

void criterion2(Verdict& v) {
  {
    const PeriodicGeometry g(2.0, {{0.0, 1.0}});
    const double h = 1.0 / 512.0;
    const EigenPair p = single_component_eigenpair(g, 0.5, h, eig_opts());
    const GridDomain d = build_domain(g, 2.0, h);
    const DiscreteFracOp op(d, 0.5);
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < d.size(); ++i)
      if (d.mask[i] && d.component[i] == 0) idx.push_back(i);
    const Stencil& st = op.stencil();
    Eigen::MatrixXd a(idx.size(), idx.size());
    for (std::size_t p1 = 0; p1 < idx.size(); ++p1)
      for (std::size_t q = 0; q < idx.size(); ++q)
        a(p1, q) = p1 == q ? st.diagonal() - 1.0 : -st.weight(p1 > q ? p1 - q : q - p1);
    const double dense = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(a, Eigen::EigenvaluesOnly).eigenvalues()(0);
    v.check(std::abs(p.value - dense) <= 1e-8, "lambda1 on (0,1), alpha 0.5, h 1/512: %.12f vs dense %.12f", p.value,
            dense);
  }
  for (double alpha : kAlphas) {
    const GridDomain t = build_domain(fixture(), kTorus, kH);
    const DiscreteFracOp op(t, alpha, Exterior::periodic);
    const H1Report r = check_h1_and_corollary(op, eig_opts());
    v.check(r.ordered && r.corollary_holds, "alpha %.2f: lambda0 = %.8f <= lambda1 = %.8f", alpha, r.lambda0,
            r.lambda1);
    const GridDomain t2 = build_domain(fixture(), 2.0 * kTorus, kH);
    const DiscreteFracOp op2(t2, alpha, Exterior::periodic);
    const double l2 = principal_eigenpair(FracOperatorOnMask(op2, t2.mask, -1.0), eig_opts()).value;
    v.check(std::abs(l2 - r.lambda0) <= 1e-4, "alpha %.2f: window doubling |dlambda0| = %.2e <= 1e-4", alpha,
            std::abs(l2 - r.lambda0));
    const SweepResult s = eigen_sweep(op, {-0.1, -0.05, 0.0, 0.05, 0.1}, eig_opts());
    std::string vals;
    for (const auto& e : s.entries) vals += " " + std::to_string(e.value);
    v.check(s.monotone, "alpha %.2f: sweep nondecreasing in nu:%s", alpha, vals.c_str());
  }
}

void criterion3(Verdict& v) {
  for (double alpha : kAlphas) {
    const GridDomain t = build_domain(fixture(), kTorus, kH);
    const DiscreteFracOp op(t, alpha, Exterior::periodic);
    const EigenPair ground = principal_eigenpair(FracOperatorOnMask(op, t.mask, -1.0), eig_opts());
    StationaryOptions so;
    const StationaryResult r = solve_stationary(op, t.mask, ground, so);
    if (r.status != StationaryStatus::positive) {
      v.check(false, "alpha %.2f: no positive stationary state", alpha);
      continue;
    }
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t i = 0; i < t.size(); ++i)
      if (t.mask[i]) {
        lo = std::min(lo, r.state[i]);
        hi = std::max(hi, r.state[i]);
      }
    const double per = periodicity_deviation(r.state, t, 0);
    const UniquenessReport u = uniqueness_certificate(op, t.mask, r, ground, 1e-5, so, eig_opts());
    const ShapeRatio sr = shape_ratio(r.state, t, alpha);
    v.check(r.residual <= 1e-5, "alpha %.2f: residual %.2e <= 1e-5", alpha, r.residual);
    v.check(lo >= 0.0 && hi <= 1.0, "alpha %.2f: %.3e <= n+ <= %.6f", alpha, lo, hi);
    v.check(per <= 1e-5, "alpha %.2f: periodicity deviation %.2e <= 1e-5", alpha, per);
    v.check(u.unique && u.max_deviation <= 1e-5, "alpha %.2f: three-start agreement %.2e <= 1e-5", alpha,
            u.max_deviation);
    v.check(sr.c > 0.0 && sr.spread() <= 10.0, "alpha %.2f: shape ratio c %.4f C %.4f spread %.3f <= 10", alpha,
            sr.c, sr.C, sr.spread());
  }
}

Trajectory heat_run(const GridDomain& d, double alpha, double dt, const Reaction& r) {
  const DiscreteFracOp op(d, alpha);
  FracOperatorOnMask m(op, d.mask, 0.0);
  EvolveOptions eo;
  eo.dt = dt;
  eo.T = 1.0;
  eo.snapshot_times = {1.0};
  return evolve(m, make_initial_data(d, {{2.0, 1.0, 0.5}}, d.mask), r, eo);
}

void criterion4(Verdict& v) {
  const GridDomain w = build_domain(fixture(), kWindow, kH);
  const GridDomain w2 = build_domain(fixture(), 2.0 * kWindow, kH);
  for (double alpha : kAlphas) {
    const Field p = heat_run(w, alpha, 0.01, Reaction::none()).snapshots[0];
    const Field p2 = heat_run(w2, alpha, 0.01, Reaction::none()).snapshots[0];
    const KernelRatioReport k1 = kernel_ratio_check(p, w, alpha, 8.0, kWindow / 2.0);
    const KernelRatioReport k2 = kernel_ratio_check(p2, w2, alpha, 8.0, kWindow / 2.0);
    const double drift = kernel_ratio_drift(k1, k2);
    v.check(k1.pass, "alpha %.2f: kernel ratio max/min %.2f <= 50 on 8 <= |x| <= %.0f", alpha, k1.envelope.ratio(),
            kWindow / 2.0);
    v.check(drift <= 0.25, "alpha %.2f: bound drift under window doubling %.2e <= 0.25", alpha, drift);
    const FitReport f = fit_tail_exponent(p, w, alpha, kWindow / 8.0, kWindow / 2.0, 0.1);
    v.check(f.pass, "alpha %.2f: tail exponent %.4f vs %.4f (dev %.2f%%)", alpha, f.slope, f.target,
            100.0 * f.relative_deviation);
  }
}

struct FrontFixture {
  double alpha, half_width, T;
};

// Criteria 5 and 6 share the large-window KPP runs.
void criteria5and6(Verdict& v5, Verdict& v6) {
  {
    FrontTrace trace;
    const double lambda0 = -0.48, c = 0.48 / 2.0;
    for (int s = 0; s <= 40; ++s) {
      trace.times.push_back(0.5 * s);
      trace.R.push_back(2.0 * std::exp(c * 0.5 * s));
    }
    const FitReport f = fit_speed(trace, lambda0, 0.5);
    v5.check(f.relative_deviation <= 1e-10, "synthetic trace: rate recovered to %.2e relative",
             f.relative_deviation);
  }
  const double h = 1.0 / 16.0;
  for (const FrontFixture& fx : {FrontFixture{0.25, 4096.0, 24.0}, FrontFixture{0.5, 2048.0, 28.0},
                                 FrontFixture{0.75, 1024.0, 36.0}}) {
    const GridDomain t = build_domain(fixture(), kTorus, h);
    const DiscreteFracOp top(t, fx.alpha, Exterior::periodic);
    const double lambda0 = principal_eigenpair(FracOperatorOnMask(top, t.mask, -1.0), eig_opts()).value;
    const double cstar = -lambda0 / (1.0 + 2.0 * fx.alpha);
    const GridDomain w = build_domain(fixture(), fx.half_width, h);
    const DiscreteFracOp op(w, fx.alpha);
    FracOperatorOnMask m(op, w.mask, 0.0);
    FrontTracker tracker(w, 0.1, 0.5);
    EvolveOptions eo;
    eo.dt = 0.05;
    eo.T = fx.T;
    for (double s = 0.0; s <= fx.T + 1e-9; s += 0.5) eo.snapshot_times.push_back(s);
    eo.observer = [&](int, double s, std::span<const double> n) { tracker.observe(s, n); };
    const Trajectory traj = evolve(m, make_initial_data(w, {{2.0, 1.0, 0.5}}, w.mask), Reaction::kpp(), eo);
    SpeedFitOptions so;
    so.t_min = 2.0;
    so.r_min = fx.half_width / 16.0;
    so.r_max = fx.half_width / 2.0;
    const FitReport f = fit_speed(tracker.trace(), lambda0, fx.alpha, so);
    v5.check(f.pass, "alpha %.2f (L %.0f, h 1/16): slope %.4f vs |lambda0|/(1+2a) %.4f, dev %.1f%% <= 15%%",
             fx.alpha, fx.half_width, f.slope, f.target, 100.0 * f.relative_deviation);
    const FitReport d = decay_beyond_front(traj, w, 1.5 * cstar, 2.0, fx.half_width / 2.0);
    v6.check(d.pass, "alpha %.2f: kappa = %.4f > 0 beyond e^{Ct}, C = %.4f (%zu snapshots)", fx.alpha, -d.slope,
             1.5 * cstar, d.points);
  }
}

void criterion7(Verdict& v) {
  const double h = 1.0 / 16.0, L = 256.0, T = 20.0;
  for (double alpha : kAlphas) {
    const GridDomain t = build_domain(fixture(), kTorus, h);
    const DiscreteFracOp top(t, alpha, Exterior::periodic);
    const EigenPair ground = principal_eigenpair(FracOperatorOnMask(top, t.mask, -1.0), eig_opts());
    const StationaryResult st = solve_stationary(top, t.mask, ground);
    const double c = 0.5 * (-ground.value) / (1.0 + 2.0 * alpha);
    const GridDomain w = build_domain(fixture(), L, h);
    const Field nplus = periodic_extend(st.state, t, w);
    const DiscreteFracOp op(w, alpha);
    FracOperatorOnMask m(op, w.mask, 0.0);
    std::vector<std::optional<std::size_t>> idx;
    std::vector<std::optional<double>> tmu;
    for (double dt : {0.05, 0.025}) {
      EvolveOptions eo;
      eo.dt = dt;
      eo.T = T;
      for (double s = 0.0; s <= T + 1e-9; s += 0.5) eo.snapshot_times.push_back(s);
      const Trajectory traj = evolve(m, make_initial_data(w, {{2.0, 1.0, 0.5}}, w.mask), Reaction::kpp(), eo);
      const PlateauReport p = plateau_check(traj, nplus, w, 0.5, c, 0.1);
      idx.push_back(p.snapshot);
      tmu.push_back(p.t_mu);
    }
    const bool finite = tmu[0].has_value() && tmu[1].has_value();
    v.check(finite, "alpha %.2f: t_mu = %.2f (dt 0.05), %.2f (dt 0.025) at c = %.4f, mu = 0.1", alpha,
            tmu[0].value_or(NAN), tmu[1].value_or(NAN), c);
    if (finite) {
      const long diff = std::labs(static_cast<long>(*idx[0]) - static_cast<long>(*idx[1]));
      v.check(diff <= 1, "alpha %.2f: t_mu stable under dt halving (%ld snapshot(s) apart)", alpha, diff);
    }
  }
}

void criterion8(Verdict& v) {
  for (double alpha : kAlphas) {
    const BarrierReport b = barrier_check(1.0, alpha, kH);
    v.check(b.pass, "alpha %.2f: barrier C = %.0f, max L psi on annulus %.2e <= 0, c_lower %.3f", alpha, b.C,
            b.max_on_annulus, b.c_lower);
    const KernelLowerBoundReport k = kernel_lower_bound_pieces(1.0, alpha, kH, 1.0 / 256.0);
    v.check(k.pass, "alpha %.2f: w(.,1) >= c_nu phi, mu_nu %.4f, c_nu %.4f, margin %.2e", alpha, k.mu, k.c_nu,
            k.min_margin);
    const ScalingReport s = scaling_check(alpha, 1.0 / 16.0, 2048.0, {1.0, 0.5, 0.25, 0.125});
    v.check(s.pass, "alpha %.2f: scaling constants across a-halvings, worst ratio %.3f <= 1.25", alpha,
            s.worst_ratio);
  }
}

void criterion9(Verdict& v) {
  const double h = 1.0 / 16.0;
  const GridDomain d = build_domain(fixture(), kTorus, h);
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (double alpha : kAlphas) {
    const DiscreteFracOp op(d, alpha);
    FracOperatorOnMask m(op, d.mask, 0.0);
    EvolveOptions eo;
    eo.dt = 0.05;
    eo.T = 2.0;
    eo.snapshot_times = {0.0, 0.5, 1.0, 1.5, 2.0};
    double worst = 0.0;
    for (int p = 0; p < 100; ++p) {
      Field lo(d.size(), 0.0), hi(d.size(), 0.0);
      for (std::size_t i = 0; i < d.size(); ++i) {
        if (!d.mask[i]) continue;
        lo[i] = u01(rng);
        hi[i] = lo[i] + 0.5 * u01(rng);
      }
      worst = std::max(worst, ordering_violation(evolve(m, lo, Reaction::kpp(), eo), evolve(m, hi, Reaction::kpp(), eo)));
    }
    v.check(worst <= 1e-10, "alpha %.2f: 100 ordered pairs, max violation %.2e <= 1e-10", alpha, worst);
  }
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void criterion10(Verdict& v) {
  const fs::path root = fs::temp_directory_path() / "fkpp_acceptance_determinism";
  for (const char* sub : {"eig", "stationary", "evolve", "heat-kernel"}) {
    const fs::path cfg = fs::path(FKPP_CONFIG_DIR) / (std::string(sub) + ".ini");
    const fs::path a = root / sub / "a", b = root / sub / "b";
    fs::remove_all(a);
    fs::remove_all(b);
    std::ostringstream log;
    const int ca = cli::run(sub, cfg, a, {1, 0}, log);
    const int cb = cli::run(sub, cfg, b, {1, 0}, log);
    std::size_t files = 0, same = 0;
    for (const auto& e : fs::directory_iterator(a)) {
      ++files;
      if (fs::exists(b / e.path().filename()) && slurp(e.path()) == slurp(b / e.path().filename())) ++same;
    }
    v.check(ca == cb && files > 0 && files == same, "%s: %zu/%zu artifacts byte-identical (exit %d, %d)", sub, same,
            files, ca, cb);
  }
  fs::remove_all(root);
}

}  // namespace

int main() {
  struct Entry {
    int id;
    const char* title;
    std::function<void(Verdict&)> run;
  };
  Verdict v5, v6;
  bool front_done = false;
  auto front = [&] {
    if (!front_done) criteria5and6(v5, v6);
    front_done = true;
  };
  const std::vector<Entry> entries{
      {1, "operator correctness", criterion1},
      {2, "eigen correctness", criterion2},
      {3, "stationary state", criterion3},
      {4, "heat kernel bounds", criterion4},
      {5, "invasion speed", [&](Verdict& v) { front(); v = v5; }},
      {6, "decay beyond the front", [&](Verdict& v) { front(); v = v6; }},
      {7, "plateau", criterion7},
      {8, "lemma suite", criterion8},
      {9, "comparison principle", criterion9},
      {10, "determinism", criterion10},
  };
  int failures = 0;
  for (const Entry& e : entries) {
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      e.run(v);
    } catch (const std::exception& ex) {
      v.check(false, "exception: %s", ex.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (const std::string& l : v.lines()) std::printf("%s\n", l.c_str());
    std::printf("%s criterion %d: %s (%.1f s)\n", v.pass() ? "PASS" : "FAIL", e.id, e.title, secs);
    std::fflush(stdout);
    if (!v.pass()) ++failures;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(entries.size()) - failures, entries.size());
  return failures == 0 ? 0 : 1;
}
