#include "fkpp/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "fkpp/analysis.hpp"
#include "fkpp/evolution.hpp"
#include "fkpp/io.hpp"
#include "fkpp/spectral.hpp"
#include "fkpp/stationary.hpp"

namespace fkpp::cli {
namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// Collected PASS/FAIL verdicts of one run.
class Checks {
 public:
  void add(const std::string& name, bool pass, Json details = Json::object()) {
    Json entry{{"name", name}, {"pass", pass}};
    for (auto& [k, v] : details.items()) entry[k] = v;
    list_.push_back(std::move(entry));
    all_ = all_ && pass;
  }
  bool all() const { return all_; }
  Json json() const { return list_; }

 private:
  Json list_ = Json::array();
  bool all_ = true;
};

Json fit_json(const FitReport& f) {
  return Json{{"slope", f.slope},       {"intercept", f.intercept},
              {"window_lo", f.window_lo}, {"window_hi", f.window_hi},
              {"points", f.points},     {"rms", f.rms},
              {"target", f.target},     {"relative_deviation", f.relative_deviation}};
}

Json vec_json(const std::vector<double>& v) { return Json(v); }

double finite_or(double v, double fallback) { return std::isfinite(v) ? v : fallback; }

// Everything derived from the config that several subcommands share.
class Lab {
 public:
  Lab(const RunConfig& cfg, const RunOptions& opts, std::ostream& log)
      : cfg_(cfg), opts_(opts), log_(log), geom_(cfg.geometry()) {}

  const RunConfig& cfg() const { return cfg_; }
  const ExperimentBlock& ex() const { return cfg_.experiment; }
  const PeriodicGeometry& geom() const { return geom_; }
  std::ostream& log() { return log_; }
  std::uint64_t seed() const { return opts_.seed; }

  EigenOptions eigen() const {
    EigenOptions o;
    o.tolerance = cfg_.eig_tolerance;
    o.cg.relative_tolerance = cfg_.cg_tolerance;
    return o;
  }
  CgOptions cg() const { return {cfg_.cg_tolerance, 5000}; }
  StationaryOptions stationary() const {
    StationaryOptions o;
    o.K = cfg_.K;
    o.tolerance = cfg_.stationary_tolerance;
    o.cg = cg();
    return o;
  }
  Bump bump() const {
    const Interval& c0 = cfg_.components.front();
    return {ex().number("bump_center", 0.5 * (c0.lo + c0.hi)),
            ex().number("bump_width", 0.25 * c0.length()), ex().number("bump_amplitude", 0.5)};
  }
  Reaction reaction() const {
    const std::string r = ex().text("reaction", "kpp");
    if (r == "heat") return Reaction::none();
    if (r == "linear") return Reaction::linear(ex().number("M", 1.0));
    return Reaction::kpp();
  }
  double exponent() const { return 1.0 + 2.0 * cfg_.alpha; }

  const GridDomain& torus() {
    if (!torus_) torus_ = std::make_unique<GridDomain>(build_domain(geom_, cfg_.torus, cfg_.spacing));
    return *torus_;
  }
  const DiscreteFracOp& torus_op() {
    if (!torus_op_)
      torus_op_ = std::make_unique<DiscreteFracOp>(torus(), cfg_.alpha, Exterior::periodic);
    return *torus_op_;
  }
  const GridDomain& window() {
    if (!window_)
      window_ = std::make_unique<GridDomain>(build_domain(geom_, cfg_.window, cfg_.spacing));
    return *window_;
  }
  const DiscreteFracOp& window_op() {
    if (!window_op_)
      window_op_ = std::make_unique<DiscreteFracOp>(window(), cfg_.alpha, Exterior::dirichlet);
    return *window_op_;
  }
  const H1Report& h1() {
    if (!h1_) {
      log_ << "eig: ground states on the torus (half-width " << cfg_.torus << ")\n";
      h1_ = std::make_unique<H1Report>(check_h1_and_corollary(torus_op(), eigen()));
    }
    return *h1_;
  }
  double speed() { return std::abs(h1().lambda0) / exponent(); }

  // Positive stationary state on the torus (nullptr when only n = 0 exists).
  const StationaryResult& stationary_state() {
    if (!stationary_) {
      log_ << "stationary: monotone iteration on the torus\n";
      stationary_ = std::make_unique<StationaryResult>(
          solve_stationary(torus_op(), torus().mask, h1().ground, stationary()));
    }
    return *stationary_;
  }

  Trajectory run_window(const Reaction& reaction, double dt, double T,
                        const std::vector<double>& snaps,
                        std::function<void(int, double, std::span<const double>)> observer = {}) {
    FracOperatorOnMask masked(window_op(), window().mask, 0.0);
    const Field n0 = make_initial_data(window(), {bump()}, window().mask);
    EvolveOptions eo;
    eo.dt = dt;
    eo.T = T;
    eo.snapshot_times = snaps;
    eo.cg = cg();
    eo.observer = std::move(observer);
    return evolve(masked, n0, reaction, eo);
  }

 private:
  const RunConfig& cfg_;
  RunOptions opts_;
  std::ostream& log_;
  PeriodicGeometry geom_;
  std::unique_ptr<GridDomain> torus_, window_;
  std::unique_ptr<DiscreteFracOp> torus_op_, window_op_;
  std::unique_ptr<H1Report> h1_;
  std::unique_ptr<StationaryResult> stationary_;
};

std::vector<double> mask_as_double(const NodeMask& m) { return {m.begin(), m.end()}; }

// ---------------------------------------------------------------- eig
Json section_eig(Lab& lab, Checks& checks, const fs::path& out) {
  const H1Report& h1 = lab.h1();
  const EigenOptions eo = lab.eigen();
  Json j;
  j["h1"] = to_string(h1.status);
  j["lambda1"] = h1.lambda1;
  j["lambda0"] = h1.lambda0;
  j["lambda0_residual"] = h1.ground.residual;
  j["lambda1_residual"] = h1.single.residual;
  j["predicted_speed"] = h1.predicted_speed;
  j["corollary_holds"] = h1.corollary_holds;
  checks.add("lambda0 <= lambda1", h1.ordered, {{"lambda0", h1.lambda0}, {"lambda1", h1.lambda1}});
  checks.add("corollary: lambda1 < 0 implies lambda0 < 0", h1.corollary_holds);
  checks.add("eigen residuals", h1.ground.residual <= eo.tolerance && h1.single.residual <= eo.tolerance,
             {{"lambda0", h1.ground.residual}, {"lambda1", h1.single.residual}});

  FracOperatorOnMask masked(lab.torus_op(), lab.torus().mask, -1.0);
  const int restarts = static_cast<int>(lab.ex().number("restarts", 5));
  if (restarts > 0) {
    const SimplicityReport s = simplicity_check(masked, h1.ground, eo, lab.seed(), restarts);
    checks.add("simplicity proxy (random positive restarts)", s.simple,
               {{"values", s.values}, {"max_deviation", s.max_deviation}});
  }

  // Window doubling of the torus and the Dirichlet-window diagnostic.
  {
    const GridDomain twice = build_domain(lab.geom(), 2.0 * lab.cfg().torus, lab.cfg().spacing);
    const DiscreteFracOp op2(twice, lab.cfg().alpha, Exterior::periodic);
    FracOperatorOnMask m2(op2, twice.mask, -1.0);
    const double lam2 = principal_eigenpair(m2, eo).value;
    const double delta = std::abs(lam2 - h1.lambda0);
    checks.add("lambda0 stable under window doubling", delta <= 1e-4,
               {{"lambda0_L", h1.lambda0}, {"lambda0_2L", lam2}, {"difference", delta}});
  }
  if (lab.ex().flag("window_diagnostic", true)) {
    FracOperatorOnMask mw(lab.window_op(), lab.window().mask, -1.0);
    const double lw = principal_eigenpair(mw, eo).value;
    j["lambda0_dirichlet_window"] = lw;
    j["dirichlet_window_half_width"] = lab.cfg().window;
  }

  const SweepResult sweep =
      eigen_sweep(lab.torus_op(), lab.ex().numbers("nu_list", {-0.1, -0.05, 0.0, 0.05, 0.1}), eo);
  Json entries = Json::array();
  for (const SweepEntry& e : sweep.entries)
    entries.push_back({{"nu", e.nu}, {"lambda", e.value}, {"nodes", e.nodes}});
  j["sweep"] = entries;
  j["r0"] = sweep.r0;
  checks.add("eigen_sweep monotone nondecreasing in nu", sweep.monotone);

  const GridDomain& t = lab.torus();
  const std::vector<double> mask = mask_as_double(t.mask);
  write_csv(out / "phi0.csv", lab.cfg().hash,
            {{"x [length]", t.x}, {"mask [-]", mask}, {"delta [length]", t.delta},
             {"phi0 [-]", h1.ground.vector}});
  return j;
}

// ---------------------------------------------------------- stationary
Json section_stationary(Lab& lab, Checks& checks, const fs::path& out) {
  const H1Report& h1 = lab.h1();
  const StationaryResult& st = lab.stationary_state();
  const double tol = lab.cfg().stationary_tolerance;
  Json j;
  j["status"] = to_string(st.status);
  j["h1"] = to_string(h1.status);
  j["iterations"] = st.bracket.iterations;
  j["gap"] = st.bracket.gap;
  j["residual"] = st.residual;
  j["epsilon"] = st.epsilon;
  const GridDomain& t = lab.torus();
  const std::vector<double> mask = mask_as_double(t.mask);
  write_csv(out / "stationary.csv", lab.cfg().hash,
            {{"x [length]", t.x}, {"mask [-]", mask}, {"delta [length]", t.delta},
             {"n_plus [-]", st.state}, {"lower [-]", st.bracket.lower},
             {"upper [-]", st.bracket.upper}});
  if (st.status != StationaryStatus::positive) {
    // Classified outcome, not a failure: without (H1) n = 0 is the only state.
    checks.add("(H1) classification consistent with stationary outcome",
               h1.status == H1Status::fails || h1.lambda0 >= 0.0);
    return j;
  }
  bool gap_monotone = true;
  for (std::size_t i = 1; i < st.bracket.gap_history.size(); ++i)
    gap_monotone = gap_monotone && st.bracket.gap_history[i] <= st.bracket.gap_history[i - 1] + 1e-12;
  checks.add("bracket gap nonincreasing", gap_monotone);
  checks.add("stationary residual <= 10 tol", st.residual <= 10.0 * tol, {{"residual", st.residual}});
  double lo = INFINITY, hi = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t.mask[i]) {
      lo = std::min(lo, st.state[i]);
      hi = std::max(hi, st.state[i]);
    }
  checks.add("0 <= n_plus <= 1 - 1e-6", lo >= 0.0 && hi <= 1.0 - 1e-6, {{"min", lo}, {"max", hi}});
  const double per = periodicity_deviation(st.state, t, 0);
  const UniquenessReport u =
      uniqueness_certificate(lab.torus_op(), t.mask, st, h1.ground, 10.0 * tol, lab.stationary(),
                             lab.eigen());
  const double per_single = periodicity_deviation(u.single_start_state, t, 0);
  checks.add("periodicity of n_plus", std::max(per, per_single) <= 10.0 * tol,
             {{"deviation", per}, {"deviation_single_component_start", per_single}});
  checks.add("uniqueness across starts", u.unique,
             {{"epsilons", u.epsilons}, {"deviations", u.deviations}});
  checks.add("fixed points sandwiched by the bracket", u.sandwiched);
  const ShapeRatio sr = shape_ratio(st.state, t, lab.cfg().alpha);
  const ShapeRatio sp = shape_ratio(h1.ground.vector, t, lab.cfg().alpha);
  const double spread_limit = lab.ex().number("shape_spread", 10.0);
  checks.add("shape ratio n_plus / delta^alpha bounded", sr.spread() <= spread_limit,
             {{"c", sr.c}, {"C", sr.C}, {"spread", sr.spread()}});
  checks.add("shape ratio phi0 / delta^alpha bounded", sp.spread() <= spread_limit,
             {{"c", sp.c}, {"C", sp.C}, {"spread", sp.spread()}});
  j["periodicity_deviation"] = per;
  j["uniqueness_max_deviation"] = u.max_deviation;
  j["shape"] = {{"c", sr.c}, {"C", sr.C}};
  return j;
}

// -------------------------------------------------------------- evolve
Json section_evolve(Lab& lab, Checks& checks, const fs::path& out) {
  const Reaction reaction = lab.reaction();
  const Trajectory traj = lab.run_window(reaction, lab.cfg().dt, lab.cfg().T, lab.cfg().snapshots);
  const GridDomain& w = lab.window();
  Json j;
  j["reaction"] = reaction.tag();
  j["scheme"] = traj.scheme;
  j["dt"] = traj.dt;
  j["cg_iterations"] = traj.cg_iterations;
  Json snaps = Json::array();
  std::vector<double> mass;
  const int width = 8;
  for (std::size_t s = 0; s < traj.snapshots.size(); ++s) {
    const Field& n = traj.snapshots[s];
    double m = 0.0, mx = 0.0;
    for (double v : n) {
      m += v * w.spacing;
      mx = std::max(mx, v);
    }
    mass.push_back(m);
    char name[64];
    std::snprintf(name, sizeof name, "snap_%0*d.csv", width, traj.steps[s]);
    write_csv(out / name, lab.cfg().hash, {{"x [length]", w.x}, {"n [-]", n}});
    snaps.push_back({{"step", traj.steps[s]}, {"time", traj.times[s]}, {"file", name},
                     {"mass", m}, {"max", mx}});
  }
  j["snapshots"] = snaps;
  if (reaction.kind == ReactionKind::none || reaction.kind == ReactionKind::linear) {
    bool nonincreasing = true;
    for (std::size_t s = 1; s < mass.size(); ++s)
      nonincreasing = nonincreasing && mass[s] <= mass[s - 1] * (1.0 + 1e-12);
    checks.add("total mass nonincreasing", nonincreasing);
  }
  checks.add("trajectory finished", true, {{"snapshots", traj.snapshots.size()}});
  return j;
}

// --------------------------------------------------------- heat-kernel
Json section_heat_kernel(Lab& lab, Checks& checks, const fs::path& out) {
  const RunConfig& cfg = lab.cfg();
  const double L = cfg.window;
  const double alpha = cfg.alpha;
  const double r_lo = lab.ex().number("ratio_lo", cfg.period);
  const double limit = lab.ex().number("ratio_limit", 50.0);
  const double tail_lo = lab.ex().number("tail_lo", L / 8.0);
  const double tail_hi = lab.ex().number("tail_hi", L / 2.0);
  const double tail_tol = lab.ex().number("tail_tolerance", 0.1);

  lab.log() << "heat-kernel: heat run to t = 1 on the window\n";
  const Trajectory heat = lab.run_window(Reaction::none(), cfg.dt, 1.0, {1.0});
  const Field& p = heat.snapshots.back();
  const KernelRatioReport k1 = kernel_ratio_check(p, lab.window(), alpha, r_lo, L / 2.0, limit);

  lab.log() << "heat-kernel: doubled window\n";
  const GridDomain wide = build_domain(lab.geom(), 2.0 * L, cfg.spacing);
  const DiscreteFracOp wide_op(wide, alpha, Exterior::dirichlet);
  FracOperatorOnMask wide_masked(wide_op, wide.mask, 0.0);
  EvolveOptions eo;
  eo.dt = cfg.dt;
  eo.T = 1.0;
  eo.snapshot_times = {1.0};
  eo.cg = lab.cg();
  const Trajectory heat2 =
      evolve(wide_masked, make_initial_data(wide, {lab.bump()}, wide.mask), Reaction::none(), eo);
  const KernelRatioReport k2 =
      kernel_ratio_check(heat2.snapshots.back(), wide, alpha, r_lo, L / 2.0, limit);
  const double drift = kernel_ratio_drift(k1, k2);
  const double drift_limit = lab.ex().number("ratio_drift", 0.25);
  const TailEnvelope full = prepared_tails(p, lab.window(), alpha, L / 2.0);

  checks.add("kernel ratio max/min within limit", k1.pass,
             {{"c_m", k1.envelope.c_m}, {"c_M", k1.envelope.c_M}, {"ratio", k1.envelope.ratio()},
              {"limit", limit}, {"band", {r_lo, L / 2.0}}, {"nodes", k1.envelope.nodes},
              {"ratio_including_source_cell", full.ratio()}});
  checks.add("kernel ratio bounds stable under window doubling", drift <= drift_limit,
             {{"c_m_2L", k2.envelope.c_m}, {"c_M_2L", k2.envelope.c_M}, {"drift", drift}});

  const FitReport tail = fit_tail_exponent(p, lab.window(), alpha, tail_lo, tail_hi, tail_tol);
  checks.add("tail exponent -(d + 2 alpha) (heat)", tail.pass, fit_json(tail));
  write_csv(out / "tail_fit.csv", cfg.hash,
            {{"log_abs_a_k [-]", tail.xs}, {"log_max_p [-]", tail.ys}});
  write_csv(out / "p1.csv", cfg.hash, {{"x [length]", lab.window().x}, {"p [-]", p}});

  lab.log() << "heat-kernel: kpp run to t = 1\n";
  const Trajectory kpp = lab.run_window(Reaction::kpp(), cfg.dt, 1.0, {1.0});
  const Field& n1 = kpp.snapshots.back();
  const FitReport tail_kpp = fit_tail_exponent(n1, lab.window(), alpha, tail_lo, tail_hi, tail_tol);
  checks.add("tail exponent -(d + 2 alpha) (kpp)", tail_kpp.pass, fit_json(tail_kpp));
  const TailEnvelope env_kpp = prepared_tails(n1, lab.window(), alpha, L / 2.0, r_lo);
  double below = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) below = std::max(below, p[i] - n1[i]);
  checks.add("kpp dominates heat at t = 1 (c_m ordering)",
             below <= 1e-10 && env_kpp.c_m >= k1.envelope.c_m,
             {{"c_m_kpp", env_kpp.c_m}, {"c_m_heat", k1.envelope.c_m}, {"max_heat_minus_kpp", below}});
  return Json{{"c_m", k1.envelope.c_m}, {"c_M", k1.envelope.c_M}, {"tail_slope", tail.slope}};
}

// --------------------------------------------------------- front-speed
Json section_front(Lab& lab, Checks& checks, const fs::path& out) {
  const RunConfig& cfg = lab.cfg();
  const double L = cfg.window;
  const double lambda0 = lab.h1().lambda0;
  if (!(lambda0 < 0.0)) {
    checks.add("invasion requires lambda0 < 0", false, {{"lambda0", lambda0}});
    return Json{{"lambda0", lambda0}};
  }
  const double cstar = lab.speed();
  const double level = lab.ex().number("level", 0.1);
  const double nu = lab.ex().number("nu", 0.5);
  FrontTracker tracker(lab.window(), level, nu);
  lab.log() << "front-speed: kpp run on the window to T = " << cfg.T << "\n";
  const Trajectory traj = lab.run_window(
      Reaction::kpp(), cfg.dt, cfg.T, cfg.snapshots,
      [&](int, double t, std::span<const double> n) { tracker.observe(t, n); });
  const FrontTrace& trace = tracker.trace();

  SpeedFitOptions so;
  so.t_min = lab.ex().number("t_min", 2.0);
  so.r_min = lab.ex().number("fit_lo", L / 16.0);
  so.r_max = lab.ex().number("fit_hi", L / 2.0);
  so.tolerance = lab.ex().number("speed_tolerance", 0.15);
  Json j{{"lambda0", lambda0}, {"predicted_speed", cstar}};
  try {
    const FitReport fit = fit_speed(trace, lambda0, cfg.alpha, so);
    checks.add("invasion speed", fit.pass, fit_json(fit));
  } catch (const InvalidArgument& e) {
    checks.add("invasion speed", false, {{"error", e.what()}});
  }
  const std::optional<double> nest = nesting_violation(trace, 1.0);
  checks.add("invaded sets nested after t = 1", !nest.has_value(),
             {{"first_violation", nest ? Json(*nest) : Json(nullptr)}});

  std::vector<double> counts;
  for (const auto& inv : trace.invaded) counts.push_back(static_cast<double>(inv.size()));
  write_csv(out / "front.csv", cfg.hash,
            {{"t [time]", trace.times}, {"R [length]", trace.R}, {"invaded [count]", counts}});

  const double C = lab.ex().number("decay_rate", 1.5) * cstar;
  try {
    const FitReport decay = decay_beyond_front(traj, lab.window(), C, so.t_min, L / 2.0);
    checks.add("decay beyond e^{Ct} (kappa > 0)", decay.pass,
               {{"kappa", -decay.slope}, {"C", C}, {"fit", fit_json(decay)}});
  } catch (const InvalidArgument& e) {
    checks.add("decay beyond e^{Ct} (kappa > 0)", false, {{"error", e.what()}});
  }

  const StationaryResult& st = lab.stationary_state();
  if (st.status == StationaryStatus::positive) {
    const Field nplus = periodic_extend(st.state, lab.torus(), lab.window());
    const double c = lab.ex().number("plateau_rate", 0.5) * cstar;
    const double mu = lab.ex().number("mu", 0.1);
    const PlateauReport pl = plateau_check(traj, nplus, lab.window(), nu, c, mu);
    checks.add("plateau reached (finite t_mu)", pl.t_mu.has_value(),
               {{"t_mu", pl.t_mu ? Json(*pl.t_mu) : Json(nullptr)}, {"c", c}, {"mu", mu}});
    if (pl.t_mu && lab.ex().flag("plateau_dt_halving", false)) {
      lab.log() << "front-speed: rerun with dt / 2 for plateau stability\n";
      const Trajectory half = lab.run_window(Reaction::kpp(), 0.5 * cfg.dt, cfg.T, cfg.snapshots);
      const PlateauReport p2 = plateau_check(half, nplus, lab.window(), nu, c, mu);
      const bool stable =
          p2.snapshot && std::abs(static_cast<long>(*p2.snapshot) - static_cast<long>(*pl.snapshot)) <= 1;
      checks.add("plateau time stable under dt halving", stable,
                 {{"t_mu_dt", *pl.t_mu}, {"t_mu_dt_half", p2.t_mu ? Json(*p2.t_mu) : Json(nullptr)}});
    }
  }
  return j;
}

// -------------------------------------------------------------- verify
Json section_lemmas(Lab& lab, Checks& checks) {
  const RunConfig& cfg = lab.cfg();
  const double nu_b = lab.ex().number("barrier_nu", 1.0);
  const BarrierReport b = barrier_check(nu_b, cfg.alpha, cfg.spacing);
  checks.add("barrier (L psi <= 0 on the annulus)", b.pass,
             {{"C", b.C}, {"max_on_annulus", b.max_on_annulus}, {"c_lower", b.c_lower},
              {"max_inner", b.max_inner}});
  const KernelLowerBoundReport k =
      kernel_lower_bound_pieces(nu_b, cfg.alpha, cfg.spacing, lab.ex().number("lemma_dt", 1.0 / 256.0));
  checks.add("kernel lower bound w(.,1) >= c_nu phi", k.pass,
             {{"mu_nu", k.mu}, {"c_nu", k.c_nu}, {"min_margin", k.min_margin},
              {"at", k.margin_location}, {"monotone_in_time", k.monotone_in_time},
              {"below_t", k.below_t}});
  const ScalingReport s = scaling_check(cfg.alpha, lab.ex().number("scaling_spacing", 1.0 / 16.0),
                                        lab.ex().number("scaling_half_width", 2048.0),
                                        {1.0, 0.5, 0.25, 0.125});
  checks.add("scaling bound across a-halvings", s.pass,
             {{"a", s.a}, {"constants", s.constants}, {"worst_ratio", s.worst_ratio}});
  return Json{{"barrier_C", b.C}, {"mu_nu", k.mu}};
}

Json section_comparison(Lab& lab, Checks& checks) {
  const RunConfig& cfg = lab.cfg();
  const int pairs = static_cast<int>(lab.ex().number("comparison_pairs", 10));
  if (pairs == 0) return Json::object();
  const double T = lab.ex().number("comparison_T", 2.0);
  const GridDomain dom = build_domain(lab.geom(), cfg.torus, cfg.spacing);
  const DiscreteFracOp op(dom, cfg.alpha, Exterior::dirichlet);
  FracOperatorOnMask masked(op, dom.mask, 0.0);
  std::mt19937_64 rng(lab.seed());
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  EvolveOptions eo;
  eo.dt = cfg.dt;
  eo.T = T;
  eo.cg = lab.cg();
  for (double t = 0.0; t <= T + 1e-12; t += 0.5) eo.snapshot_times.push_back(t);
  double worst = 0.0;
  for (int p = 0; p < pairs; ++p) {
    Field lo(dom.size(), 0.0), hi(dom.size(), 0.0);
    for (std::size_t i = 0; i < dom.size(); ++i) {
      if (!dom.mask[i]) continue;
      lo[i] = unif(rng);
      hi[i] = lo[i] + 0.5 * unif(rng);
    }
    const Trajectory a = evolve(masked, lo, Reaction::kpp(), eo);
    const Trajectory b = evolve(masked, hi, Reaction::kpp(), eo);
    worst = std::max(worst, ordering_violation(a, b));
  }
  checks.add("comparison principle on ordered pairs", worst <= 1e-10,
             {{"pairs", pairs}, {"max_violation", worst}});
  return Json{{"max_violation", worst}};
}

Json section_envelope(Lab& lab, Checks& checks, const fs::path& out) {
  const RunConfig& cfg = lab.cfg();
  const double nu = lab.ex().number("nu", 0.5);
  const EigenOptions eo = lab.eigen();
  const EigenPair pn = eroded_eigenpair(lab.torus_op(), nu, eo);
  const EigenPair pm = eroded_eigenpair(lab.torus_op(), -nu, eo);
  lab.log() << "verify: kpp run for the envelope check\n";
  const Trajectory traj = lab.run_window(Reaction::kpp(), cfg.dt, cfg.T, cfg.snapshots);
  std::size_t at1 = traj.times.size();
  for (std::size_t s = 0; s < traj.times.size(); ++s)
    if (std::abs(traj.times[s] - 1.0) < 0.5 * cfg.dt) at1 = s;
  if (at1 == traj.times.size()) {
    checks.add("envelope check", false, {{"error", "no snapshot at t = 1"}});
    return Json::object();
  }
  const TailEnvelope env = prepared_tails(traj.snapshots[at1], lab.window(), cfg.alpha, cfg.window);
  EnvelopeInputs in;
  in.alpha = cfg.alpha;
  in.nu = nu;
  in.epsilon = lab.ex().number("epsilon", 0.05);
  in.lambda_nu = pn.value;
  in.lambda_minus_nu = pm.value;
  in.c_m = env.c_m;
  in.c_M = env.c_M;
  in.cm_scale = lab.ex().number("cm_scale", 1.0);
  const EnvelopeReport rep =
      envelope_check(traj, lab.window(), periodic_extend(pn.vector, lab.torus(), lab.window()),
                     periodic_extend(pm.vector, lab.torus(), lab.window()), in);
  checks.add("prepared data: c_m > 0 and c_M finite", env.c_m > 0.0 && std::isfinite(env.c_M),
             {{"c_m", env.c_m}, {"c_M", env.c_M}});
  checks.add("lower envelope respected", rep.max_lower == 0.0,
             {{"C_m", rep.C_m}, {"max_violation", rep.max_lower}, {"cm_scale", in.cm_scale}});
  checks.add("upper envelope respected", rep.max_upper == 0.0,
             {{"C_M", rep.C_M}, {"max_violation", rep.max_upper}});
  write_csv(out / "envelope.csv", cfg.hash,
            {{"t [time]", rep.times}, {"lower_violation [-]", rep.lower_violation},
             {"upper_violation [-]", rep.upper_violation}});
  return Json{{"lambda_nu", pn.value}, {"lambda_minus_nu", pm.value}, {"C_m", rep.C_m},
              {"C_M", finite_or(rep.C_M, -1.0)}};
}

int dispatch(const std::string& sub, Lab& lab, const fs::path& out) {
  Checks checks;
  Json body;
  body["subcommand"] = sub;
  body["alpha"] = lab.cfg().alpha;
  if (sub == "eig") {
    body["eig"] = section_eig(lab, checks, out);
  } else if (sub == "stationary") {
    body["stationary"] = section_stationary(lab, checks, out);
  } else if (sub == "evolve") {
    body["evolve"] = section_evolve(lab, checks, out);
  } else if (sub == "heat-kernel") {
    body["heat_kernel"] = section_heat_kernel(lab, checks, out);
  } else if (sub == "front-speed") {
    body["front_speed"] = section_front(lab, checks, out);
  } else {
    body["eig"] = section_eig(lab, checks, out);
    body["stationary"] = section_stationary(lab, checks, out);
    body["heat_kernel"] = section_heat_kernel(lab, checks, out);
    body["envelope"] = section_envelope(lab, checks, out);
    body["lemmas"] = section_lemmas(lab, checks);
    body["comparison"] = section_comparison(lab, checks);
    if (lab.ex().flag("include_front", false)) body["front_speed"] = section_front(lab, checks, out);
  }
  body["checks"] = checks.json();
  body["verdict"] = checks.all() ? "PASS" : "FAIL";
  const std::string name = (sub == "heat-kernel" ? "heat_kernel" : sub == "front-speed" ? "front_speed" : sub);
  write_json(out / (name + ".json"), lab.cfg().hash, body);
  for (const Json& c : body["checks"])
    lab.log() << (c["pass"].get<bool>() ? "PASS " : "FAIL ") << c["name"].get<std::string>() << "\n";
  return checks.all() ? kPass : kCheckFail;
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> s{"eig",         "stationary",  "evolve",
                                          "heat-kernel", "front-speed", "verify"};
  return s;
}

int run(const std::string& subcommand, const RunConfig& config, const fs::path& out_dir,
        const RunOptions& options, std::ostream& log) {
  const auto& subs = subcommands();
  if (std::find(subs.begin(), subs.end(), subcommand) == subs.end()) {
    log << "error: unknown subcommand '" << subcommand << "'\n";
    return kInvalidConfig;
  }
  if (options.threads < 1) {
    log << "error: --threads must be at least 1\n";
    return kInvalidConfig;
  }
  try {
    fs::create_directories(out_dir);
    Lab lab(config, options, log);
    return dispatch(subcommand, lab, out_dir);
  } catch (const SolverError& e) {
    log << "solver failure: " << e.what() << " (last residual " << e.last_residual() << ")\n";
    return kSolverFailure;
  } catch (const std::exception& e) {
    log << "failure: " << e.what() << "\n";
    return kSolverFailure;
  }
}

int run(const std::string& subcommand, const fs::path& config_path, const fs::path& out_dir,
        const RunOptions& options, std::ostream& log) {
  RunConfig config;
  try {
    config = load_config(config_path);
  } catch (const ConfigError& e) {
    log << "invalid config: " << e.what() << "\n";
    return kInvalidConfig;
  }
  return run(subcommand, config, out_dir, options, log);
}

}  // namespace fkpp::cli
