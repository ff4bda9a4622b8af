#include "fkpp/geometry.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "fkpp/error.hpp"

namespace fkpp {
namespace {

// Relative slack used to decide whether a node sits on a grid-aligned boundary.
constexpr double kBoundaryEps = 1e-9;

bool is_integer_multiple(double value, double unit) {
  const double q = value / unit;
  return std::abs(q - std::round(q)) <= 1e-9 * std::max(1.0, std::abs(q));
}

}  // namespace

PeriodicGeometry::PeriodicGeometry(double period, std::vector<Interval> base)
    : period_(period), base_(std::move(base)) {
  if (!(period_ > 0.0) || !std::isfinite(period_))
    throw InvalidArgument("period must be positive and finite");
  if (base_.empty()) throw InvalidArgument("base component needs at least one interval");
  std::sort(base_.begin(), base_.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  min_length_ = std::numeric_limits<double>::infinity();
  min_gap_ = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < base_.size(); ++i) {
    const Interval& iv = base_[i];
    if (!(iv.hi > iv.lo)) throw InvalidArgument("interval with non-positive length");
    if (iv.lo < 0.0 || iv.hi > period_)
      throw InvalidArgument("base intervals must lie inside [0, period]");
    min_length_ = std::min(min_length_, iv.length());
    const double next_lo = (i + 1 < base_.size()) ? base_[i + 1].lo : base_.front().lo + period_;
    const double gap = next_lo - iv.hi;
    if (!(gap > 0.0))
      throw InvalidArgument("translates of the base component touch or overlap");
    min_gap_ = std::min(min_gap_, gap);
  }
}

bool PeriodicGeometry::contains(double x) const { return boundary_distance(x) > 0.0; }

double PeriodicGeometry::boundary_distance(double x) const {
  const double r = x - std::floor(x / period_) * period_;
  for (const Interval& iv : base_) {
    if (r > iv.lo && r < iv.hi) return std::min(r - iv.lo, iv.hi - r);
  }
  return 0.0;
}

double PeriodicGeometry::exterior_distance(double x) const {
  const double r = x - std::floor(x / period_) * period_;
  double best = std::numeric_limits<double>::infinity();
  for (const Interval& iv : base_) {
    for (int shift = -1; shift <= 1; ++shift) {
      const double lo = iv.lo + shift * period_;
      const double hi = iv.hi + shift * period_;
      if (r > lo && r < hi) return 0.0;
      best = std::min(best, r <= lo ? lo - r : r - hi);
    }
  }
  return best;
}

long PeriodicGeometry::cell_of(double x) const {
  return static_cast<long>(std::floor(x / period_));
}

std::size_t GridDomain::cell_nodes() const {
  return static_cast<std::size_t>(std::llround(geometry.period() / spacing));
}

GridDomain build_domain(const PeriodicGeometry& geom, double half_width, double spacing) {
  if (!(spacing > 0.0)) throw InvalidArgument("grid spacing must be positive");
  const double period = geom.period();
  if (!is_integer_multiple(period, spacing))
    throw InvalidArgument("grid spacing " + std::to_string(spacing) +
                          " does not divide the period " + std::to_string(period));
  if (half_width < period * (1.0 - 1e-12))
    throw InvalidArgument("window half-width smaller than one period");
  if (!is_integer_multiple(half_width, period))
    throw InvalidArgument("window half-width must be a whole number of periods");

  GridDomain dom{geom, half_width, spacing, {}, {}, {}, {}};
  const auto cell = static_cast<long>(std::llround(period / spacing));
  const auto periods = static_cast<long>(std::llround(half_width / period));
  const long n = 2 * periods * cell;
  dom.x.resize(n);
  dom.mask.assign(n, 0);
  dom.delta.assign(n, 0.0);
  dom.component.assign(n, 0);
  const double tol = kBoundaryEps * spacing;
  for (long i = 0; i < n; ++i) {
    // Node i sits at local index i mod cell of cell (i / cell - periods);
    // classify from the local coordinate so that periodicity is exact.
    const long k = i / cell - periods;
    const long local = i % cell;
    const double r = static_cast<double>(local) * spacing;
    dom.x[i] = static_cast<double>(k) * period + r;
    for (const Interval& iv : geom.base()) {
      if (r > iv.lo + tol && r < iv.hi - tol) {
        dom.mask[i] = 1;
        dom.delta[i] = std::min(r - iv.lo, iv.hi - r);
        dom.component[i] = k;
        break;
      }
    }
  }
  return dom;
}

NodeMask erode(const GridDomain& dom, double nu) {
  if (nu < 0.0) throw InvalidArgument("erosion radius must be non-negative");
  NodeMask out(dom.size(), 0);
  for (std::size_t i = 0; i < dom.size(); ++i) out[i] = dom.mask[i] && dom.delta[i] > nu;
  return out;
}

NodeMask dilate(const GridDomain& dom, double nu) {
  if (nu < 0.0) throw InvalidArgument("dilation radius must be non-negative");
  if (nu == 0.0) return dom.mask;
  if (!(2.0 * nu < dom.geometry.min_gap()))
    throw InvalidArgument("dilation by " + std::to_string(nu) +
                          " merges neighbouring components (gap " +
                          std::to_string(dom.geometry.min_gap()) + ")");
  NodeMask out(dom.size(), 0);
  for (std::size_t i = 0; i < dom.size(); ++i) {
    out[i] = dom.mask[i] || dom.geometry.exterior_distance(dom.x[i]) < nu;
  }
  return out;
}

NodeMask component_mask(const GridDomain& dom, long k) {
  NodeMask out(dom.size(), 0);
  for (std::size_t i = 0; i < dom.size(); ++i) out[i] = dom.mask[i] && dom.component[i] == k;
  return out;
}

std::size_t count(const NodeMask& mask) {
  std::size_t c = 0;
  for (auto m : mask) c += m ? 1 : 0;
  return c;
}

}  // namespace fkpp
