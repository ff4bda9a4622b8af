#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace fkpp {

using Field = std::vector<double>;
using NodeMask = std::vector<std::uint8_t>;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
};

/// Periodic perforated domain in one dimension: the union over k of
/// (Omega0 + k * period), Omega0 a finite union of open intervals inside one
/// period cell.
class PeriodicGeometry {
 public:
  PeriodicGeometry(double period, std::vector<Interval> base);

  int dimension() const { return 1; }
  double period() const { return period_; }
  const std::vector<Interval>& base() const { return base_; }

  /// Lattice translate a_k.
  double offset(long k) const { return static_cast<double>(k) * period_; }

  /// Smallest interval length and smallest separation between neighbouring
  /// intervals (including across the cell wrap).
  double min_length() const { return min_length_; }
  double min_gap() const { return min_gap_; }
  /// Radius of the uniform interior/exterior ball condition.
  double ball_radius() const { return 0.5 * std::min(0.5 * min_length_, min_gap_); }

  bool contains(double x) const;
  /// dist(x, boundary) for x inside, 0 outside.
  double boundary_distance(double x) const;
  /// dist(x, Omega) for x outside, 0 inside.
  double exterior_distance(double x) const;
  /// Cell index k with x in Omega0 + a_k; meaningless when !contains(x).
  long cell_of(double x) const;

 private:
  double period_;
  std::vector<Interval> base_;
  double min_length_ = 0.0;
  double min_gap_ = 0.0;
};

/// Uniform grid on the half-open window [-L, L) restricted to a periodic
/// geometry. Immutable after construction.
struct GridDomain {
  PeriodicGeometry geometry;
  double half_width = 0.0;
  double spacing = 0.0;
  std::vector<double> x;
  NodeMask mask;
  /// dist(x, boundary of Omega) on masked nodes, 0 elsewhere.
  std::vector<double> delta;
  /// Cell index k of Omega0 + a_k for masked nodes; undefined off-mask.
  std::vector<long> component;

  std::size_t size() const { return x.size(); }
  /// Number of nodes per period.
  std::size_t cell_nodes() const;
  /// Index shift corresponding to one period.
  std::size_t period_shift() const { return cell_nodes(); }
};

GridDomain build_domain(const PeriodicGeometry& geom, double half_width, double spacing);

/// Nodes of Omega_nu = {x in Omega : dist(x, boundary) > nu}.
NodeMask erode(const GridDomain& dom, double nu);

/// Nodes of Omega_{-nu} = {x : dist(x, Omega) < nu}. Throws if the
/// dilation would merge neighbouring components.
NodeMask dilate(const GridDomain& dom, double nu);

/// Mask of the single component Omega0 + a_k.
NodeMask component_mask(const GridDomain& dom, long k);

std::size_t count(const NodeMask& mask);

}  // namespace fkpp
