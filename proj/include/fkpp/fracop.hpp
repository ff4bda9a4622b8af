#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "fkpp/fft.hpp"
#include "fkpp/geometry.hpp"

namespace fkpp {

/// Normalisation C_alpha = 4^a Gamma(d/2 + a) / (pi^(d/2) |Gamma(-a)|).
double calpha(int d, double alpha);

/// Quadrature weights of the one-dimensional fractional Laplacian on a grid
/// of spacing h.
///
/// Far field (|y| > h): the integrand is replaced by its piecewise-linear
/// interpolant, so w_j = C_alpha * integral of hat_j(y) |y|^{-1-2a}. Near field
/// (|y| < h): second-order Taylor expansion with the central second
/// difference, which adds C_alpha h^{-2a} / (2 - 2a) to w_1. The leading
/// interpolation error of the far field is u'' C_alpha h^{2-2a} E(a), local and
/// removed by subtracting C_alpha h^{-2a} E(a) from w_1. All weights are
/// positive and the operator reads (A u)_i = sum_j w_{i-j} (u_i - u_j).
class Stencil {
 public:
  Stencil(double alpha, double spacing);

  double alpha() const { return alpha_; }
  double spacing() const { return h_; }
  double normalization() const { return c_alpha_; }

  /// w_j for j >= 1.
  double weight(std::size_t j) const;
  /// Full-line diagonal D = sum_{j != 0} w_j.
  double diagonal() const { return diagonal_; }
  /// sum_{j >= m0} w_j for m0 >= 1 (closed form).
  double tail_sum(std::size_t m0) const;
  /// w_0..w_{n-1} with w_0 = 0.
  std::vector<double> row(std::size_t n) const;
  /// Weights of a torus of n nodes: sum over all images j = m (mod n),
  /// j != 0, including the self-image entry at m = 0.
  std::vector<double> periodized_row(std::size_t n) const;

  /// Weights of the kernel restricted to |y| < radius (radius >= 2h), index
  /// 0..J with entry 0 unused.
  std::vector<double> truncated_row(double radius) const;
  /// C_alpha * integral over |y| > radius of |y|^{-1-2a}.
  double complement_mass(double radius) const;

 private:
  double scaled(double normalized) const { return scale_ * normalized; }
  double antiderivative(double t) const;        // F with F'' = t^{-1-2a}
  double antiderivative_slope(double t) const;  // F'
  double first_difference(double m) const;      // F(m) - F(m-1), m >= 2
  double normalized_weight(std::size_t j) const;
  double partial_hat(std::size_t j, double lo, double hi) const;

  double alpha_;
  double s_;
  double h_;
  double c_alpha_;
  double scale_;  // C_alpha h^{-2a}
  double diagonal_;
  double defect_;  // E(a)
  std::vector<double> series_;
};

enum class Exterior {
  /// Zero extension beyond the window [-L, L).
  dirichlet,
  /// The window is a torus; the kernel is summed over all images.
  periodic,
};

/// Restricted fractional Laplacian on a GridDomain window. Immutable after
/// assembly; all apply functions are reentrant.
class DiscreteFracOp {
 public:
  DiscreteFracOp(const GridDomain& dom, double alpha, Exterior exterior = Exterior::dirichlet);

  const GridDomain& domain() const { return *domain_; }
  const Stencil& stencil() const { return stencil_; }
  double alpha() const { return stencil_.alpha(); }
  Exterior exterior() const { return exterior_; }
  std::size_t size() const { return n_; }
  const NodeMask& mask() const { return domain_->mask; }

  /// Diagonal entry of the window operator (D minus self images on a torus).
  double diagonal() const { return diag_; }
  /// Weight coupling nodes i and j of the window (i != j).
  double coupling(std::size_t i, std::size_t j) const;
  /// Exterior tail kappa_i: kernel mass beyond the window seen from node i
  /// (zero for a torus).
  double exterior_tail(std::size_t i) const;

  /// A u evaluated at every window node, with u as given (zero beyond the
  /// window or periodic). O(N log N).
  void apply(std::span<const double> u, std::span<double> out) const;
  Field apply(std::span<const double> u) const;

  /// Same as apply() but with the exterior tail dropped, i.e. the sum over
  /// window nodes only: annihilates constants.
  void apply_window_only(std::span<const double> u, std::span<double> out) const;

  /// A restricted to `mask`: u is read only on masked nodes and out is zero
  /// off-mask.
  void apply_masked(std::span<const double> u, const NodeMask& mask, std::span<double> out) const;

  /// Exact inverse of (A + shift I) on the circulant embedding of the
  /// window (the torus itself when periodic). Used as a preconditioner for
  /// masked solves; requires shift > -(smallest symbol value).
  CircularConvolver embedded_inverse(double shift) const;
  /// Length of the embedding used by apply().
  std::size_t embedding_size() const { return conv_.size(); }

 private:
  std::shared_ptr<const GridDomain> domain_;
  Stencil stencil_;
  Exterior exterior_;
  std::size_t n_;
  double diag_;
  std::vector<double> row_;  // coupling weights by index distance
  CircularConvolver conv_;
};

/// Result of the truncated operator L^alpha.
struct TruncatedApply {
  Field value;
  /// C_alpha * integral over |y| > radius of |y|^{-d-2a}.
  double complement_mass = 0.0;
};

/// L^alpha u: the kernel restricted to |y| < radius, evaluated at every node
/// of the op's window with zero extension beyond it.
TruncatedApply apply_truncated(const DiscreteFracOp& op, std::span<const double> u, double radius);

/// Stand-alone truncated operator, used for the Dirichlet problems on balls.
class TruncatedFracOp {
 public:
  TruncatedFracOp(const Stencil& stencil, double radius);
  double radius() const { return radius_; }
  double diagonal() const { return diag_; }
  double complement_mass() const { return complement_; }
  const std::vector<double>& row() const { return row_; }
  /// out_i = sum_j w_{i-j} (u_i - u_j) over the given nodes, zero extension
  /// outside the span.
  void apply(std::span<const double> u, std::span<double> out) const;

 private:
  double radius_;
  double diag_;
  double complement_;
  std::vector<double> row_;
};

}  // namespace fkpp
