#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "fkpp/fracop.hpp"
#include "fkpp/geometry.hpp"

namespace fkpp {

using VectorMap = std::function<void(std::span<const double>, std::span<double>)>;

/// Symmetric operator acting on the masked nodes of a window. Vectors are
/// full window length; entries off the mask are ignored on input and zero
/// on output.
class MaskedOperator {
 public:
  virtual ~MaskedOperator() = default;
  virtual std::size_t size() const = 0;
  virtual const NodeMask& mask() const = 0;
  virtual void apply(std::span<const double> u, std::span<double> out) const = 0;
  virtual double diagonal(std::size_t i) const = 0;
  /// A number guaranteed not to exceed the smallest eigenvalue.
  virtual double lower_bound() const = 0;
  /// Approximate inverse of (op + shift I); symmetric positive definite on
  /// the mask. Default: Jacobi.
  virtual VectorMap preconditioner(double shift) const;
};

/// (A + potential I) restricted to a mask, A the restricted fractional
/// Laplacian. The preconditioner inverts the unmasked operator exactly on
/// the circulant embedding and restricts back to the mask.
class FracOperatorOnMask final : public MaskedOperator {
 public:
  FracOperatorOnMask(const DiscreteFracOp& op, NodeMask mask, double potential = 0.0);

  std::size_t size() const override { return op_->size(); }
  const NodeMask& mask() const override { return mask_; }
  void apply(std::span<const double> u, std::span<double> out) const override;
  double diagonal(std::size_t) const override { return op_->diagonal() + potential_; }
  double lower_bound() const override { return potential_; }
  VectorMap preconditioner(double shift) const override;

  const DiscreteFracOp& op() const { return *op_; }
  double potential() const { return potential_; }

 private:
  const DiscreteFracOp* op_;
  NodeMask mask_;
  double potential_;
};

/// L^alpha (kernel truncated to a ball of given radius) restricted to a mask.
class TruncatedOperatorOnMask final : public MaskedOperator {
 public:
  TruncatedOperatorOnMask(const Stencil& stencil, double radius, NodeMask mask);

  std::size_t size() const override { return mask_.size(); }
  const NodeMask& mask() const override { return mask_; }
  void apply(std::span<const double> u, std::span<double> out) const override;
  double diagonal(std::size_t) const override { return op_.diagonal(); }
  double lower_bound() const override { return 0.0; }

  const TruncatedFracOp& truncated() const { return op_; }

 private:
  TruncatedFracOp op_;
  NodeMask mask_;
};

struct CgOptions {
  double relative_tolerance = 1e-12;
  int max_iterations = 5000;
};

struct CgResult {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Preconditioned conjugate gradients for (op + shift I) x = rhs on the
/// mask. `x` holds the initial guess on entry. Throws SolverError on
/// breakdown (non-positive curvature) or when the iteration cap is hit.
CgResult solve_shifted(const MaskedOperator& op, double shift, std::span<const double> rhs,
                       std::span<double> x, const VectorMap& preconditioner,
                       const CgOptions& options = {});

/// Convenience wrapper holding the preconditioner for repeated solves with
/// one shift.
class ShiftedSolver {
 public:
  ShiftedSolver(const MaskedOperator& op, double shift, CgOptions options = {});
  CgResult solve(std::span<const double> rhs, std::span<double> x) const;
  double shift() const { return shift_; }
  /// Total CG iterations over the solver's lifetime.
  long total_iterations() const { return *total_; }

 private:
  const MaskedOperator* op_;
  double shift_;
  CgOptions options_;
  VectorMap preconditioner_;
  std::shared_ptr<long> total_;
};

double dot_masked(std::span<const double> a, std::span<const double> b, const NodeMask& mask);
double sup_norm(std::span<const double> a);

}  // namespace fkpp
