#include "fkpp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fkpp/error.hpp"

namespace fkpp {

VectorMap MaskedOperator::preconditioner(double shift) const {
  return [this, shift](std::span<const double> r, std::span<double> z) {
    const NodeMask& m = mask();
    for (std::size_t i = 0; i < r.size(); ++i) z[i] = m[i] ? r[i] / (diagonal(i) + shift) : 0.0;
  };
}

FracOperatorOnMask::FracOperatorOnMask(const DiscreteFracOp& op, NodeMask mask, double potential)
    : op_(&op), mask_(std::move(mask)), potential_(potential) {
  if (mask_.size() != op.size()) throw InvalidArgument("mask size does not match operator");
}

void FracOperatorOnMask::apply(std::span<const double> u, std::span<double> out) const {
  op_->apply_masked(u, mask_, out);
  if (potential_ != 0.0) {
    for (std::size_t i = 0; i < out.size(); ++i)
      if (mask_[i]) out[i] += potential_ * u[i];
  }
}

VectorMap FracOperatorOnMask::preconditioner(double shift) const {
  // Keep the embedded symbol safely positive even for negative shifts used
  // by the eigensolver; the preconditioner only needs to be SPD.
  const double total = std::max(potential_ + shift, 1e-2);
  auto inverse = std::make_shared<CircularConvolver>(op_->embedded_inverse(total));
  const NodeMask* m = &mask_;
  return [inverse, m](std::span<const double> r, std::span<double> z) {
    Field tmp(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) tmp[i] = (*m)[i] ? r[i] : 0.0;
    inverse->convolve(tmp, z);
    for (std::size_t i = 0; i < z.size(); ++i)
      if (!(*m)[i]) z[i] = 0.0;
  };
}

TruncatedOperatorOnMask::TruncatedOperatorOnMask(const Stencil& stencil, double radius,
                                                 NodeMask mask)
    : op_(stencil, radius), mask_(std::move(mask)) {}

void TruncatedOperatorOnMask::apply(std::span<const double> u, std::span<double> out) const {
  Field tmp(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) tmp[i] = mask_[i] ? u[i] : 0.0;
  op_.apply(tmp, out);
  for (std::size_t i = 0; i < out.size(); ++i)
    if (!mask_[i]) out[i] = 0.0;
}

double dot_masked(std::span<const double> a, std::span<const double> b, const NodeMask& mask) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (mask[i]) s += a[i] * b[i];
  return s;
}

double sup_norm(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

CgResult solve_shifted(const MaskedOperator& op, double shift, std::span<const double> rhs,
                       std::span<double> x, const VectorMap& preconditioner,
                       const CgOptions& options) {
  const std::size_t n = op.size();
  const NodeMask& mask = op.mask();
  if (rhs.size() != n || x.size() != n) throw InvalidArgument("CG operand size mismatch");
  Field r(n), z(n), p(n), q(n);
  for (std::size_t i = 0; i < n; ++i)
    if (!mask[i]) x[i] = 0.0;
  op.apply(x, q);
  for (std::size_t i = 0; i < n; ++i) r[i] = mask[i] ? rhs[i] - q[i] - shift * x[i] : 0.0;
  const double bnorm = std::sqrt(dot_masked(rhs, rhs, mask));
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return {0, 0.0};
  }
  double rnorm = std::sqrt(dot_masked(r, r, mask));
  if (rnorm <= options.relative_tolerance * bnorm) return {0, rnorm / bnorm};
  preconditioner(r, z);
  p = z;
  double rz = dot_masked(r, z, mask);
  for (int it = 1; it <= options.max_iterations; ++it) {
    op.apply(p, q);
    for (std::size_t i = 0; i < n; ++i)
      if (mask[i]) q[i] += shift * p[i];
    const double curvature = dot_masked(p, q, mask);
    if (!(curvature > 0.0))
      throw SolverError("conjugate gradients: non-positive curvature (operator not SPD)",
                        rnorm / bnorm);
    const double step = rz / curvature;
    for (std::size_t i = 0; i < n; ++i) {
      if (!mask[i]) continue;
      x[i] += step * p[i];
      r[i] -= step * q[i];
    }
    rnorm = std::sqrt(dot_masked(r, r, mask));
    if (rnorm <= options.relative_tolerance * bnorm) return {it, rnorm / bnorm};
    preconditioner(r, z);
    const double rz_new = dot_masked(r, z, mask);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = mask[i] ? z[i] + beta * p[i] : 0.0;
  }
  throw SolverError("conjugate gradients: no convergence after " +
                        std::to_string(options.max_iterations) + " iterations",
                    rnorm / bnorm);
}

ShiftedSolver::ShiftedSolver(const MaskedOperator& op, double shift, CgOptions options)
    : op_(&op),
      shift_(shift),
      options_(options),
      preconditioner_(op.preconditioner(shift)),
      total_(std::make_shared<long>(0)) {}

CgResult ShiftedSolver::solve(std::span<const double> rhs, std::span<double> x) const {
  CgResult res = solve_shifted(*op_, shift_, rhs, x, preconditioner_, options_);
  *total_ += res.iterations;
  return res;
}

}  // namespace fkpp
