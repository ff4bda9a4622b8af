#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <vector>

#include "fkpp/fracop.hpp"
#include "fkpp/geometry.hpp"

namespace fkpp::test {

// Ω0 = (0, 4) inside period 8: the working fixture where (H1) holds.
inline PeriodicGeometry working_geometry() { return PeriodicGeometry(8.0, {{0.0, 4.0}}); }

// Dense matrix of the window operator, built entry by entry from the stencil:
// (Au)_i = D u_i - sum_{j != i} w_{|i-j|} u_j (+ periodic images on a torus).
inline Eigen::MatrixXd dense_matrix(const DiscreteFracOp& op) {
  const std::size_t n = op.size();
  const Stencil& s = op.stencil();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    a(i, i) = s.diagonal();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) a(i, j) = -s.weight(i > j ? i - j : j - i);
  }
  return a;
}

// Dense restriction of `a` to the masked nodes.
inline Eigen::MatrixXd restrict(const Eigen::MatrixXd& a, const NodeMask& mask) {
  std::vector<Eigen::Index> idx;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) idx.push_back(static_cast<Eigen::Index>(i));
  Eigen::MatrixXd r(idx.size(), idx.size());
  for (std::size_t p = 0; p < idx.size(); ++p)
    for (std::size_t q = 0; q < idx.size(); ++q) r(p, q) = a(idx[p], idx[q]);
  return r;
}

inline std::vector<double> random_field(std::size_t n, unsigned seed, double lo = -1.0,
                                        double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

inline double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace fkpp::test
