#include <gtest/gtest.h>

#include <cmath>

#include "fkpp/error.hpp"
#include "fkpp/spectral.hpp"
#include "support.hpp"

namespace fkpp {
namespace {

double dense_ground_energy(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

TEST(PrincipalEigenpair, SingleComponentMatchesDenseOracle) {
  // Omega0 = (0, 1), alpha = 1/2, h = 1/512: 511 interior nodes.
  const PeriodicGeometry g(2.0, {{0.0, 1.0}});
  const double h = 1.0 / 512.0;
  const EigenPair p = single_component_eigenpair(g, 0.5, h);
  const GridDomain d = build_domain(g, 2.0, h);
  const DiscreteFracOp op(d, 0.5);
  const NodeMask m = component_mask(d, 0);
  ASSERT_EQ(count(m), 511u);
  Eigen::MatrixXd a = test::restrict(test::dense_matrix(op), m);
  a.diagonal().array() -= 1.0;
  EXPECT_NEAR(p.value, dense_ground_energy(a), 1e-8);
  EXPECT_LE(p.residual, 1e-10);
}

TEST(PrincipalEigenpair, GroundStateIsPositiveAndNormalised) {
  const GridDomain d = build_domain(test::working_geometry(), 32.0, 1.0 / 32.0);
  const DiscreteFracOp op(d, 0.5, Exterior::periodic);
  FracOperatorOnMask a(op, d.mask, -1.0);
  const EigenPair p = principal_eigenpair(a);
  EXPECT_LE(p.residual, 1e-10);
  EXPECT_NEAR(eigen_residual(a, p.vector, p.value), p.residual, 1e-12);
  double mx = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_GE(p.vector[i], 0.0);
    if (!d.mask[i]) EXPECT_EQ(p.vector[i], 0.0);
    mx = std::max(mx, p.vector[i]);
  }
  EXPECT_DOUBLE_EQ(mx, 1.0);
  // Non-locality: every component carries mass.
  for (long k = -4; k < 4; ++k) {
    const NodeMask c = component_mask(d, k);
    double ck = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i)
      if (c[i]) ck = std::max(ck, p.vector[i]);
    EXPECT_GT(ck, 0.1) << "component " << k;
  }
}

TEST(PrincipalEigenpair, SimplicityFromRandomStarts) {
  const GridDomain d = build_domain(test::working_geometry(), 16.0, 1.0 / 32.0);
  const DiscreteFracOp op(d, 0.25, Exterior::periodic);
  FracOperatorOnMask a(op, d.mask, -1.0);
  const EigenPair p = principal_eigenpair(a);
  const SimplicityReport s = simplicity_check(a, p, {}, 42, 5);
  EXPECT_TRUE(s.simple);
  EXPECT_EQ(s.values.size(), 5u);
  EXPECT_LE(s.max_deviation, 1e-9);
}

TEST(PrincipalEigenpair, TruncatedOperatorOnBallIsPositive) {
  const double h = 1.0 / 64.0, nu = 1.0;
  const Stencil st(0.5, h);
  const std::size_t n = 2 * static_cast<std::size_t>(nu / h) + 1;
  NodeMask mask(n, 1);
  mask.front() = mask.back() = 0;
  TruncatedOperatorOnMask a(st, nu, mask);
  const EigenPair p = principal_eigenpair(a);
  EXPECT_GT(p.value, 0.0);
  // Dense oracle built from the truncated row.
  const auto& row = a.truncated().row();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) = a.truncated().diagonal();
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t k = i > j ? i - j : j - i;
      if (k > 0 && k < row.size()) m(i, j) = -row[k];
    }
  }
  EXPECT_NEAR(p.value, dense_ground_energy(test::restrict(m, mask)), 1e-8);
}

TEST(CheckH1, WorkingGeometryHoldsAndOrders) {
  for (double alpha : {0.25, 0.5, 0.75}) {
    const GridDomain d = build_domain(test::working_geometry(), 32.0, 1.0 / 32.0);
    const DiscreteFracOp op(d, alpha, Exterior::periodic);
    const H1Report r = check_h1_and_corollary(op);
    EXPECT_EQ(r.status, H1Status::holds);
    EXPECT_LT(r.lambda1, 0.0);
    EXPECT_LT(r.lambda0, 0.0);
    EXPECT_LE(r.lambda0, r.lambda1);
    EXPECT_TRUE(r.ordered);
    EXPECT_TRUE(r.corollary_holds);
    EXPECT_NEAR(r.predicted_speed, -r.lambda0 / (1.0 + 2.0 * alpha), 1e-15);
    EXPECT_EQ(to_string(r.status), "holds");
  }
}

TEST(CheckH1, TinyComponentFails) {
  const PeriodicGeometry g(2.0, {{0.0, 0.05}});
  const GridDomain d = build_domain(g, 4.0, 1.0 / 1024.0);
  const DiscreteFracOp op(d, 0.5);
  const H1Report r = check_h1_and_corollary(op);
  EXPECT_GT(r.lambda1, 0.0);
  EXPECT_EQ(r.status, H1Status::fails);
  EXPECT_TRUE(r.ordered);
  EXPECT_TRUE(r.corollary_holds);  // vacuous
}

TEST(CheckH1, DirichletWindowIsAboveTorus) {
  const GridDomain d = build_domain(test::working_geometry(), 32.0, 1.0 / 32.0);
  FracOperatorOnMask torus(DiscreteFracOp(d, 0.5, Exterior::periodic), d.mask, -1.0);
  const DiscreteFracOp wop(d, 0.5, Exterior::dirichlet);
  FracOperatorOnMask window(wop, d.mask, -1.0);
  EXPECT_LE(principal_eigenpair(torus).value, principal_eigenpair(window).value);
}

TEST(EigenSweep, MonotoneInNuAndConsistentAtZero) {
  const GridDomain d = build_domain(test::working_geometry(), 16.0, 1.0 / 32.0);
  const DiscreteFracOp op(d, 0.5, Exterior::periodic);
  const SweepResult s = eigen_sweep(op, {0.1, -0.1, 0.0, 0.05, -0.05});
  ASSERT_EQ(s.entries.size(), 5u);
  EXPECT_TRUE(s.monotone);
  for (std::size_t i = 1; i < s.entries.size(); ++i) {
    EXPECT_LT(s.entries[i - 1].nu, s.entries[i].nu);
    EXPECT_LE(s.entries[i - 1].value, s.entries[i].value);
  }
  FracOperatorOnMask a(op, d.mask, -1.0);
  EXPECT_NEAR(s.entries[2].value, principal_eigenpair(a).value, 1e-10);
  EXPECT_DOUBLE_EQ(s.r0, 0.1);
  EXPECT_NEAR(eroded_eigenpair(op, 0.05).value, s.entries[3].value, 1e-10);
}

TEST(EigenSweep, ContinuityProxy) {
  // Differences |lambda_{delta} - lambda_0| shrink as delta halves.
  const GridDomain d = build_domain(test::working_geometry(), 16.0, 1.0 / 64.0);
  const DiscreteFracOp op(d, 0.5, Exterior::periodic);
  const SweepResult s = eigen_sweep(op, {0.0, 0.0625, 0.125, 0.25});
  const double l0 = s.entries[0].value;
  EXPECT_LT(std::abs(s.entries[1].value - l0), std::abs(s.entries[2].value - l0));
  EXPECT_LT(std::abs(s.entries[2].value - l0), std::abs(s.entries[3].value - l0));
}

TEST(EigenSweep, RejectsEmptyErosion) {
  const GridDomain d = build_domain(test::working_geometry(), 16.0, 1.0 / 16.0);
  const DiscreteFracOp op(d, 0.5, Exterior::periodic);
  EXPECT_THROW(eigen_sweep(op, {3.0}), InvalidArgument);
}

// Ratios |lambda(h) - lambda(h/2)| / |lambda(h/2) - lambda(h/4)| for h = 1/32 and 1/64.
std::pair<double, double> contractions(double alpha) {
  const PeriodicGeometry g(8.0, {{0.0, 4.0}});
  std::vector<double> l;
  for (double h : {1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0})
    l.push_back(single_component_eigenpair(g, alpha, h).value);
  return {std::abs(l[0] - l[1]) / std::abs(l[1] - l[2]),
          std::abs(l[1] - l[2]) / std::abs(l[2] - l[3])};
}

// First-order convergence (set by the delta^alpha boundary layer): the
// contraction factor approaches 2 from below under refinement.
TEST(GridConvergence, DifferencesContractTowardsFactorTwo) {
  for (double alpha : {0.25, 0.5, 0.75}) {
    const auto [coarse, fine] = contractions(alpha);
    EXPECT_GE(fine, 1.9) << "alpha " << alpha;
    EXPECT_GT(fine, coarse) << "alpha " << alpha;
    EXPECT_LT(fine, 2.1) << "alpha " << alpha;
  }
}

TEST(PrincipalEigenpair, EmptyMaskRejected) {
  const GridDomain d = build_domain(test::working_geometry(), 16.0, 1.0 / 16.0);
  const DiscreteFracOp op(d, 0.5);
  FracOperatorOnMask a(op, NodeMask(d.size(), 0));
  EXPECT_THROW(principal_eigenpair(a), InvalidArgument);
}

}  // namespace
}  // namespace fkpp
