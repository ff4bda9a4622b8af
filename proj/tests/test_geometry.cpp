#include <gtest/gtest.h>

#include "fkpp/error.hpp"
#include "fkpp/geometry.hpp"

namespace fkpp {
namespace {

TEST(Geometry, MembershipAndDistances) {
  PeriodicGeometry g(2.0, {{0.0, 1.0}});
  EXPECT_TRUE(g.contains(0.5));
  EXPECT_TRUE(g.contains(4.25));
  EXPECT_FALSE(g.contains(1.5));
  EXPECT_FALSE(g.contains(-0.5));
  EXPECT_NEAR(g.boundary_distance(0.25), 0.25, 1e-15);
  EXPECT_NEAR(g.boundary_distance(-1.75), 0.25, 1e-15);
  EXPECT_EQ(g.boundary_distance(1.5), 0.0);
  EXPECT_NEAR(g.exterior_distance(1.25), 0.25, 1e-15);
  EXPECT_EQ(g.exterior_distance(0.5), 0.0);
  EXPECT_EQ(g.cell_of(4.5), 2);
  EXPECT_EQ(g.cell_of(-1.5), -1);
  EXPECT_DOUBLE_EQ(g.min_length(), 1.0);
  EXPECT_DOUBLE_EQ(g.min_gap(), 1.0);
}

TEST(Geometry, RejectsBadBaseComponents) {
  EXPECT_THROW(PeriodicGeometry(2.0, {}), InvalidArgument);
  EXPECT_THROW(PeriodicGeometry(2.0, {{0.5, 0.5}}), InvalidArgument);
  EXPECT_THROW(PeriodicGeometry(2.0, {{0.0, 2.5}}), InvalidArgument);
  EXPECT_THROW(PeriodicGeometry(2.0, {{0.0, 2.0}}), InvalidArgument);  // touches its translate
  EXPECT_THROW(PeriodicGeometry(-1.0, {{0.0, 0.5}}), InvalidArgument);
}

TEST(Geometry, GridDomainLayout) {
  const GridDomain d = build_domain(PeriodicGeometry(2.0, {{0.0, 1.0}}), 4.0, 0.25);
  EXPECT_EQ(d.size(), 32u);
  EXPECT_EQ(d.cell_nodes(), 8u);
  EXPECT_DOUBLE_EQ(d.x.front(), -4.0);
  // Open components: boundary nodes are off the mask, three interior nodes per cell.
  EXPECT_EQ(count(d.mask), 4u * 3u);
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!d.mask[i]) {
      EXPECT_EQ(d.delta[i], 0.0);
      continue;
    }
    EXPECT_GT(d.delta[i], 0.0);
    EXPECT_EQ(d.component[i], d.geometry.cell_of(d.x[i]));
  }
  EXPECT_THROW(build_domain(d.geometry, 4.0, 0.3), InvalidArgument);
  EXPECT_THROW(build_domain(d.geometry, 3.0, 0.25), InvalidArgument);
  EXPECT_THROW(build_domain(d.geometry, 1.0, 0.25), InvalidArgument);
}

TEST(Geometry, ErodeAndDilateAreNested) {
  const GridDomain d = build_domain(PeriodicGeometry(2.0, {{0.0, 1.0}}), 4.0, 1.0 / 32.0);
  const NodeMask inner = erode(d, 0.1);
  const NodeMask outer = dilate(d, 0.1);
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_LE(inner[i], d.mask[i]);
    EXPECT_LE(d.mask[i], outer[i]);
  }
  EXPECT_EQ(erode(d, 0.0), d.mask);
  EXPECT_LT(count(inner), count(d.mask));
  EXPECT_GT(count(outer), count(d.mask));
  // Erosion by nu removes the nodes with delta <= nu.
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d.mask[i]) EXPECT_EQ(inner[i] != 0, d.delta[i] > 0.1);
  EXPECT_EQ(count(erode(d, 0.6)), 0u);
  EXPECT_THROW(dilate(d, 0.5), InvalidArgument);
  EXPECT_THROW(erode(d, -0.1), InvalidArgument);
}

TEST(Geometry, ComponentMask) {
  const GridDomain d = build_domain(PeriodicGeometry(2.0, {{0.0, 1.0}}), 4.0, 0.125);
  std::size_t total = 0;
  for (long k = -2; k < 2; ++k) {
    const NodeMask m = component_mask(d, k);
    total += count(m);
    for (std::size_t i = 0; i < d.size(); ++i)
      if (m[i]) EXPECT_TRUE(d.x[i] > 2.0 * k && d.x[i] < 2.0 * k + 1.0);
  }
  EXPECT_EQ(total, count(d.mask));
}

}  // namespace
}  // namespace fkpp
