#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "curvem/geometry.hpp"
#include "fixtures.hpp"

using namespace curvem;
using curvem::testing::single_element;

namespace {

Mesh unit_square() { return single_element({{0, 0}, {1, 0}, {1, 1}, {0, 1}}); }

Mesh quarter_disk(Warp w = Warp::None) {
  return single_element({{1, 0}, {0, 1}, {0, 0}},
                        CurveSegment(CircularArc{Point(0, 0), 1.0, 0.0, std::numbers::pi / 2}, 0.0, 1.0, w),
                        Declared::Curved);
}

}  // namespace

TEST(Gauss, LegendreIntegratesPolynomialsExactly) {
  for (int n = 1; n <= 12; ++n) {
    const Rule1D r = gauss_legendre(n);
    for (int p = 0; p <= 2 * n - 1; ++p) {
      double s = 0.0;
      for (std::size_t i = 0; i < r.x.size(); ++i) s += r.w[i] * std::pow(r.x[i], p);
      const double exact = p % 2 ? 0.0 : 2.0 / (p + 1);
      EXPECT_NEAR(s, exact, 1e-14) << "n=" << n << " p=" << p;
    }
  }
}

TEST(Gauss, LobattoInteriorNodes) {
  EXPECT_TRUE(lobatto_interior(1).empty());
  ASSERT_EQ(lobatto_interior(2).size(), 1u);
  EXPECT_NEAR(lobatto_interior(2)[0], 0.5, 1e-15);
  const auto n3 = lobatto_interior(3);
  ASSERT_EQ(n3.size(), 2u);
  EXPECT_NEAR(n3[0], 0.5 - std::sqrt(5.0) / 10.0, 1e-14);
  EXPECT_NEAR(n3[1], 0.5 + std::sqrt(5.0) / 10.0, 1e-14);
}

TEST(Curve, ArcEvalAndTangent) {
  const CurveSegment c(CircularArc{Point(1, 2), 2.0, 0.0, std::numbers::pi});
  EXPECT_NEAR((c.eval(0.5) - Point(1, 4)).norm(), 0.0, 1e-14);
  EXPECT_NEAR((c.tangent(0.5) - Vec2(-2 * std::numbers::pi, 0)).norm(), 0.0, 1e-13);
  EXPECT_THROW(c.eval(1.5), DomainError);
}

TEST(Curve, TangentMatchesFiniteDifference) {
  const CurveSegment shapes[] = {
      CurveSegment(BezierCubic{{Point(0, 0), Point(1, 2), Point(2, -1), Point(3, 0)}}),
      CurveSegment(PolyParametric{{0.0, 1.0, 0.5}, {1.0, -0.3, 0.2, 0.1}}, -1.0, 2.0),
      CurveSegment(CircularArc{Point(0, 0), 1.5, 0.3, -1.2}, 0.0, 1.0, Warp::Cubic),
  };
  for (const auto& c : shapes)
    for (double u : {0.1, 0.4, 0.9}) {
      const double t = c.t0() + u * (c.t1() - c.t0()), d = 1e-6;
      const Vec2 fd = (c.eval(t + d) - c.eval(t - d)) / (2 * d);
      EXPECT_NEAR((fd - c.tangent(t)).norm(), 0.0, 1e-7 * std::max(1.0, fd.norm()));
    }
}

TEST(Curve, WarpKeepsEndpointsAndImage) {
  CurveSegment a(CircularArc{Point(0, 0), 1.0, 0.0, 1.0});
  CurveSegment b = a;
  b.set_warp(Warp::Cubic);
  EXPECT_NEAR((a.start() - b.start()).norm(), 0.0, 1e-15);
  EXPECT_NEAR((a.end() - b.end()).norm(), 0.0, 1e-15);
  EXPECT_NEAR(b.eval(0.5).norm(), 1.0, 1e-15);
}

TEST(EdgeQuadrature, ArcLengthAndOutwardNormal) {
  const CurveSegment c(CircularArc{Point(0, 0), 2.0, 0.0, std::numbers::pi / 2});
  const BoundaryQuadRule r = edge_quadrature(c, 16);
  EXPECT_NEAR(r.length(), std::numbers::pi, 1e-13);
  for (const auto& n : r.nodes) EXPECT_NEAR((n.normal - n.x / 2.0).norm(), 0.0, 1e-13);
}

TEST(EdgeQuadrature, DegenerateTangentRaises) {
  const CurveSegment c(PolyParametric{{0.0, 0.0, 1.0}, {0.0, 0.0, 1.0}}, -1.0, 1.0);
  EXPECT_THROW(edge_quadrature(c, 3), GeometryError);
}

TEST(Moments, UnitSquareAnalytic) {
  const Mesh m = unit_square();
  const MomentTable t = monomial_moments(m, 0, Point(0, 0), 1.0, 4, 32);
  EXPECT_NEAR(t(0, 0), 1.0, 1e-14);
  EXPECT_NEAR(t(1, 0), 0.5, 1e-14);
  EXPECT_NEAR(t(2, 0), 1.0 / 3.0, 1e-14);
  EXPECT_NEAR(t(1, 1), 0.25, 1e-14);
  EXPECT_NEAR(t(2, 2), 1.0 / 9.0, 1e-14);
  EXPECT_NEAR(m.elements[0].area, 1.0, 1e-14);
  EXPECT_NEAR((m.elements[0].centroid - Point(0.5, 0.5)).norm(), 0.0, 1e-14);
  EXPECT_NEAR(m.elements[0].h, std::sqrt(2.0), 1e-12);
}

TEST(Moments, QuarterDiskAnalytic) {
  for (Warp w : {Warp::None, Warp::Cubic}) {
    const Mesh m = quarter_disk(w);
    const MomentTable t = monomial_moments(m, 0, Point(0, 0), 1.0, 2, 32);
    EXPECT_NEAR(t(0, 0), std::numbers::pi / 4, 1e-12);
    EXPECT_NEAR(t(1, 0), 1.0 / 3.0, 1e-12);
    EXPECT_NEAR(t(0, 1), 1.0 / 3.0, 1e-12);
    EXPECT_NEAR(t(2, 0), std::numbers::pi / 16, 1e-12);
  }
}

TEST(Moments, GreenAgreesWithInteriorQuadrature) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const Mesh m = curvem::testing::random_curved_element(rng);
    const Element& E = m.elements[0];
    const MomentTable t = monomial_moments(m, 0, E.centroid, E.h, 6, 32);
    const AreaRule rule = interior_quadrature(m, 0, 10, 32);
    for (int i = 0; i < dim_pk(6); ++i) {
      const MultiIndex a = multi_index(i);
      double s = 0.0;
      for (std::size_t q = 0; q < rule.x.size(); ++q) {
        const Point y = (rule.x[q] - E.centroid) / E.h;
        s += rule.w[q] * std::pow(y.x(), a.a) * std::pow(y.y(), a.b);
      }
      EXPECT_NEAR(s, t.values[i], 1e-10 * E.area) << "trial " << trial << " index " << i;
    }
  }
}

TEST(InteriorQuadrature, NonStarShapedCentreRaises) {
  // A strongly inward arc puts the fan centre outside the element.
  const std::vector<Point> pts{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  const CurveSegment deep = curvem::testing::bulged_curve(pts[0], pts[1], -0.45, curvem::testing::EdgeShape::Arc);
  Mesh m = single_element(pts, deep, Declared::Curved);
  EXPECT_THROW(interior_quadrature(m, 0, 6, 32, Point(0.5, 0.05)), MeshError);
}

TEST(TgLayout, ApexOfEquilateralTriangleOnBulgeSide) {
  const Mesh m = quarter_disk();
  const TgLayout t = tg_layout(m, 0, 1);
  ASSERT_EQ(t.tgp_count(), 1);
  const Point a(1, 0), b(0, 1);
  const Point apex = t.tg_points()[0];
  EXPECT_NEAR((apex - a).norm(), std::sqrt(2.0), 1e-14);
  EXPECT_NEAR((apex - b).norm(), std::sqrt(2.0), 1e-14);
  // Bulge of the arc is away from the origin.
  EXPECT_GT(apex.norm(), 1.0);
}

TEST(TgLayout, CountsAndLagrangeBasis) {
  const Mesh m = quarter_disk();
  for (int k = 1; k <= 3; ++k) {
    const TgLayout t = tg_layout(m, 0, k);
    EXPECT_EQ(t.tgp_count(), dim_pk(k) - 2);
    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
      const Eigen::VectorXd l = t.basis(t.nodes[i]);
      for (int j = 0; j < l.size(); ++j) EXPECT_NEAR(l[j], i == static_cast<std::size_t>(j) ? 1.0 : 0.0, 1e-13);
    }
    const Point x(0.3, 0.7);
    EXPECT_NEAR(t.basis(x).sum(), 1.0, 1e-13);
  }
  EXPECT_THROW(tg_layout(m, 0, 4), ContractError);
}

TEST(Topology, RejectsBadMeshes) {
  Mesh m;
  m.vertices = {{0, 0}, {1, 0}, {0, 1}};
  m.edges = {{0, 1, -1, Declared::Straight, BoundaryTag::Dirichlet},
             {1, 2, -1, Declared::Straight, BoundaryTag::Dirichlet},
             {0, 2, -1, Declared::Straight, BoundaryTag::Dirichlet}};
  m.elements.push_back({{{0, 1}, {1, 1}, {2, -1}}, 0});
  m.kappa = {{0, 1.0}};
  EXPECT_NO_THROW(validate_topology(m));

  Mesh open = m;
  open.elements[0].loop[2].dir = 1;
  EXPECT_THROW(validate_topology(open), MeshError);

  Mesh untagged = m;
  untagged.edges[0].boundary = BoundaryTag::Interior;
  EXPECT_THROW(validate_topology(untagged), MeshError);

  Mesh nokappa = m;
  nokappa.kappa.clear();
  EXPECT_THROW(validate_topology(nokappa), MeshError);

  Mesh badcurve = m;
  badcurve.curves.emplace_back(CircularArc{Point(0, 0), 1.0, 0.0, 1.0});
  badcurve.edges[1].curve = 0;
  badcurve.edges[1].declared = Declared::Curved;
  EXPECT_THROW(validate_topology(badcurve), MeshError);

  Mesh twocurved = m;
  twocurved.edges[0].declared = twocurved.edges[1].declared = Declared::Curved;
  EXPECT_THROW(validate_topology(twocurved), MeshError);
}

TEST(Finalize, StarCentreAndRatios) {
  const Mesh m = quarter_disk();
  const Element& E = m.elements[0];
  EXPECT_NEAR(E.area, std::numbers::pi / 4, 1e-12);
  EXPECT_GT(E.rho_ratio, 0.1);
  EXPECT_GT(E.min_edge_ratio, 0.1);
}
