#include <gtest/gtest.h>

#include "curvem/geometry.hpp"
#include "fixtures.hpp"

using namespace curvem;

TEST(Poly2d, Dimensions) {
  EXPECT_EQ(dim_pk(-1), 0);
  EXPECT_EQ(dim_pk(0), 1);
  EXPECT_EQ(dim_pk(1), 3);
  EXPECT_EQ(dim_pk(2), 6);
  EXPECT_EQ(dim_pk(3), 10);
  EXPECT_EQ(dim_pk(3, 1), 4);
}

TEST(Poly2d, MonomialOrderingRoundTrips) {
  EXPECT_EQ(monomial_index(0, 0), 0);
  EXPECT_EQ(monomial_index(1, 0), 1);
  EXPECT_EQ(monomial_index(0, 1), 2);
  EXPECT_EQ(monomial_index(1, 1), 4);
  EXPECT_EQ(monomial_index(0, 3), 9);
  for (int i = 0; i < 28; ++i) {
    const MultiIndex m = multi_index(i);
    EXPECT_EQ(monomial_index(m.a, m.b), i);
  }
}

TEST(Poly2d, ScaledBasisValuesAndGradients) {
  const ScaledMonomialBasis B(Point(1, 2), 0.5, 3);
  const Point x(1.5, 1.0);  // xi = 1, eta = -2
  const Eigen::VectorXd v = B.eval(x);
  EXPECT_DOUBLE_EQ(v[monomial_index(2, 1)], -2.0);
  EXPECT_DOUBLE_EQ(v[monomial_index(0, 3)], -8.0);
  const Eigen::MatrixX2d g = B.grad(x);
  const double d = 1e-6;
  for (int i = 0; i < B.size(); ++i) {
    const double fx = (B.eval(x + Point(d, 0))[i] - B.eval(x - Point(d, 0))[i]) / (2 * d);
    const double fy = (B.eval(x + Point(0, d))[i] - B.eval(x - Point(0, d))[i]) / (2 * d);
    EXPECT_NEAR(g(i, 0), fx, 1e-6);
    EXPECT_NEAR(g(i, 1), fy, 1e-6);
  }
  EXPECT_THROW(ScaledMonomialBasis(Point(0, 0), 0.0, 1), ContractError);
}

TEST(Poly2d, LaplacianCoefficients) {
  const ScaledMonomialBasis B(Point(0, 0), 2.0, 3);
  // Laplacian of xi^2 eta = 2 eta / h^2.
  const Eigen::VectorXd c = B.laplacian_coeffs(monomial_index(2, 1));
  ASSERT_EQ(c.size(), 3);
  EXPECT_DOUBLE_EQ(c[monomial_index(0, 1)], 0.5);
  EXPECT_DOUBLE_EQ(c[0], 0.0);
  const Eigen::MatrixXd L = B.laplacian_matrix();
  EXPECT_EQ(L.rows(), 3);
  EXPECT_EQ(L.cols(), 10);
  EXPECT_DOUBLE_EQ(L(0, monomial_index(0, 2)), 0.5);
}

TEST(Poly2d, StiffnessGramMatchesQuadrature) {
  const Mesh m = curvem::testing::single_element({{0, 0}, {2, 0}, {2, 1}, {0, 1}});
  const Element& E = m.elements[0];
  const ScaledMonomialBasis B(E.centroid, E.h, 3);
  const MomentTable mom = monomial_moments(m, 0, E.centroid, E.h, 6, 32);
  const Eigen::MatrixXd G = stiffness_gram(mom, B);
  const AreaRule rule = interior_quadrature(m, 0, 8, 32);
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(B.size(), B.size());
  for (std::size_t q = 0; q < rule.x.size(); ++q) {
    const Eigen::MatrixX2d g = B.grad(rule.x[q]);
    Q += rule.w[q] * g * g.transpose();
  }
  EXPECT_LT((G - Q).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((G - G.transpose()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(G.row(0).cwiseAbs().sum(), 0.0, 1e-15);

  const Eigen::MatrixXd M = mass_moments(mom, B, 1);
  EXPECT_NEAR(M(0, 0), E.area, 1e-13);
  EXPECT_THROW(mass_moments(mom, B, 4), ContractError);
}
