#include <gtest/gtest.h>

#include <random>

#include "curvem/mesh_generators.hpp"
#include "curvem/problems.hpp"

using namespace curvem;

TEST(Solve, OneByOne) {
  Eigen::SparseMatrix<double> A(1, 1);
  A.insert(0, 0) = 2.0;
  Eigen::VectorXd b(1);
  b << 4.0;
  for (SolverKind s : {SolverKind::Direct, SolverKind::CG}) {
    const SolveReport r = solve_spd(A, b, s);
    EXPECT_NEAR(r.x_free[0], 2.0, 1e-14);
    EXPECT_LE(r.rel_residual, 1e-12);
  }
}

TEST(Solve, ReportsNonPositivePivot) {
  Eigen::SparseMatrix<double> A(3, 3);
  A.insert(0, 0) = 1.0;
  A.insert(1, 1) = 1.0;
  A.insert(2, 2) = -1.0;
  A.makeCompressed();
  try {
    solve_spd(A, Eigen::VectorXd::Ones(3));
    FAIL() << "expected NotPositiveDefinite";
  } catch (const NotPositiveDefinite& e) {
    EXPECT_EQ(e.pivot(), 2);
  }
}

TEST(Solve, DirectAndCgAgree) {
  Mesh m = square_circle_interface(32, 0.3);
  const BuiltinProblem p = smooth_problem();
  p.apply(m);
  const SparseSystem S = assemble(m, p.data(), AssemblyOptions{{2}});
  ASSERT_GT(S.free.size(), 5000u);
  const SolveReport d = solve_spd(S, SolverKind::Direct), c = solve_spd(S, SolverKind::CG);
  EXPECT_LE(d.rel_residual, 1e-10);
  EXPECT_GT(d.min_pivot, 0.0);
  EXPECT_LT((d.g - c.g).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Errors, ZeroSolutionAgainstLinear) {
  Mesh m = square_straight(2);
  ProblemData data;
  data.g_D = [](const Point&) { return 0.0; };
  const SparseSystem S = assemble(m, data, AssemblyOptions{{1}});
  const ExactSolution ex{[](const Point& x, int) { return x.x(); }, [](const Point&, int) { return Vec2(1, 0); }};
  const ErrorReport r = error_norms(S, Eigen::VectorXd::Zero(S.dofs.n), ex);
  EXPECT_NEAR(r.e_H1, 1.0, 1e-14);
  EXPECT_NEAR(r.e_L2, 1.0, 1e-14);
  EXPECT_NEAR(r.u_H1, 1.0, 1e-14);
}

TEST(Norm1S, KernelCauchySchwarzHomogeneity) {
  Mesh m = square_circle_interface(4, 0.3);
  ProblemData data;
  const SparseSystem S = assemble(m, data, AssemblyOptions{{2}});
  const Interpolant one = interpolant_oracle(S, [](const Point&, int) { return 1.0; });
  std::mt19937_64 rng(2);
  std::normal_distribution<double> N;
  Eigen::VectorXd r(S.dofs.n);
  for (int i = 0; i < S.dofs.n; ++i) r[i] = N(rng);
  EXPECT_LT(norm_1S(S, one.g), 1e-7 * norm_1S(S, r));

  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd u(S.dofs.n), v(S.dofs.n);
    for (int i = 0; i < S.dofs.n; ++i) {
      u[i] = N(rng);
      v[i] = N(rng);
    }
    EXPECT_LE(std::abs(u.dot(S.K * v)), norm_1S(S, u) * norm_1S(S, v) * (1 + 1e-12));
    EXPECT_NEAR(norm_1S(S, 2 * u), 2 * norm_1S(S, u), 1e-12 * norm_1S(S, u));
  }
}

TEST(Interpolant, ReproducesPolynomials) {
  Mesh m = square_circle_interface(4, 0.3, {ArcMode::Arc, BoundaryMode::Mixed});
  for (int k = 1; k <= 3; ++k) {
    const BuiltinProblem p = patch_problem(k);
    p.apply(m);
    const SparseSystem S = assemble(m, p.data(), AssemblyOptions{{k}});
    const Interpolant I = interpolant_oracle(S, p.u);
    for (int el = 0; el < static_cast<int>(m.elements.size()); ++el) {
      const Eigen::VectorXd c = S.ops[el].project(S.local(I.g, el));
      const Point x = m.elements[el].centroid;
      EXPECT_NEAR(S.ops[el].basis().eval_poly(c, x), p.u(x, 0), 1e-10);
      EXPECT_NEAR(S.ops[el].basis().eval_poly(I.pi[el], x), p.u(x, 0), 1e-10);
    }
    EXPECT_LT(interpolant_gap_1S(S, I, p.u), 1e-9);
  }
}

TEST(Study, RatesAndCsv) {
  const BuiltinProblem p = smooth_problem();
  const auto family = [&](int n) {
    Mesh m = square_straight(n);
    p.apply(m);
    return m;
  };
  const auto rows = convergence_study(family, {4, 8, 16}, p.data(), p.exact(), {1});
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_TRUE(std::isnan(rows[0].rate_H1));
  EXPECT_NEAR(rows[2].rate_H1, 1.0, 0.1);
  EXPECT_NEAR(rows[2].rate_L2, 2.0, 0.2);
  const std::string csv = rates_csv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "k,h,ndof,e_H1,e_L2,rate_H1,rate_L2");
  EXPECT_EQ(csv, rates_csv(convergence_study(family, {4, 8, 16}, p.data(), p.exact(), {1})));
  EXPECT_THROW(convergence_study(family, {4, 8}, p.data(), p.exact(), {1}), ConfigError);
  EXPECT_THROW(convergence_study(family, {8, 4, 16}, p.data(), p.exact(), {1}), ConfigError);
}
