#pragma once

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "curvem/assembly.hpp"

namespace curvem {

enum class SolverKind { Direct, CG };

struct SolveReport {
  Eigen::VectorXd g;       // full generator vector (constrained slots filled)
  Eigen::VectorXd x_free;  // reduced solution
  double rel_residual = 0.0;
  int iterations = 0;      // CG only
  double min_pivot = 0.0;  // direct only
  std::string method;
};

/// Solves A x = b for symmetric positive definite A.
inline SolveReport solve_spd(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b,
                             SolverKind kind = SolverKind::Direct) {
  if (A.rows() != A.cols() || A.rows() != b.size()) throw ContractError("solve_spd: dimension mismatch");
  SolveReport r;
  if (A.rows() == 0) {
    r.method = "empty";
    return r;
  }
  if (kind == SolverKind::Direct) {
    r.method = "ldlt";
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
    if (ldlt.info() != Eigen::Success) throw NotPositiveDefinite("factorization failed", -1);
    const Eigen::VectorXd d = ldlt.vectorD();
    Eigen::Index j = 0;
    r.min_pivot = d.minCoeff(&j);
    if (!(r.min_pivot > 0.0)) {
      const long orig = ldlt.permutationPinv().indices()[j];
      throw NotPositiveDefinite("non-positive pivot " + std::to_string(r.min_pivot) + " at unknown " +
                                    std::to_string(orig),
                                orig);
    }
    r.x_free = ldlt.solve(b);
  } else {
    r.method = "cg";
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                             Eigen::DiagonalPreconditioner<double>>
        cg;
    cg.setTolerance(1e-12);
    cg.setMaxIterations(std::max<Eigen::Index>(1000, 20 * A.rows()));
    cg.compute(A);
    r.x_free = cg.solve(b);
    r.iterations = static_cast<int>(cg.iterations());
    if (cg.info() != Eigen::Success) throw NotPositiveDefinite("CG did not converge", -1);
  }
  const double nb = b.norm();
  r.rel_residual = (A * r.x_free - b).norm() / (nb > 0.0 ? nb : 1.0);
  return r;
}

inline SolveReport solve_spd(const SparseSystem& S, SolverKind kind = SolverKind::Direct) {
  SolveReport r = solve_spd(S.A_ff, S.rhs, kind);
  if (r.x_free.size() != static_cast<Eigen::Index>(S.free.size())) r.x_free = Eigen::VectorXd::Zero(S.free.size());
  r.g = S.expand(r.x_free);
  return r;
}

// ---------------------------------------------------------------------------

struct ExactSolution {
  std::function<double(const Point&, int region)> u;
  std::function<Vec2(const Point&, int region)> grad;
};

struct ErrorReport {
  double e_H1 = 0.0, e_L2 = 0.0;        // relative
  double abs_H1 = 0.0, abs_L2 = 0.0;
  double u_H1 = 0.0, u_L2 = 0.0;        // norms of the exact solution
  double max_elem_H1 = 0.0, max_elem_L2 = 0.0;
  int worst_element = -1;
};

/// Broken errors of Pi-nabla_k u_h against u, element by element.
inline ErrorReport error_norms(const SparseSystem& S, const Eigen::VectorXd& g, const ExactSolution& ex,
                               int extra_order = 2) {
  const Mesh& m = *S.mesh;
  ErrorReport r;
  double eh = 0.0, el2 = 0.0, uh = 0.0, ul2 = 0.0;
  for (int el = 0; el < static_cast<int>(m.elements.size()); ++el) {
    const LocalOperators& L = S.ops[el];
    const int region = m.elements[el].region;
    const Eigen::VectorXd c = L.project(S.local(g, el), S.psi());
    const AreaRule rule =
        interior_quadrature(m, el, L.options().interior() + extra_order, L.options().curved());
    double ph = 0.0, pl = 0.0;
    for (std::size_t q = 0; q < rule.x.size(); ++q) {
      const Point& x = rule.x[q];
      const double u = ex.u(x, region);
      const Vec2 gu = ex.grad(x, region);
      ph += rule.w[q] * (gu - L.basis().grad_poly(c, x)).squaredNorm();
      pl += rule.w[q] * std::pow(u - L.basis().eval_poly(c, x), 2);
      uh += rule.w[q] * gu.squaredNorm();
      ul2 += rule.w[q] * u * u;
    }
    eh += ph;
    el2 += pl;
    if (std::sqrt(ph) > r.max_elem_H1) {
      r.max_elem_H1 = std::sqrt(ph);
      r.worst_element = el;
    }
    r.max_elem_L2 = std::max(r.max_elem_L2, std::sqrt(pl));
  }
  r.abs_H1 = std::sqrt(eh);
  r.abs_L2 = std::sqrt(el2);
  r.u_H1 = std::sqrt(uh);
  r.u_L2 = std::sqrt(ul2);
  r.e_H1 = r.u_H1 > 0.0 ? r.abs_H1 / r.u_H1 : r.abs_H1;
  r.e_L2 = r.u_L2 > 0.0 ? r.abs_L2 / r.u_L2 : r.abs_L2;
  return r;
}

/// sqrt(g^T K g) with K the unconstrained global stiffness.
inline double norm_1S(const SparseSystem& S, const Eigen::VectorXd& g) {
  const double q = g.dot(S.K * g);
  if (q < 0.0) {
    const double kn = S.K.norm();
    if (q < -1e-12 * kn * g.squaredNorm())
      throw InternalError("norm_1S: negative energy " + std::to_string(q));
    return 0.0;
  }
  return std::sqrt(q);
}

// ---------------------------------------------------------------------------

struct Interpolant {
  Eigen::VectorXd g;                  // global generator vector u_I
  std::vector<Eigen::VectorXd> pi;    // per-element P_k coefficients of u_pi
  std::vector<char> from_fit;         // element uses a curved-edge patch fit
};

namespace detail {

/// L2 projection of u onto P_k of the element.
inline Eigen::VectorXd l2_projection(const LocalOperators& L, const std::function<double(const Point&)>& u) {
  const auto& B = L.basis();
  const AreaRule rule =
      interior_quadrature(L.mesh(), L.element(), L.options().interior() + 2, L.options().curved());
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(B.size(), B.size());
  Eigen::VectorXd b = Eigen::VectorXd::Zero(B.size());
  for (std::size_t q = 0; q < rule.x.size(); ++q) {
    const Eigen::VectorXd v = B.eval(rule.x[q]);
    M += rule.w[q] * v * v.transpose();
    b += rule.w[q] * u(rule.x[q]) * v;
  }
  return M.ldlt().solve(b);
}

}  // namespace detail

/// Builds u_I and the piecewise polynomial u_pi used by the interpolation estimates.
/// Each curved non-Dirichlet edge gets a P_k fit q_k of u over its patch (only the
/// stabilizing side when the edge carries a kappa jump), with the edge endpoints
/// interpolated exactly; its tg values are q_k at the tg points.
inline Interpolant interpolant_oracle(const SparseSystem& S, const std::function<double(const Point&, int)>& u) {
  const Mesh& m = *S.mesh;
  const int k = S.k, ne = static_cast<int>(m.elements.size());
  Interpolant I;
  I.g = Eigen::VectorXd::Zero(S.dofs.n);
  I.pi.resize(ne);
  I.from_fit.assign(ne, 0);

  for (int el = 0; el < ne; ++el) {
    const LocalOperators& L = S.ops[el];
    const int region = m.elements[el].region;
    const auto& slots = L.layout().slots;
    const AreaRule rule = interior_quadrature(m, el, L.options().interior() + 2, L.options().curved());
    const int nm = dim_pk(k - 2);
    Eigen::VectorXd mom = Eigen::VectorXd::Zero(nm);
    for (std::size_t q = 0; q < rule.x.size(); ++q)
      mom += rule.w[q] * u(rule.x[q], region) * L.basis().eval(rule.x[q]).head(nm);
    mom /= L.area();
    for (std::size_t i = 0; i < slots.size(); ++i) {
      const Slot& s = slots[i];
      if (s.kind == SlotKind::Tgp) continue;
      I.g[S.l2g[el][i]] = s.kind == SlotKind::Moment ? mom[s.j] : u(L.slot_point(s), region);
    }
  }

  const auto adj = m.edge_elements();
  for (int e = 0; e < static_cast<int>(m.edges.size()); ++e) {
    const MeshEdge& ed = m.edges[e];
    if (!ed.is_curved_declared() || ed.boundary == BoundaryTag::Dirichlet) continue;
    std::vector<int> patch;
    for (int el : adj[e])
      if (S.ownership.owns(e, el)) patch.push_back(el);

    double hp = 0.0;
    Point c = Point::Zero();
    for (int el : patch) {
      hp = std::max(hp, m.elements[el].h);
      c += m.elements[el].centroid;
    }
    c /= static_cast<double>(patch.size());
    const ScaledMonomialBasis B(c, hp, k);
    std::vector<Eigen::VectorXd> rows;
    std::vector<double> rhs;
    for (int el : patch) {
      const LocalOperators& L = S.ops[el];
      const AreaRule rule = interior_quadrature(m, el, L.options().interior() + 2, L.options().curved());
      const double scale = 1.0 / L.area();
      for (std::size_t q = 0; q < rule.x.size(); ++q) {
        const double w = std::sqrt(rule.w[q] * scale);
        rows.push_back(w * B.eval(rule.x[q]));
        rhs.push_back(w * u(rule.x[q], m.elements[el].region));
      }
    }
    const int n = B.size();
    if (static_cast<int>(rows.size()) < n) throw ContractError("interpolant_oracle: too few samples for the fit");
    Eigen::MatrixXd A(rows.size(), n);
    Eigen::VectorXd b(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      A.row(i) = rows[i].transpose();
      b[i] = rhs[i];
    }
    const int reg = m.elements[patch.front()].region;
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + 2, n + 2);
    Eigen::VectorXd r = Eigen::VectorXd::Zero(n + 2);
    K.topLeftCorner(n, n) = A.transpose() * A;
    r.head(n) = A.transpose() * b;
    const Point ends[2] = {m.vertices[ed.v0], m.vertices[ed.v1]};
    for (int j = 0; j < 2; ++j) {
      const Eigen::VectorXd v = B.eval(ends[j]);
      K.block(n + j, 0, 1, n) = v.transpose();
      K.block(0, n + j, n, 1) = v;
      r[n + j] = u(ends[j], reg);
    }
    const Eigen::VectorXd q = K.fullPivLu().solve(r).head(n);

    const LocalOperators& L0 = S.ops[adj[e].front()];
    const int base = S.dofs.edge_base[e];
    for (int j = 0; j < S.dofs.edge_count[e]; ++j) I.g[base + j] = B.eval_poly(q, L0.tg()->nodes[2 + j]);
    for (int el : patch) {
      const ScaledMonomialBasis& BL = S.ops[el].basis();
      // Re-expand q in the element's own basis through an exact P_k fit at nodes.
      Eigen::MatrixXd V(n, n);
      Eigen::VectorXd val(n);
      int row = 0;
      for (int a = 0; a <= k; ++a)
        for (int bb = 0; bb <= k - a; ++bb, ++row) {
          const Point x = BL.center() + BL.h() * Point(double(a) / (k + 1), double(bb) / (k + 1));
          V.row(row) = BL.eval(x).transpose();
          val[row] = B.eval_poly(q, x);
        }
      I.pi[el] = V.fullPivLu().solve(val);
      I.from_fit[el] = 1;
    }
  }
  for (int el = 0; el < ne; ++el)
    if (!I.from_fit[el]) {
      const int region = m.elements[el].region;
      I.pi[el] = detail::l2_projection(S.ops[el], [&](const Point& x) { return u(x, region); });
    }
  return I;
}

/// ||u_I - u_pi||_{1,S}: element energies of u_I - G(u_pi), with the curved
/// Dirichlet trace u - u_pi where present.
inline double interpolant_gap_1S(const SparseSystem& S, const Interpolant& I,
                                 const std::function<double(const Point&, int)>& u) {
  const Mesh& m = *S.mesh;
  double s = 0.0;
  for (int el = 0; el < static_cast<int>(m.elements.size()); ++el) {
    const LocalOperators& L = S.ops[el];
    const int region = m.elements[el].region;
    const Eigen::VectorXd d = S.local(I.g, el) - L.generators_of(I.pi[el]);
    const ScalarField psi = [&](const Point& x) { return u(x, region) - L.basis().eval_poly(I.pi[el], x); };
    s += L.local_energy(m.kappa_of(el), S.masks[el], d, L.depends_on_psi() ? &psi : nullptr);
  }
  return std::sqrt(std::max(0.0, s));
}

// ---------------------------------------------------------------------------

struct RateRow {
  int k = 1;
  double h = 0.0;
  int ndof = 0;
  double e_H1 = 0.0, e_L2 = 0.0;
  double rate_H1 = std::numeric_limits<double>::quiet_NaN();
  double rate_L2 = std::numeric_limits<double>::quiet_NaN();
};

inline double mesh_size(const Mesh& m) {
  double h = 0.0;
  for (const auto& e : m.elements) h = std::max(h, e.h);
  return h;
}

inline void fill_rates(std::vector<RateRow>& rows) {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].k != rows[i - 1].k) continue;
    const double lh = std::log(rows[i - 1].h / rows[i].h);
    rows[i].rate_H1 = std::log(rows[i - 1].e_H1 / rows[i].e_H1) / lh;
    rows[i].rate_L2 = std::log(rows[i - 1].e_L2 / rows[i].e_L2) / lh;
  }
}

struct StudyOptions {
  AssemblyOptions assembly;
  SolverKind solver = SolverKind::Direct;
};

/// Solves on every mesh of the family for every k and tabulates errors and rates.
inline std::vector<RateRow> convergence_study(const std::function<Mesh(int)>& family, const std::vector<int>& levels,
                                              const ProblemData& data, const ExactSolution& ex,
                                              const std::vector<int>& ks, const StudyOptions& opt = {}) {
  if (levels.size() < 3) throw ConfigError("convergence study needs at least three refinement levels");
  std::vector<Mesh> meshes;
  for (int n : levels) meshes.push_back(family(n));
  for (std::size_t i = 1; i < meshes.size(); ++i)
    if (!(mesh_size(meshes[i]) < mesh_size(meshes[i - 1])))
      throw ConfigError("mesh sizes are not strictly decreasing");
  std::vector<RateRow> rows;
  for (int k : ks) {
    for (const Mesh& m : meshes) {
      AssemblyOptions ao = opt.assembly;
      ao.element.k = k;
      const SparseSystem S = assemble(m, data, ao);
      const SolveReport sr = solve_spd(S, opt.solver);
      const ErrorReport er = error_norms(S, sr.g, ex);
      RateRow r;
      r.k = k;
      r.h = mesh_size(m);
      r.ndof = static_cast<int>(S.free.size());
      r.e_H1 = er.e_H1;
      r.e_L2 = er.e_L2;
      rows.push_back(r);
    }
  }
  fill_rates(rows);
  return rows;
}

inline std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string rates_csv(const std::vector<RateRow>& rows) {
  std::string s = "k,h,ndof,e_H1,e_L2,rate_H1,rate_L2\n";
  for (const auto& r : rows)
    s += std::to_string(r.k) + "," + format_double(r.h) + "," + std::to_string(r.ndof) + "," + format_double(r.e_H1) +
         "," + format_double(r.e_L2) + "," + format_double(r.rate_H1) + "," + format_double(r.rate_L2) + "\n";
  return s;
}

}  // namespace curvem
