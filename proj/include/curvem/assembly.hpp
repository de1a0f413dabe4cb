#pragma once

#include <Eigen/Sparse>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "curvem/element.hpp"
#include "curvem/errors.hpp"
#include "curvem/mesh.hpp"

namespace curvem {

/// Global numbering of generators: vertices, then per-edge slots (GL values of
/// straight-declared edges, tg values of curved non-Dirichlet edges) by edge id,
/// then per-element moments.
struct DofMap {
  int k = 1;
  int n = 0;
  std::vector<int> vertex_dof;
  std::vector<int> edge_base, edge_count;
  std::vector<int> elem_base;
  std::vector<char> constrained;
  std::vector<double> prescribed;
  std::vector<std::pair<int, Point>> constraint_points;  // (global index, nodal location)

  int size() const { return n; }

  std::vector<int> local_to_global(const GeneratorLayout& L, int el) const {
    std::vector<int> out;
    out.reserve(L.slots.size());
    for (const Slot& s : L.slots) {
      switch (s.kind) {
        case SlotKind::Vertex: out.push_back(vertex_dof[s.entity]); break;
        case SlotKind::EdgeGL:
        case SlotKind::Tgp: out.push_back(edge_base[s.entity] + s.j); break;
        case SlotKind::Moment: out.push_back(elem_base[el] + s.j); break;
      }
    }
    return out;
  }

  std::vector<int> free_dofs() const {
    std::vector<int> f;
    for (int i = 0; i < n; ++i)
      if (!constrained[i]) f.push_back(i);
    return f;
  }
  int n_free() const { return static_cast<int>(free_dofs().size()); }
};

/// Dirichlet constraints cover every vertex on the closure of Gamma_D and the GL
/// slots of straight-declared Dirichlet edges. Curved Dirichlet edges own no slots.
inline DofMap number_generators(const Mesh& m, int k) {
  if (k < 1 || k > 3) throw ContractError("number_generators: k must be in {1,2,3}");
  DofMap d;
  d.k = k;
  const int nv = static_cast<int>(m.vertices.size()), ne = static_cast<int>(m.edges.size());
  d.vertex_dof.resize(nv);
  for (int v = 0; v < nv; ++v) d.vertex_dof[v] = d.n++;
  d.edge_base.assign(ne, -1);
  d.edge_count.assign(ne, 0);
  for (int e = 0; e < ne; ++e) {
    const MeshEdge& ed = m.edges[e];
    int cnt = 0;
    if (!ed.is_curved_declared())
      cnt = k - 1;
    else if (ed.boundary != BoundaryTag::Dirichlet)
      cnt = dim_pk(k) - 2;
    d.edge_base[e] = d.n;
    d.edge_count[e] = cnt;
    d.n += cnt;
  }
  d.elem_base.resize(m.elements.size());
  for (std::size_t el = 0; el < m.elements.size(); ++el) {
    d.elem_base[el] = d.n;
    d.n += dim_pk(k - 2);
  }
  d.constrained.assign(d.n, 0);
  d.prescribed.assign(d.n, 0.0);

  const auto gl = lobatto_interior(k);
  std::vector<char> vertex_constrained(nv, 0);
  for (int e = 0; e < ne; ++e) {
    const MeshEdge& ed = m.edges[e];
    if (ed.boundary != BoundaryTag::Dirichlet) continue;
    vertex_constrained[ed.v0] = vertex_constrained[ed.v1] = 1;
    if (!ed.is_curved_declared()) {
      const Point a = m.vertices[ed.v0], b = m.vertices[ed.v1];
      for (int j = 0; j < k - 1; ++j) {
        d.constrained[d.edge_base[e] + j] = 1;
        d.constraint_points.push_back({d.edge_base[e] + j, a + gl[j] * (b - a)});
      }
    }
  }
  for (int v = 0; v < nv; ++v)
    if (vertex_constrained[v]) {
      d.constrained[d.vertex_dof[v]] = 1;
      d.constraint_points.push_back({d.vertex_dof[v], m.vertices[v]});
    }

  // Every free generator must be referenced by some element.
  std::vector<char> used(d.n, 0);
  for (int el = 0; el < static_cast<int>(m.elements.size()); ++el)
    for (int g : d.local_to_global(build_layout(m, el, k), el)) used[g] = 1;
  for (int i = 0; i < d.n; ++i)
    if (!used[i] && !d.constrained[i])
      throw MeshError("generator " + std::to_string(i) + " is free but belongs to no element (inconsistent boundary tags)");
  return d;
}

inline void prescribe(DofMap& d, const ScalarField& g_D) {
  for (auto& [idx, x] : d.constraint_points) {
    const double v = g_D ? g_D(x) : 0.0;
    if (!std::isfinite(v)) throw DataError("g_D is not finite at a constrained node");
    d.prescribed[idx] = v;
  }
}

// ---------------------------------------------------------------------------

enum class OwnershipPolicy { SmallerId, LargerKappa, TwoSided };

/// Which elements stabilize the tg slots of each curved interior edge.
struct StabilizationOwnership {
  std::map<int, std::vector<int>> owners;

  bool owns(int edge, int el) const {
    auto it = owners.find(edge);
    if (it == owners.end()) return true;
    for (int o : it->second)
      if (o == el) return true;
    return false;
  }
};

/// Curved interior edges with a kappa jump get a single owner; all others are
/// stabilized from both sides.
inline StabilizationOwnership choose_stab_owner(const Mesh& m, OwnershipPolicy policy = OwnershipPolicy::SmallerId) {
  StabilizationOwnership own;
  const auto adj = m.edge_elements();
  for (int e = 0; e < static_cast<int>(m.edges.size()); ++e) {
    if (!m.edges[e].is_curved_declared() || adj[e].size() != 2) continue;
    int a = adj[e][0], b = adj[e][1];
    if (a > b) std::swap(a, b);
    const double ka = m.kappa_of(a), kb = m.kappa_of(b);
    if (ka == kb || policy == OwnershipPolicy::TwoSided) {
      own.owners[e] = {a, b};
    } else if (policy == OwnershipPolicy::SmallerId) {
      own.owners[e] = {a};
    } else {
      own.owners[e] = {ka > kb ? a : b};
    }
  }
  return own;
}

inline std::vector<bool> stabilization_mask(const GeneratorLayout& L, int el, const StabilizationOwnership& own) {
  std::vector<bool> mask(L.slots.size(), true);
  for (std::size_t i = 0; i < L.slots.size(); ++i)
    if (L.slots[i].kind == SlotKind::Tgp && !own.owns(L.slots[i].entity, el)) mask[i] = false;
  return mask;
}

// ---------------------------------------------------------------------------

/// Data of -div(kappa grad u) = f, u = g_D on Gamma_D, kappa du/dn + rho u = g_R on Gamma_R.
struct ProblemData {
  std::function<double(const Point&, int region)> f;
  ScalarField g_D;
  std::function<double(const Point&, const Vec2& normal, int region)> g_R;
  ScalarField rho;
};

struct AssemblyOptions {
  ElementOptions element;
  OwnershipPolicy policy = OwnershipPolicy::SmallerId;
  int threads = 1;
};

/// Assembled global system; keeps the local operators for post-processing.
struct SparseSystem {
  int k = 1;
  const Mesh* mesh = nullptr;
  DofMap dofs;
  StabilizationOwnership ownership;
  std::vector<LocalOperators> ops;
  std::vector<std::vector<int>> l2g;
  std::vector<std::vector<bool>> masks;
  ScalarField g_D;

  Eigen::SparseMatrix<double> K;  // sum of a_h^P, unconstrained
  Eigen::SparseMatrix<double> A;  // K + Robin mass
  Eigen::VectorXd F;              // load + Robin load - liftings of the curved Dirichlet trace

  std::vector<int> free;
  std::vector<int> free_index;  // global -> reduced index, -1 if constrained
  Eigen::SparseMatrix<double> A_ff;
  Eigen::VectorXd rhs;

  const ScalarField* psi() const { return g_D ? &g_D : nullptr; }

  Eigen::VectorXd local(const Eigen::VectorXd& g, int el) const {
    Eigen::VectorXd v(l2g[el].size());
    for (std::size_t i = 0; i < l2g[el].size(); ++i) v[i] = g[l2g[el][i]];
    return v;
  }

  /// Full generator vector from a reduced solution.
  Eigen::VectorXd expand(const Eigen::VectorXd& x_free) const {
    Eigen::VectorXd g(dofs.n);
    for (int i = 0; i < dofs.n; ++i) g[i] = dofs.constrained[i] ? dofs.prescribed[i] : x_free[free_index[i]];
    return g;
  }
};

namespace detail {

struct LocalResult {
  std::optional<LocalOperators> ops;
  Eigen::MatrixXd K, R;
  Eigen::VectorXd F;
};

inline void check_finite(const Eigen::MatrixXd& M, int el, const char* what) {
  if (!M.allFinite()) throw DataError(std::string("non-finite ") + what + " on element " + std::to_string(el));
}

}  // namespace detail

inline SparseSystem assemble(const Mesh& m, const ProblemData& data, const AssemblyOptions& opt) {
  SparseSystem S;
  S.k = opt.element.k;
  S.mesh = &m;
  S.dofs = number_generators(m, S.k);
  prescribe(S.dofs, data.g_D);
  S.ownership = choose_stab_owner(m, opt.policy);
  S.g_D = data.g_D;
  const ScalarField* psi = S.psi();

  const int ne = static_cast<int>(m.elements.size());
  std::vector<detail::LocalResult> res(ne);
  auto work = [&](int el) {
    auto& r = res[el];
    r.ops.emplace(m, el, opt.element);
    const LocalOperators& L = *r.ops;
    const int region = m.elements[el].region;
    const double kap = m.kappa_of(el);
    const auto mask = stabilization_mask(L.layout(), el, S.ownership);
    r.K = L.local_stiffness(kap, mask);
    r.R = Eigen::MatrixXd::Zero(L.size(), L.size());
    r.F = Eigen::VectorXd::Zero(L.size());
    if (data.f) r.F += L.local_load([&](const Point& x) { return data.f(x, region); });
    if (L.depends_on_psi()) r.F -= L.lifting_action(kap, mask, psi);
    const auto& loop = m.elements[el].loop;
    for (int p = 0; p < static_cast<int>(loop.size()); ++p) {
      if (m.edges[loop[p].edge].boundary != BoundaryTag::Robin) continue;
      auto rb = L.local_robin(
          p, data.rho, [&](const Point& x, const Vec2& n) { return data.g_R ? data.g_R(x, n, region) : 0.0; }, psi);
      r.R += rb.M;
      r.F += rb.F - rb.lifting;
    }
    detail::check_finite(r.K, el, "stiffness");
    detail::check_finite(r.R, el, "Robin block");
    detail::check_finite(r.F, el, "load");
  };
  const int nt = std::max(1, opt.threads);
  if (nt == 1) {
    for (int el = 0; el < ne; ++el) work(el);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(nt);
    for (int t = 0; t < nt; ++t)
      pool.emplace_back([&, t] {
        try {
          for (int el = t; el < ne; el += nt) work(el);
        } catch (...) {
          errs[t] = std::current_exception();
        }
      });
    for (auto& th : pool) th.join();
    for (auto& e : errs)
      if (e) std::rethrow_exception(e);
  }

  // Deterministic scatter in element order.
  std::vector<Eigen::Triplet<double>> tk, tr;
  S.F = Eigen::VectorXd::Zero(S.dofs.n);
  S.ops.reserve(ne);
  for (int el = 0; el < ne; ++el) {
    auto& r = res[el];
    const auto g = S.dofs.local_to_global(r.ops->layout(), el);
    for (std::size_t i = 0; i < g.size(); ++i) {
      S.F[g[i]] += r.F[i];
      for (std::size_t j = 0; j < g.size(); ++j) {
        tk.emplace_back(g[i], g[j], r.K(i, j));
        if (r.R(i, j) != 0.0) tr.emplace_back(g[i], g[j], r.R(i, j));
      }
    }
    S.masks.push_back(stabilization_mask(r.ops->layout(), el, S.ownership));
    S.l2g.push_back(g);
    S.ops.push_back(std::move(*r.ops));
  }
  S.K.resize(S.dofs.n, S.dofs.n);
  S.K.setFromTriplets(tk.begin(), tk.end());
  Eigen::SparseMatrix<double> R(S.dofs.n, S.dofs.n);
  R.setFromTriplets(tr.begin(), tr.end());
  S.A = S.K + R;

  // Symmetric elimination of the constrained generators.
  S.free = S.dofs.free_dofs();
  S.free_index.assign(S.dofs.n, -1);
  for (std::size_t i = 0; i < S.free.size(); ++i) S.free_index[S.free[i]] = static_cast<int>(i);
  Eigen::VectorXd u_c = Eigen::VectorXd::Zero(S.dofs.n);
  for (int i = 0; i < S.dofs.n; ++i)
    if (S.dofs.constrained[i]) u_c[i] = S.dofs.prescribed[i];
  const Eigen::VectorXd Au = S.A * u_c;
  S.rhs.resize(S.free.size());
  std::vector<Eigen::Triplet<double>> tf;
  for (int col = 0; col < S.A.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(S.A, col); it; ++it) {
      const int fi = S.free_index[it.row()], fj = S.free_index[it.col()];
      if (fi >= 0 && fj >= 0) tf.emplace_back(fi, fj, it.value());
    }
  S.A_ff.resize(S.free.size(), S.free.size());
  S.A_ff.setFromTriplets(tf.begin(), tf.end());
  for (std::size_t i = 0; i < S.free.size(); ++i) S.rhs[i] = S.F[S.free[i]] - Au[S.free[i]];
  return S;
}

/// Writes a matrix as "i j value" lines (0-based), preceded by a "rows cols nnz" header.
inline void export_coordinate(const Eigen::SparseMatrix<double>& A, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open " + path + " for writing");
  out << A.rows() << ' ' << A.cols() << ' ' << A.nonZeros() << '\n';
  char buf[64];
  for (int col = 0; col < A.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, col); it; ++it) {
      std::snprintf(buf, sizeof buf, "%.17g", it.value());
      out << it.row() << ' ' << it.col() << ' ' << buf << '\n';
    }
}

}  // namespace curvem
