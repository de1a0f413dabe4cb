#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <optional>
#include <tuple>
#include <vector>

#include "curvem/errors.hpp"
#include "curvem/gauss.hpp"
#include "curvem/geometry.hpp"
#include "curvem/mesh.hpp"
#include "curvem/poly2d.hpp"

namespace curvem {

/// {0} straight polygon, {1} curved edge shared with another element,
/// {2} curved edge on the Dirichlet boundary, {3} curved edge on the Robin boundary.
enum class ElementType { Straight = 0, CurvedInterface = 1, CurvedDirichlet = 2, CurvedRobin = 3 };

enum class SlotKind { Vertex, EdgeGL, Tgp, Moment };

/// One generator slot. `entity` is a vertex id, an edge id or (for moments) unused;
/// `j` is the index along the edge (canonical direction) or the moment multi-index.
struct Slot {
  SlotKind kind;
  int entity = -1;
  int j = 0;

  auto key() const { return std::tuple(static_cast<int>(kind), entity, j); }
};

struct GeneratorLayout {
  int k = 1;
  ElementType type = ElementType::Straight;
  int curved_pos = -1;  // loop position of the curved-declared edge
  std::vector<Slot> slots;

  int size() const { return static_cast<int>(slots.size()); }

  int index_of(SlotKind kind, int entity, int j = 0) const {
    for (int i = 0; i < size(); ++i)
      if (slots[i].kind == kind && slots[i].entity == entity && slots[i].j == j) return i;
    return -1;
  }
};

using ScalarField = std::function<double(const Point&)>;

inline ElementType element_type(const Mesh& m, int el) {
  const int p = m.curved_position(el);
  if (p < 0) return ElementType::Straight;
  switch (m.edges[m.elements[el].loop[p].edge].boundary) {
    case BoundaryTag::Interior: return ElementType::CurvedInterface;
    case BoundaryTag::Dirichlet: return ElementType::CurvedDirichlet;
    case BoundaryTag::Robin: return ElementType::CurvedRobin;
  }
  return ElementType::Straight;
}

/// Slots in canonical order: vertices (ccw), Gauss-Lobatto values per straight
/// edge (ccw), trace generator values of the curved edge, interior moments.
inline GeneratorLayout build_layout(const Mesh& m, int el, int k) {
  if (k < 1 || k > 3) throw ContractError("build_layout: k must be in {1,2,3}");
  const Element& E = m.elements.at(el);
  int curved = 0;
  for (const auto& le : E.loop) curved += m.edges[le.edge].is_curved_declared() ? 1 : 0;
  if (curved > 1) throw ContractError("build_layout: element " + std::to_string(el) + " has several curved edges");

  GeneratorLayout L;
  L.k = k;
  L.type = element_type(m, el);
  L.curved_pos = m.curved_position(el);
  const int n = static_cast<int>(E.loop.size());
  int gv0 = -1, gv1 = -1;
  if (L.type == ElementType::CurvedDirichlet) {
    const MeshEdge& g = m.edges[E.loop[L.curved_pos].edge];
    gv0 = g.v0;
    gv1 = g.v1;
  }
  for (int p = 0; p < n; ++p) {
    const int v = m.loop_vertex(el, p);
    if (v == gv0 || v == gv1) continue;
    L.slots.push_back({SlotKind::Vertex, v, 0});
  }
  for (int p = 0; p < n; ++p) {
    const int e = E.loop[p].edge;
    if (m.edges[e].is_curved_declared()) continue;
    for (int j = 0; j < k - 1; ++j) L.slots.push_back({SlotKind::EdgeGL, e, j});
  }
  if (L.type == ElementType::CurvedInterface || L.type == ElementType::CurvedRobin) {
    const int e = E.loop[L.curved_pos].edge;
    for (int j = 0; j < dim_pk(k) - 2; ++j) L.slots.push_back({SlotKind::Tgp, e, j});
  }
  for (int a = 0; a < dim_pk(k - 2); ++a) L.slots.push_back({SlotKind::Moment, -1, a});
  return L;
}

struct ElementOptions {
  int k = 1;
  int curved_points = 0;     // 0: max(4k + 4, 16)
  int interior_order = 0;    // 0: 2k + 4
  double tgp_corruption = 0.0;  // negative-control knob: shifts the apex used by curved traces (units of h)

  int curved() const { return curved_edge_points(k, curved_points); }
  int interior() const { return interior_order > 0 ? interior_order : 2 * k + 4; }
};

/// Value of a trace on the boundary as an affine function of the generators:
/// row . g + psi-dependent offset, where psi is the prescribed curved Dirichlet trace.
struct TraceRow {
  Eigen::RowVectorXd row;
  double psi_self = 0.0;                        // weight of psi at the point itself
  std::vector<std::pair<int, double>> psi_vertex;  // (vertex id, weight of psi at that vertex)

  double offset(const Mesh& m, const Point& x, const ScalarField* psi) const {
    if (psi == nullptr || !*psi) return 0.0;
    double v = psi_self != 0.0 ? psi_self * (*psi)(x) : 0.0;
    for (auto [vid, w] : psi_vertex) v += w * (*psi)(m.vertices[vid]);
    return v;
  }
  double eval(const Mesh& m, const Point& x, const Eigen::VectorXd& g, const ScalarField* psi) const {
    return row.dot(g) + offset(m, x, psi);
  }
};

struct BoundarySample {
  int pos;  // loop position
  QuadNode q;
  TraceRow trace;
};

/// Local VEM machinery of one element: generator layout, the matrix D of
/// generator values of the monomials, the projectors Pi-nabla and Pi0_{k-2},
/// and the local stiffness/load/Robin contributions.
class LocalOperators {
 public:
  LocalOperators(const Mesh& mesh, int el, const ElementOptions& opt)
      : mesh_(&mesh),
        el_(el),
        opt_(opt),
        layout_(build_layout(mesh, el, opt.k)),
        basis_(mesh.elements.at(el).centroid, mesh.elements.at(el).h, opt.k) {
    const Element& E = mesh.elements[el];
    const int k = opt.k, N = layout_.size(), P = basis_.size();
    for (int i = 0; i < N; ++i) slot_index_[layout_.slots[i].key()] = i;
    moments_ = monomial_moments(mesh, el, basis_.center(), basis_.h(), 2 * k, opt.curved());
    area_ = moments_(0, 0);
    gl_ = lobatto_interior(k);
    if (layout_.curved_pos >= 0) {
      tg_ = tg_layout(mesh, E.loop[layout_.curved_pos].edge, k);
      trace_tg_ = *tg_;
      if (opt.tgp_corruption != 0.0) {
        const Vec2 d = (tg_->tri.b - tg_->tri.a).normalized();
        trace_tg_->tri.c += opt.tgp_corruption * E.h * Vec2(-d.y(), d.x());
      }
    }

    // D: generator values of each monomial.
    D_.resize(N, P);
    for (int i = 0; i < N; ++i) {
      const Slot& s = layout_.slots[i];
      if (s.kind == SlotKind::Moment) {
        const MultiIndex b = multi_index(s.j);
        for (int a = 0; a < P; ++a) {
          const MultiIndex mi = multi_index(a);
          D_(i, a) = moments_(mi.a + b.a, mi.b + b.b) / area_;
        }
      } else {
        D_.row(i) = basis_.eval(slot_point(s)).transpose();
      }
    }

    // Boundary samples carrying the trace rows.
    for (int p = 0; p < static_cast<int>(E.loop.size()); ++p) {
      const LoopEntry& le = E.loop[p];
      const int n = boundary_points(le.edge);
      const BoundaryQuadRule rule = edge_quadrature(mesh, le.edge, n, le.dir);
      for (const QuadNode& q : rule.nodes) samples_.push_back({p, q, trace_row(p, q.t)});
    }

    G_ = curvem::stiffness_gram(moments_, basis_);
    Eigen::MatrixXd Gt = G_;
    Gt.row(0).setZero();
    B_ = Eigen::MatrixXd::Zero(P, N);
    for (const auto& s : samples_) {
      const Eigen::VectorXd mv = basis_.eval(s.q.x);
      const Eigen::VectorXd dn = basis_.grad(s.q.x) * s.q.normal;
      Gt.row(0) += s.q.w * mv.transpose();
      B_.row(0) += s.q.w * s.trace.row;
      for (int a = 1; a < P; ++a) B_.row(a) += s.q.w * dn[a] * s.trace.row;
    }
    if (k >= 2) {
      const Eigen::MatrixXd Lap = basis_.laplacian_matrix();  // dim P_{k-2} x P
      for (int b = 0; b < dim_pk(k - 2); ++b) {
        const int col = slot(SlotKind::Moment, -1, b);
        for (int a = 1; a < P; ++a) B_(a, col) -= area_ * Lap(b, a);
      }
    }
    gt_lu_ = Gt.fullPivLu();
    if (!gt_lu_.isInvertible())
      throw GeometryError("pi_nabla: singular projection system on element " + std::to_string(el));
    pi_nabla_ = gt_lu_.solve(B_);
    pi_gen_ = D_ * pi_nabla_;

    if (k >= 2) {
      const ScaledMonomialBasis low(basis_.center(), basis_.h(), k - 2);
      const Eigen::MatrixXd M = mass_moments(moments_, low, k - 2);
      Eigen::MatrixXd S = Eigen::MatrixXd::Zero(dim_pk(k - 2), N);
      for (int b = 0; b < dim_pk(k - 2); ++b) S(b, slot(SlotKind::Moment, -1, b)) = area_;
      pi0_ = M.ldlt().solve(S);
    }
  }

  const Mesh& mesh() const { return *mesh_; }
  int element() const { return el_; }
  int k() const { return opt_.k; }
  const ElementOptions& options() const { return opt_; }
  const GeneratorLayout& layout() const { return layout_; }
  const ScaledMonomialBasis& basis() const { return basis_; }
  const MomentTable& moments() const { return moments_; }
  double area() const { return area_; }
  int size() const { return layout_.size(); }

  /// N x dim P_k: generator values of each monomial (the operator G on the basis).
  const Eigen::MatrixXd& D() const { return D_; }
  /// dim P_k x N: generators -> coefficients of Pi-nabla_k.
  const Eigen::MatrixXd& pi_nabla() const { return pi_nabla_; }
  /// N x N: generators -> generators of G Pi-nabla_k.
  const Eigen::MatrixXd& pi_gen() const { return pi_gen_; }
  /// dim P_{k-2} x N: generators -> coefficients of Pi0_{k-2}; only for k >= 2.
  const Eigen::MatrixXd& pi0() const {
    if (opt_.k < 2) throw ContractError("pi0_km2: requires k >= 2");
    return pi0_;
  }
  const Eigen::MatrixXd& stiffness_gram() const { return G_; }
  const std::vector<BoundarySample>& samples() const { return samples_; }
  const std::optional<TgLayout>& tg() const { return tg_; }

  /// Contribution of a prescribed curved Dirichlet trace psi to Pi-nabla (zero
  /// when the element has no such edge or psi is empty).
  Eigen::VectorXd pi_offset(const ScalarField* psi) const {
    Eigen::VectorXd b0 = Eigen::VectorXd::Zero(basis_.size());
    if (!depends_on_psi() || psi == nullptr || !*psi) return b0;
    for (const auto& s : samples_) {
      const double off = s.trace.offset(*mesh_, s.q.x, psi);
      if (off == 0.0) continue;
      const Eigen::VectorXd dn = basis_.grad(s.q.x) * s.q.normal;
      b0[0] += s.q.w * off;
      for (int a = 1; a < basis_.size(); ++a) b0[a] += s.q.w * dn[a] * off;
    }
    return gt_lu_.solve(b0);
  }

  bool depends_on_psi() const {
    if (layout_.type == ElementType::CurvedDirichlet) return true;
    for (const auto& s : samples_)
      if (!s.trace.psi_vertex.empty()) return true;
    return false;
  }

  /// Pi-nabla_k coefficients of the function with generators g (and trace psi).
  Eigen::VectorXd project(const Eigen::VectorXd& g, const ScalarField* psi = nullptr) const {
    return pi_nabla_ * g + pi_offset(psi);
  }

  /// Generators of a polynomial given by its coefficients (the operator G).
  Eigen::VectorXd generators_of(const Eigen::VectorXd& coeffs) const { return D_ * coeffs; }

  /// Trace at parameter t of the edge at loop position `pos`.
  TraceRow trace_row(int pos, double t) const {
    const Element& E = mesh_->elements[el_];
    const int e = E.loop.at(pos).edge;
    const MeshEdge& ed = mesh_->edges[e];
    const int N = layout_.size(), k = opt_.k;
    TraceRow tr;
    tr.row = Eigen::RowVectorXd::Zero(N);
    const Point x = mesh_->edge_geometry(e).eval(t);
    if (ed.is_curved_declared()) {
      if (layout_.type == ElementType::CurvedDirichlet) {
        tr.psi_self = 1.0;
        return tr;
      }
      const Eigen::VectorXd l = trace_tg_->basis(x);
      tr.row[slot(SlotKind::Vertex, ed.v0)] += l[0];
      tr.row[slot(SlotKind::Vertex, ed.v1)] += l[1];
      for (int j = 0; j < trace_tg_->tgp_count(); ++j) tr.row[slot(SlotKind::Tgp, e, j)] += l[2 + j];
      return tr;
    }
    // Straight edge: 1-D Lagrange interpolation through 0, GL nodes, 1 (canonical parameter).
    std::vector<double> nodes{0.0};
    nodes.insert(nodes.end(), gl_.begin(), gl_.end());
    nodes.push_back(1.0);
    const Point a = mesh_->vertices[ed.v0], b = mesh_->vertices[ed.v1];
    const double u = (x - a).dot(b - a) / (b - a).squaredNorm();
    for (int i = 0; i <= k; ++i) {
      double li = 1.0;
      for (int j = 0; j <= k; ++j)
        if (j != i) li *= (u - nodes[j]) / (nodes[i] - nodes[j]);
      if (i == 0 || i == k) {
        const int v = i == 0 ? ed.v0 : ed.v1;
        const int s = slot_or_missing(SlotKind::Vertex, v);
        if (s >= 0)
          tr.row[s] += li;
        else
          tr.psi_vertex.push_back({v, li});
      } else {
        tr.row[slot(SlotKind::EdgeGL, e, i - 1)] += li;
      }
    }
    return tr;
  }

  double trace_eval(const Eigen::VectorXd& g, int pos, double t, const ScalarField* psi = nullptr) const {
    const Point x = mesh_->edge_geometry(mesh_->elements[el_].loop.at(pos).edge).eval(t);
    return trace_row(pos, t).eval(*mesh_, x, g, psi);
  }

  /// Physical location of a point-value slot.
  Point slot_point(const Slot& s) const {
    switch (s.kind) {
      case SlotKind::Vertex: return mesh_->vertices[s.entity];
      case SlotKind::EdgeGL: {
        const MeshEdge& ed = mesh_->edges[s.entity];
        const Point a = mesh_->vertices[ed.v0], b = mesh_->vertices[ed.v1];
        return a + gl_[s.j] * (b - a);
      }
      case SlotKind::Tgp: return tg_->nodes[2 + s.j];
      case SlotKind::Moment: break;
    }
    throw ContractError("slot_point: moment slots have no location");
  }

  /// Rows of (I - G Pi-nabla), the stabilization residuals.
  Eigen::MatrixXd residual_operator() const {
    return Eigen::MatrixXd::Identity(size(), size()) - pi_gen_;
  }

  /// kappa (Pi^T G Pi) + kappa sum_{i in mask} r_i r_i^T (dofi-dofi stabilization).
  Eigen::MatrixXd local_stiffness(double kappa, const std::vector<bool>& mask) const {
    const Eigen::MatrixXd R = residual_operator();
    Eigen::MatrixXd K = pi_nabla_.transpose() * G_ * pi_nabla_;
    for (int i = 0; i < size(); ++i)
      if (mask.at(i)) K += R.row(i).transpose() * R.row(i);
    K *= kappa;
    return 0.5 * (K + K.transpose());
  }

  Eigen::MatrixXd local_stiffness(double kappa) const { return local_stiffness(kappa, full_mask()); }

  std::vector<bool> full_mask() const { return std::vector<bool>(size(), true); }

  /// Action of the stiffness on the lifting of psi, to be subtracted from the load.
  Eigen::VectorXd lifting_action(double kappa, const std::vector<bool>& mask, const ScalarField* psi) const {
    const Eigen::VectorXd o = pi_offset(psi);
    const Eigen::MatrixXd R = residual_operator();
    const Eigen::VectorXd Do = D_ * o;
    Eigen::VectorXd r = pi_nabla_.transpose() * (G_ * o);
    for (int i = 0; i < size(); ++i)
      if (mask.at(i)) r -= R.row(i).transpose() * Do[i];
    return kappa * r;
  }

  /// a_h^P of the (generators, trace) pair with itself.
  double local_energy(double kappa, const std::vector<bool>& mask, const Eigen::VectorXd& g,
                      const ScalarField* psi = nullptr) const {
    const Eigen::VectorXd c = project(g, psi);
    const Eigen::VectorXd delta = g - D_ * c;
    double s = c.dot(G_ * c);
    for (int i = 0; i < size(); ++i)
      if (mask.at(i)) s += delta[i] * delta[i];
    return kappa * s;
  }

  /// Moments int_P f m_beta for |beta| <= deg with the interior rule.
  Eigen::VectorXd load_moments(const std::function<double(const Point&)>& f, int deg) const {
    const AreaRule rule = interior_quadrature(*mesh_, el_, opt_.interior(), opt_.curved());
    Eigen::VectorXd fm = Eigen::VectorXd::Zero(dim_pk(deg));
    for (std::size_t i = 0; i < rule.x.size(); ++i)
      fm += rule.w[i] * f(rule.x[i]) * basis_.eval(rule.x[i]).head(dim_pk(deg));
    return fm;
  }

  /// F_s = (f, T phi_s) with T = Pi-nabla_1 (k = 1) or Pi0_{k-2} (k >= 2).
  Eigen::VectorXd local_load(const std::function<double(const Point&)>& f) const {
    if (opt_.k == 1) return pi_nabla_.transpose() * load_moments(f, 1);
    return pi0_.transpose() * load_moments(f, opt_.k - 2);
  }

  struct RobinBlock {
    Eigen::MatrixXd M;
    Eigen::VectorXd F;
    Eigen::VectorXd lifting;  // int rho * (psi part of u) * phi, to subtract
  };

  /// Robin mass matrix and load over the edge at loop position `pos`.
  RobinBlock local_robin(int pos, const std::function<double(const Point&)>& rho,
                         const std::function<double(const Point&, const Vec2&)>& g_R,
                         const ScalarField* psi = nullptr) const {
    RobinBlock rb{Eigen::MatrixXd::Zero(size(), size()), Eigen::VectorXd::Zero(size()),
                  Eigen::VectorXd::Zero(size())};
    for (const auto& s : samples_) {
      if (s.pos != pos) continue;
      const double r = rho ? rho(s.q.x) : 0.0;
      rb.M += s.q.w * r * s.trace.row.transpose() * s.trace.row;
      if (g_R) rb.F += s.q.w * g_R(s.q.x, s.q.normal) * s.trace.row.transpose();
      const double off = s.trace.offset(*mesh_, s.q.x, psi);
      if (off != 0.0) rb.lifting += s.q.w * r * off * s.trace.row.transpose();
    }
    return rb;
  }

  int slot(SlotKind kind, int entity, int j = 0) const {
    const int s = slot_or_missing(kind, entity, j);
    if (s < 0) throw InternalError("missing generator slot");
    return s;
  }
  int slot_or_missing(SlotKind kind, int entity, int j = 0) const {
    auto it = slot_index_.find(std::tuple(static_cast<int>(kind), entity, j));
    return it == slot_index_.end() ? -1 : it->second;
  }

 private:
  int boundary_points(int e) const {
    const int k = opt_.k;
    const int straight = k + 2;
    if (mesh_->edge_has_curve(e) && !mesh_->curves[mesh_->edges[e].curve].is_line())
      return std::max(opt_.curved(), straight);
    return straight;
  }

  const Mesh* mesh_;
  int el_;
  ElementOptions opt_;
  GeneratorLayout layout_;
  ScaledMonomialBasis basis_;
  std::map<std::tuple<int, int, int>, int> slot_index_;
  MomentTable moments_;
  double area_ = 0.0;
  std::vector<double> gl_;
  std::optional<TgLayout> tg_, trace_tg_;
  Eigen::MatrixXd D_, G_, B_, pi_nabla_, pi_gen_, pi0_;
  Eigen::FullPivLU<Eigen::MatrixXd> gt_lu_;
  std::vector<BoundarySample> samples_;
};

}  // namespace curvem
