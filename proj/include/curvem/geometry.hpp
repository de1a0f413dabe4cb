#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "curvem/curve.hpp"
#include "curvem/errors.hpp"
#include "curvem/gauss.hpp"
#include "curvem/mesh.hpp"
#include "curvem/poly2d.hpp"

namespace curvem {

/// Gauss points per curved edge: max(4k + 4, 16) unless overridden.
inline int curved_edge_points(int k, int override_points = 0) {
  return override_points > 0 ? override_points : std::max(4 * k + 4, 16);
}

struct QuadNode {
  Point x;
  double t;       // curve parameter
  double w;       // arclength weight
  Vec2 normal;    // unit normal, outward for the traversal orientation
};

struct BoundaryQuadRule {
  std::vector<QuadNode> nodes;

  double length() const {
    double s = 0.0;
    for (const auto& q : nodes) s += q.w;
    return s;
  }
};

/// Gauss-Legendre rule in the curve parameter with weights scaled by |x'(t)|.
/// orientation = +1 gives right-hand normals of the canonical direction (outward
/// for an element traversing the edge counterclockwise); -1 flips them.
inline BoundaryQuadRule edge_quadrature(const CurveSegment& c, int n_points, int orientation = 1) {
  if (n_points < 1) throw ContractError("edge_quadrature: n_points must be >= 1");
  const Rule1D r = gauss_legendre(n_points, c.t0(), c.t1());
  BoundaryQuadRule out;
  out.nodes.reserve(n_points);
  for (int i = 0; i < n_points; ++i) {
    const double t = r.x[i];
    const Vec2 d = c.tangent(t);
    const double speed = d.norm();
    if (!(speed > 1e-14 * std::max(1.0, (c.end() - c.start()).norm())))
      throw GeometryError("edge_quadrature: degenerate tangent at t = " + std::to_string(t));
    const Vec2 n = static_cast<double>(orientation) * Vec2(d.y(), -d.x()) / speed;
    out.nodes.push_back({c.eval(t), t, r.w[i] * speed, n});
  }
  return out;
}

inline BoundaryQuadRule edge_quadrature(const Mesh& m, int e, int n_points, int orientation = 1) {
  return edge_quadrature(m.edge_geometry(e), n_points, orientation);
}

// ---------------------------------------------------------------------------
// Trace generator points

/// Triangle over a curved edge: base a -> b is the chord in canonical direction.
struct IdealTriangle {
  Point a, b, c;

  /// Barycentric coordinates (lambda_a, lambda_b, lambda_c); valid outside the triangle too.
  std::array<double, 3> barycentric(const Point& x) const {
    const Vec2 e1 = b - a, e2 = c - a, d = x - a;
    const double det = cross(e1, e2);
    const double lb = cross(d, e2) / det;
    const double lc = cross(e1, d) / det;
    return {1.0 - lb - lc, lb, lc};
  }
};

/// Lagrange node set of P_k on the ideal triangle. Nodes 0 and 1 are the
/// chord endpoints; the rest are the trace generator points.
struct TgLayout {
  int k = 1;
  IdealTriangle tri;
  std::vector<std::array<int, 3>> bary;  // integer barycentric indices, sum k
  std::vector<Point> nodes;

  int tgp_count() const { return static_cast<int>(nodes.size()) - 2; }
  std::vector<Point> tg_points() const { return {nodes.begin() + 2, nodes.end()}; }

  /// Values of the Lagrange basis at x (one per node).
  Eigen::VectorXd basis(const Point& x) const {
    const auto lam = tri.barycentric(x);
    Eigen::VectorXd v(nodes.size());
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      double prod = 1.0;
      for (int c = 0; c < 3; ++c)
        for (int m = 0; m < bary[j][c]; ++m) prod *= (k * lam[c] - m) / (m + 1.0);
      v[j] = prod;
    }
    return v;
  }
};

/// Apex placed at equilateral height on the bulge side of the chord (left of
/// v0 -> v1 when the curve's parameter midpoint lies on the chord).
inline TgLayout tg_layout(const Mesh& m, int e, int k) {
  if (k < 1 || k > 3) throw ContractError("tg_points: k must be in {1,2,3}");
  const MeshEdge& ed = m.edges.at(e);
  const Point a = m.vertices[ed.v0], b = m.vertices[ed.v1];
  const double len = (b - a).norm();
  if (!(len > 0.0)) throw GeometryError("tg_points: coincident endpoints on edge " + std::to_string(e));
  const Vec2 dir = (b - a) / len;
  const Vec2 left(-dir.y(), dir.x());
  const Point mid = 0.5 * (a + b);
  double side = 1.0;
  if (ed.curve >= 0) {
    const CurveSegment& c = m.curves[ed.curve];
    const double bulge = (c.eval(0.5 * (c.t0() + c.t1())) - mid).dot(left);
    if (std::abs(bulge) > 1e-10 * len) side = bulge > 0 ? 1.0 : -1.0;
  }
  TgLayout out;
  out.k = k;
  out.tri = {a, b, mid + side * (std::sqrt(3.0) / 2.0) * len * left};
  out.bary.push_back({k, 0, 0});
  out.bary.push_back({0, k, 0});
  for (int l = k; l >= 0; --l)
    for (int j = 0; j <= k - l; ++j) {
      const int i = k - l - j;
      if ((i == k) || (j == k)) continue;
      out.bary.push_back({i, j, l});
    }
  for (const auto& bc : out.bary) {
    out.nodes.push_back((bc[0] * out.tri.a + bc[1] * out.tri.b + bc[2] * out.tri.c) / static_cast<double>(k));
  }
  out.nodes[0] = a;
  out.nodes[1] = b;
  return out;
}

inline std::vector<Point> tg_points(const Mesh& m, int e, int k) { return tg_layout(m, e, k).tg_points(); }

// ---------------------------------------------------------------------------
// Integration over elements

/// Number of Gauss points to use on a loop edge for integrands of polynomial degree `deg`.
inline int edge_points_for(const Mesh& m, int e, int deg, int curved_points) {
  const int straight = deg / 2 + 1;
  return m.edge_has_curve(e) && !m.curves[m.edges[e].curve].is_line() ? std::max(curved_points, straight)
                                                                      : straight;
}

/// int_P xi^a eta^b dA for a + b <= max_degree via the divergence theorem:
/// int_P phi = h / (d + 2) * oint phi (xi n_x + eta n_y) ds for phi homogeneous of degree d.
inline MomentTable monomial_moments(const Mesh& m, int el, const Point& center, double h, int max_degree,
                                    int curved_points) {
  MomentTable mt;
  mt.max_degree = max_degree;
  mt.values.assign(dim_pk(max_degree), 0.0);
  for (const LoopEntry& le : m.elements.at(el).loop) {
    const int n = edge_points_for(m, le.edge, max_degree + 1, curved_points);
    const BoundaryQuadRule rule = edge_quadrature(m, le.edge, n, le.dir);
    for (const QuadNode& q : rule.nodes) {
      const double xi = (q.x.x() - center.x()) / h, eta = (q.x.y() - center.y()) / h;
      const double flux = xi * q.normal.x() + eta * q.normal.y();
      for (int i = 0; i < static_cast<int>(mt.values.size()); ++i) {
        const MultiIndex mi = multi_index(i);
        mt.values[i] += q.w * h / (mi.degree() + 2.0) * flux * ScaledMonomialBasis::ipow(xi, mi.a) *
                        ScaledMonomialBasis::ipow(eta, mi.b);
      }
    }
  }
  return mt;
}

struct AreaRule {
  std::vector<Point> x;
  std::vector<double> w;

  double total() const {
    double s = 0.0;
    for (double v : w) s += v;
    return s;
  }
};

/// Fan rule from `center`: each loop edge spans the sector x = c + r (gamma(t) - c),
/// r in [0, 1], integrated with Gauss points in r and t. Exact on straight
/// sectors for polynomials of degree `order`.
inline AreaRule interior_quadrature(const Mesh& m, int el, int order, int curved_points, const Point& center) {
  if (order < 1) throw ContractError("interior_quadrature: order must be >= 1");
  const Rule1D rr = gauss_legendre((order + 3) / 2, 0.0, 1.0);
  const Element& E = m.elements.at(el);
  const double tol = 1e-12 * std::max(E.h * E.h, 1e-300);
  AreaRule out;
  for (const LoopEntry& le : E.loop) {
    const CurveSegment g = m.edge_geometry(le.edge);
    const int nt = edge_points_for(m, le.edge, order + 1, curved_points);
    const Rule1D rt = gauss_legendre(nt, g.t0(), g.t1());
    for (int i = 0; i < nt; ++i) {
      const Point p = g.eval(rt.x[i]);
      const double jac = le.dir * cross(p - center, g.tangent(rt.x[i]));
      if (!(jac > tol))
        throw MeshError("interior_quadrature: element " + std::to_string(el) +
                        " is not star-shaped with respect to its fan center");
      for (std::size_t j = 0; j < rr.x.size(); ++j) {
        const double r = rr.x[j];
        out.x.push_back(center + r * (p - center));
        out.w.push_back(rt.w[i] * rr.w[j] * r * jac);
      }
    }
  }
  return out;
}

inline AreaRule interior_quadrature(const Mesh& m, int el, int order, int curved_points) {
  return interior_quadrature(m, el, order, curved_points, m.elements.at(el).star_center);
}

// ---------------------------------------------------------------------------
// Element shape analysis

namespace detail {

struct SupportSample {
  Point x;
  Vec2 t;  // unit tangent along the ccw traversal
};

inline std::vector<SupportSample> support_samples(const Mesh& m, int el, int per_curve = 64) {
  std::vector<SupportSample> s;
  for (const LoopEntry& le : m.elements[el].loop) {
    const CurveSegment g = m.edge_geometry(le.edge);
    const bool curved = m.edge_has_curve(le.edge) && !g.is_line();
    const int n = curved ? per_curve : 1;
    for (int i = 0; i <= n; ++i) {
      const double t = curved ? g.t0() + (g.t1() - g.t0()) * i / n : 0.5 * (g.t0() + g.t1());
      const Vec2 d = le.dir * g.tangent(t);
      s.push_back({g.eval(t), d.normalized()});
      if (!curved) break;
    }
  }
  return s;
}

inline double support_distance(const std::vector<SupportSample>& s, const Point& c) {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& q : s) d = std::min(d, cross(q.t, c - q.x));
  return d;
}

}  // namespace detail

/// Boundary sample points (vertices plus dense samples along curved edges).
inline std::vector<Point> boundary_samples(const Mesh& m, int el, int per_curve = 64) {
  std::vector<Point> pts;
  for (const LoopEntry& le : m.elements[el].loop) {
    const CurveSegment g = m.edge_geometry(le.edge);
    const int n = (m.edge_has_curve(le.edge) && !g.is_line()) ? per_curve : 1;
    for (int i = 0; i < n; ++i) {
      const double u = le.dir > 0 ? static_cast<double>(i) / n : 1.0 - static_cast<double>(i) / n;
      pts.push_back(g.eval(g.t0() + (g.t1() - g.t0()) * u));
    }
  }
  return pts;
}

/// Arclength of an edge.
inline double edge_length(const Mesh& m, int e, int curved_points = 32) {
  if (!m.edge_has_curve(e)) return (m.vertices[m.edges[e].v1] - m.vertices[m.edges[e].v0]).norm();
  return edge_quadrature(m, e, curved_points).length();
}

/// Fills area, centroid, diameter, star center and the shape diagnostics of
/// every element. Throws MeshError for non-positive (clockwise) areas.
inline void finalize_geometry(Mesh& m, int curved_points = 32) {
  for (int el = 0; el < static_cast<int>(m.elements.size()); ++el) {
    Element& E = m.elements[el];
    const auto pts = boundary_samples(m, el);
    double h = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = i + 1; j < pts.size(); ++j) h = std::max(h, (pts[i] - pts[j]).norm());
    if (!(h > 0.0)) throw MeshError("element " + std::to_string(el) + " is degenerate");
    const MomentTable mt = monomial_moments(m, el, pts[0], h, 1, curved_points);
    const double area = mt(0, 0);
    if (!(area > 0.0))
      throw MeshError("element " + std::to_string(el) + " has non-positive area (loop must be counterclockwise)");
    E.area = area;
    E.h = h;
    E.centroid = pts[0] + h * Point(mt(1, 0), mt(0, 1)) / area;

    const auto samples = detail::support_samples(m, el);
    Point c = E.centroid;
    double best = detail::support_distance(samples, c);
    if (!(best > 1e-12 * h)) {
      // Chebyshev-like center: maximize the distance to all support lines.
      Point lo = pts[0], hi = pts[0];
      for (const auto& p : pts) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
      }
      const int g = 40;
      for (int i = 0; i <= g; ++i)
        for (int j = 0; j <= g; ++j) {
          const Point q(lo.x() + (hi.x() - lo.x()) * i / g, lo.y() + (hi.y() - lo.y()) * j / g);
          const double d = detail::support_distance(samples, q);
          if (d > best) {
            best = d;
            c = q;
          }
        }
      double step = 0.5 * (hi - lo).maxCoeff() / g;
      while (step > 1e-6 * h) {
        bool moved = false;
        for (const Vec2 d : {Vec2(1, 0), Vec2(-1, 0), Vec2(0, 1), Vec2(0, -1)}) {
          const Point q = c + step * d;
          const double v = detail::support_distance(samples, q);
          if (v > best) {
            best = v;
            c = q;
            moved = true;
          }
        }
        if (!moved) step *= 0.5;
      }
    }
    E.star_center = c;
    E.rho_ratio = best / h;
    double emin = std::numeric_limits<double>::infinity();
    for (const LoopEntry& le : E.loop) emin = std::min(emin, edge_length(m, le.edge, curved_points));
    E.min_edge_ratio = emin / h;
  }
}

}  // namespace curvem
