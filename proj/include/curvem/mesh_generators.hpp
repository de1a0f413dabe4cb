#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "curvem/geometry.hpp"
#include "curvem/mesh.hpp"

namespace curvem {

enum class BoundaryMode { Dirichlet, Robin, Mixed };

/// How the circle is represented in generated meshes.
enum class ArcMode {
  Arc,              // circular arcs, declared curved
  ChordCurved,      // straight chords still declared curved (idle tg generators)
  ChordStraight,    // straight chords declared straight
};

/// Incremental mesh construction from vertex loops.
class MeshBuilder {
 public:
  int vertex(const Point& p) {
    mesh_.vertices.push_back(p);
    return static_cast<int>(mesh_.vertices.size()) - 1;
  }

  /// Registers the edge {a, b}; a curved edge gets an arc of the circle (center, radius)
  /// between the two vertices, taking the short way round.
  int edge(int a, int b, ArcMode mode = ArcMode::ChordStraight, const Point& center = Point::Zero(),
           double radius = 0.0) {
    const auto key = std::minmax(a, b);
    auto it = ids_.find(key);
    if (it != ids_.end()) return it->second;
    MeshEdge ed;
    ed.v0 = key.first;
    ed.v1 = key.second;
    if (mode != ArcMode::ChordStraight) ed.declared = Declared::Curved;
    if (mode == ArcMode::Arc) {
      const Point p0 = mesh_.vertices[ed.v0] - center, p1 = mesh_.vertices[ed.v1] - center;
      const double th0 = std::atan2(p0.y(), p0.x());
      double d = std::atan2(p1.y(), p1.x()) - th0;
      if (d > std::numbers::pi) d -= 2 * std::numbers::pi;
      if (d < -std::numbers::pi) d += 2 * std::numbers::pi;
      mesh_.curves.emplace_back(CircularArc{center, radius, th0, th0 + d});
      ed.curve = static_cast<int>(mesh_.curves.size()) - 1;
    }
    mesh_.edges.push_back(ed);
    const int id = static_cast<int>(mesh_.edges.size()) - 1;
    ids_[key] = id;
    return id;
  }

  /// Adds an element bounded by the given vertex cycle (either orientation).
  void element(std::vector<int> vs, int region) {
    double a2 = 0.0;
    for (std::size_t i = 0; i < vs.size(); ++i)
      a2 += cross(mesh_.vertices[vs[i]], mesh_.vertices[vs[(i + 1) % vs.size()]]);
    if (a2 < 0.0) std::reverse(vs.begin(), vs.end());
    Element E;
    E.region = region;
    for (std::size_t i = 0; i < vs.size(); ++i) {
      const int a = vs[i], b = vs[(i + 1) % vs.size()];
      E.loop.push_back({edge(a, b), a < b ? 1 : -1});
    }
    mesh_.elements.push_back(E);
  }

  /// Tags every edge with a single element through `tag(midpoint)`, then validates
  /// and computes the derived element geometry.
  Mesh finish(const std::function<BoundaryTag(const Point&)>& tag, std::map<int, double> kappa) {
    std::vector<int> uses(mesh_.edges.size(), 0);
    for (const auto& E : mesh_.elements)
      for (const auto& le : E.loop) ++uses[le.edge];
    for (std::size_t e = 0; e < mesh_.edges.size(); ++e)
      if (uses[e] == 1) mesh_.edges[e].boundary = tag(mesh_.edge_geometry(static_cast<int>(e)).eval(0.5));
    mesh_.kappa = std::move(kappa);
    validate_topology(mesh_);
    finalize_geometry(mesh_);
    return std::move(mesh_);
  }

 private:
  Mesh mesh_;
  std::map<std::pair<int, int>, int> ids_;
};

namespace detail {

/// O-grid around a circle: an m x m core square of half-width a, then `layers`
/// rings blending the core boundary into the circle, then optionally `layers`
/// rings blending the circle into the square of half-width W. Layer index
/// `arc_layer` carries the circle.
struct OGrid {
  Point c;
  double a, r, W;
  int m, layers;
  bool outer;
  ArcMode arc;
};

inline void build_ogrid(MeshBuilder& B, const OGrid& g, int inner_region, int outer_region) {
  const int m = g.m, L = g.layers;
  std::vector<std::vector<int>> G(m + 1, std::vector<int>(m + 1));
  for (int i = 0; i <= m; ++i)
    for (int j = 0; j <= m; ++j)
      G[i][j] = B.vertex(g.c + g.a * Point(-1.0 + 2.0 * i / m, -1.0 + 2.0 * j / m));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) B.element({G[i][j], G[i + 1][j], G[i + 1][j + 1], G[i][j + 1]}, inner_region);

  std::vector<int> ring;
  for (int i = 0; i < m; ++i) ring.push_back(G[i][0]);
  for (int j = 0; j < m; ++j) ring.push_back(G[m][j]);
  for (int i = m; i > 0; --i) ring.push_back(G[i][m]);
  for (int j = m; j > 0; --j) ring.push_back(G[0][j]);
  const int nq = static_cast<int>(ring.size());
  std::vector<Point> core(nq), circ(nq), sq(nq);
  std::vector<Point> all;
  for (int q = 0; q < nq; ++q) {
    // Builder vertices are only reachable through the ids; recompute positions.
    const int i = q < m ? q : q < 2 * m ? m : q < 3 * m ? 3 * m - q : 0;
    const int j = q < m ? 0 : q < 2 * m ? q - m : q < 3 * m ? m : 4 * m - q;
    core[q] = g.c + g.a * Point(-1.0 + 2.0 * i / m, -1.0 + 2.0 * j / m);
    const Vec2 d = core[q] - g.c;
    circ[q] = g.c + g.r * d.normalized();
    sq[q] = g.c + (g.W / g.a) * d;
  }
  const int nl = g.outer ? 2 * L : L;
  std::vector<std::vector<int>> V(nl + 1, std::vector<int>(nq));
  V[0] = ring;
  for (int l = 1; l <= nl; ++l)
    for (int q = 0; q < nq; ++q) {
      Point p;
      if (l <= L) {
        const double s = double(l) / L;
        p = (1.0 - s) * core[q] + s * circ[q];
      } else {
        const double s = double(l - L) / L;
        p = (1.0 - s) * circ[q] + s * sq[q];
      }
      V[l][q] = B.vertex(p);
    }
  for (int q = 0; q < nq; ++q) B.edge(V[L][q], V[L][(q + 1) % nq], g.arc, g.c, g.r);
  for (int l = 0; l < nl; ++l)
    for (int q = 0; q < nq; ++q) {
      const int q1 = (q + 1) % nq;
      B.element({V[l][q], V[l + 1][q], V[l + 1][q1], V[l][q1]}, l < L ? inner_region : outer_region);
    }
}

inline int ogrid_cells(int n) {
  if (n < 2 || n % 2 != 0) throw ConfigError("refinement parameter n must be an even integer >= 2");
  return n / 2;
}

}  // namespace detail

struct InterfaceMeshOptions {
  ArcMode arc = ArcMode::Arc;
  BoundaryMode boundary = BoundaryMode::Dirichlet;
};

/// Unit square with a circular interface of radius r centred at (1/2, 1/2).
/// Region 1 is the disk, region 0 the rest. The circle carries 2n arcs; Mixed
/// boundary puts Dirichlet on x = 0 and y = 0 and Robin on x = 1 and y = 1.
inline Mesh square_circle_interface(int n, double r, const InterfaceMeshOptions& opt = {}) {
  const int m = detail::ogrid_cells(n);
  if (!(r > 0.0 && r < 0.5)) throw ConfigError("interface radius must lie in (0, 0.5)");
  MeshBuilder B;
  detail::build_ogrid(B, {Point(0.5, 0.5), 0.5 * r, r, 0.5, m, std::max(1, m / 2), true, opt.arc}, 1, 0);
  const auto tag = [&](const Point& x) {
    if (opt.boundary == BoundaryMode::Dirichlet) return BoundaryTag::Dirichlet;
    if (opt.boundary == BoundaryMode::Robin) return BoundaryTag::Robin;
    return (x.x() < 1e-12 || x.y() < 1e-12) ? BoundaryTag::Dirichlet : BoundaryTag::Robin;
  };
  return B.finish(tag, {{0, 1.0}, {1, 1.0}});
}

/// Unit disk centred at the origin with curved boundary arcs (2n of them).
/// Mixed boundary: Dirichlet on the lower half, Robin on the upper half.
inline Mesh disk_boundary(int n, BoundaryMode mode = BoundaryMode::Dirichlet, ArcMode arc = ArcMode::Arc) {
  const int m = detail::ogrid_cells(n);
  if (mode == BoundaryMode::Mixed && m % 2 != 0) throw ConfigError("mixed disk boundary needs n divisible by 4");
  MeshBuilder B;
  detail::build_ogrid(B, {Point(0.0, 0.0), 0.5, 1.0, 0.0, m, std::max(1, m / 2), false, arc}, 0, 0);
  const auto tag = [&](const Point& x) {
    if (mode == BoundaryMode::Dirichlet) return BoundaryTag::Dirichlet;
    if (mode == BoundaryMode::Robin) return BoundaryTag::Robin;
    return x.y() < 0.0 ? BoundaryTag::Dirichlet : BoundaryTag::Robin;
  };
  return B.finish(tag, {{0, 1.0}});
}

/// n x n grid of squares on the unit square, all edges straight.
inline Mesh square_straight(int n, BoundaryMode mode = BoundaryMode::Dirichlet) {
  if (n < 1) throw ConfigError("refinement parameter n must be positive");
  MeshBuilder B;
  std::vector<std::vector<int>> G(n + 1, std::vector<int>(n + 1));
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) G[i][j] = B.vertex(Point(double(i) / n, double(j) / n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) B.element({G[i][j], G[i + 1][j], G[i + 1][j + 1], G[i][j + 1]}, 0);
  const auto tag = [&](const Point& x) {
    if (mode == BoundaryMode::Dirichlet) return BoundaryTag::Dirichlet;
    if (mode == BoundaryMode::Robin) return BoundaryTag::Robin;
    return (x.x() < 1e-12 || x.y() < 1e-12) ? BoundaryTag::Dirichlet : BoundaryTag::Robin;
  };
  return B.finish(tag, {{0, 1.0}});
}

/// Applies the cubic reparametrization to every curve of the mesh.
inline void reparametrize_curves(Mesh& m, Warp w = Warp::Cubic) {
  for (auto& c : m.curves) c.set_warp(w);
}

inline BoundaryMode parse_boundary_mode(const std::string& s) {
  if (s == "dirichlet") return BoundaryMode::Dirichlet;
  if (s == "robin") return BoundaryMode::Robin;
  if (s == "mixed") return BoundaryMode::Mixed;
  throw ConfigError("unknown boundary mode '" + s + "' (dirichlet, robin, mixed)");
}

inline ArcMode parse_arc_mode(const std::string& s) {
  if (s == "arc") return ArcMode::Arc;
  if (s == "chord") return ArcMode::ChordCurved;
  if (s == "straight") return ArcMode::ChordStraight;
  throw ConfigError("unknown arc mode '" + s + "' (arc, chord, straight)");
}

}  // namespace curvem
